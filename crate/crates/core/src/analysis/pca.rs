use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCAResult {
    /// M × k projections of the centred data.
    pub scores: DMatrix<f64>,
    /// k × N, one unit principal direction per row.
    pub components: DMatrix<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Column means removed before projection.
    pub mean: DVector<f64>,
    /// Column scales divided out after centring (all ones when scaling is off).
    pub scale: DVector<f64>,
}

impl PCAResult {
    pub fn total_explained(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }
}

/// Principal components of the rows of `data`.
///
/// Data are always centred; with `scale` each column is also divided by its
/// sample standard deviation (constant columns are left unscaled). Each
/// component's sign is fixed so its largest-magnitude entry is positive.
pub fn pca(data: &DMatrix<f64>, k: usize, scale: bool) -> Result<PCAResult, AnalysisError> {
    let (m, n) = data.shape();
    if m < 2 {
        return Err(AnalysisError::Parameter(format!("PCA needs at least 2 rows, got {m}")));
    }
    if k == 0 || k > (m - 1).min(n) {
        return Err(AnalysisError::Parameter(format!("k = {k} outside 1..={}", (m - 1).min(n))));
    }
    let mean = data.row_mean().transpose();
    let mut x = data.clone();
    for mut row in x.row_iter_mut() {
        row -= mean.transpose();
    }
    let scale_v = if scale {
        let s = DVector::from_fn(n, |j, _| {
            let sd = (x.column(j).norm_squared() / (m as f64 - 1.0)).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        });
        for j in 0..n {
            x.column_mut(j).unscale_mut(s[j]);
        }
        s
    } else {
        DVector::from_element(n, 1.0)
    };

    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let total: f64 = svd.singular_values.iter().map(|s| s * s).sum();
    let mut components = DMatrix::zeros(k, n);
    let mut ratios = Vec::with_capacity(k);
    for (r, &idx) in order.iter().take(k).enumerate() {
        let mut c = v_t.row(idx).clone_owned();
        let pivot = c.iter().copied().enumerate().fold((0, 0.0f64), |best, (j, v)| if v.abs() > best.1.abs() { (j, v) } else { best });
        if pivot.1 < 0.0 {
            c.neg_mut();
        }
        components.set_row(r, &c);
        let s = svd.singular_values[idx];
        ratios.push(if total > 0.0 { s * s / total } else { 0.0 });
    }
    let scores = &x * components.transpose();
    Ok(PCAResult { scores, components, explained_variance_ratio: ratios, mean, scale: scale_v })
}
