use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AESRMatrix, AnalysisError};
use crate::seed::{self, stream};

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
pub const SIGNIFICANCE: f64 = 0.05;
/// |PCC| below this counts as no correlation regardless of p.
pub const MIN_EFFECT: f64 = 0.4;
const PERMUTATION_CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub pcc: f64,
    pub p_value: f64,
    pub n: usize,
    pub permutations: usize,
    /// `p > 0.05 || |pcc| < 0.4`.
    pub uncorrelated: bool,
}

/// Pearson product-moment coefficient, two-pass centred sums.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::Shape(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(AnalysisError::Parameter(format!("correlation needs at least 3 pairs, got {}", x.len())));
    }
    let (xc, sx) = centred(x)?;
    let (yc, sy) = centred(y)?;
    let cov: f64 = xc.iter().zip(&yc).map(|(a, b)| a * b).sum();
    Ok((cov / (sx * sy)).clamp(-1.0, 1.0))
}

/// Centred copy and root sum of squares.
fn centred(v: &[f64]) -> Result<(Vec<f64>, f64), AnalysisError> {
    if v.iter().any(|a| !a.is_finite()) {
        return Err(AnalysisError::Domain("values must be finite".into()));
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let c: Vec<f64> = v.iter().map(|a| a - mean).collect();
    let ss = c.iter().map(|a| a * a).sum::<f64>().sqrt();
    if ss == 0.0 {
        return Err(AnalysisError::UndefinedCorrelation("one variable has zero variance".into()));
    }
    Ok((c, ss))
}

/// PCC with a two-sided permutation p-value `(count + 1) / (n_perm + 1)`.
///
/// Permutations run in chunks of 1024; chunk `c` shuffles with
/// `derive(seed, PERMUTATION, c)`, so the p-value is independent of threading.
pub fn correlation(x: &[f64], y: &[f64], n_perm: usize, seed: u64) -> Result<CorrelationResult, AnalysisError> {
    let pcc = pearson(x, y)?;
    let (xc, sx) = centred(x)?;
    let (yc, sy) = centred(y)?;
    let observed = pcc.abs() * (1.0 - 1e-12);
    let chunks = n_perm.div_ceil(PERMUTATION_CHUNK);
    let count: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng_for(seed, stream::PERMUTATION, c as u64);
            let mut perm = yc.clone();
            let todo = PERMUTATION_CHUNK.min(n_perm - c * PERMUTATION_CHUNK);
            (0..todo)
                .filter(|_| {
                    perm.shuffle(&mut rng);
                    let r = xc.iter().zip(&perm).map(|(a, b)| a * b).sum::<f64>() / (sx * sy);
                    r.abs() >= observed
                })
                .count()
        })
        .sum();
    let p_value = (count + 1) as f64 / (n_perm + 1) as f64;
    Ok(CorrelationResult {
        pcc,
        p_value,
        n: x.len(),
        permutations: n_perm,
        uncorrelated: p_value > SIGNIFICANCE || pcc.abs() < MIN_EFFECT,
    })
}

/// Bounds outside which a normalized value marks its row as abnormal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExclusionRule {
    pub min: f64,
    pub max: f64,
}

impl Default for ExclusionRule {
    fn default() -> Self {
        Self { min: 0.05, max: 20.0 }
    }
}

impl ExclusionRule {
    pub fn is_abnormal(&self, row: &[f64]) -> bool {
        row.iter().any(|v| !(self.min..=self.max).contains(v))
    }

    /// Indices of abnormal rows.
    pub fn flag(&self, m: &AESRMatrix) -> Vec<usize> {
        let flagged: Vec<usize> = (0..m.nrows()).filter(|&i| self.is_abnormal(&m.row(i))).collect();
        if !flagged.is_empty() {
            log::info!("excluding {} of {} datasets outside [{}, {}]", flagged.len(), m.nrows(), self.min, self.max);
        }
        flagged
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_affine() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin() + i as f64 * 0.1).collect();
        let r = correlation(&x, &x, 999, 3).unwrap();
        assert!((r.pcc - 1.0).abs() < 1e-15);
        assert_eq!(r.p_value, 1.0 / 1000.0);
        assert!(!r.uncorrelated);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 7.0).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_variance() {
        assert!(matches!(pearson(&[1.0, 2.0, 3.0], &[4.0; 3]), Err(AnalysisError::UndefinedCorrelation(_))));
    }

    #[test]
    fn p_value_deterministic() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0, 6.0, 8.0, 7.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 7.0, 9.0];
        let a = correlation(&x, &y, 5000, 11).unwrap();
        assert_eq!(a, correlation(&x, &y, 5000, 11).unwrap());
        assert!(a.p_value > 0.0 && a.p_value <= 1.0);
    }

    #[test]
    fn exclusion_bounds() {
        let rule = ExclusionRule::default();
        assert!(!rule.is_abnormal(&[0.05, 1.0, 20.0]));
        assert!(rule.is_abnormal(&[0.04, 1.0]));
        assert!(rule.is_abnormal(&[21.0]));
    }
}
