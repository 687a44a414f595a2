use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatabilityReport {
    /// Per-AP sample standard deviation over mean.
    pub cv: Vec<f64>,
    pub mean_cv: f64,
}

/// Coefficient of variation per column of an R × N replicate matrix.
pub fn repeatability_cv(replicates: &DMatrix<f64>) -> Result<RepeatabilityReport, AnalysisError> {
    let (r, n) = replicates.shape();
    if r < 2 {
        return Err(AnalysisError::Parameter(format!("need at least 2 replicates, got {r}")));
    }
    if n == 0 {
        return Err(AnalysisError::Shape("no columns".into()));
    }
    let mut cv = Vec::with_capacity(n);
    for (j, col) in replicates.column_iter().enumerate() {
        let mean = col.sum() / r as f64;
        if mean == 0.0 || !mean.is_finite() {
            return Err(AnalysisError::Domain(format!("column {} has mean {mean}", j + 1)));
        }
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r as f64 - 1.0);
        cv.push(var.sqrt() / mean.abs());
    }
    let mean_cv = cv.iter().sum::<f64>() / n as f64;
    Ok(RepeatabilityReport { cv, mean_cv })
}
