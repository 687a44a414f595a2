use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    pub values: Vec<f64>,
    pub mean: f64,
}

/// Per-point silhouette `s(i)` from mean intra-cluster distance `a(i)` and
/// smallest mean distance to another cluster `b(i)`. Points alone in their
/// cluster score 0.
pub fn silhouette(points: &DMatrix<f64>, assignments: &[usize]) -> Result<Silhouette, AnalysisError> {
    let m = points.nrows();
    if assignments.len() != m {
        return Err(AnalysisError::Shape(format!("{} assignments for {m} points", assignments.len())));
    }
    let k = assignments.iter().max().map_or(0, |a| a + 1);
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    let used = sizes.iter().filter(|&&s| s > 0).count();
    if used < 2 {
        return Err(AnalysisError::UndefinedSilhouette(used));
    }
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(AnalysisError::Parameter(format!("cluster {c} is empty")));
    }

    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|i| {
            let own = assignments[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..m {
                if j != i {
                    sums[assignments[j]] += distance(points, i, j);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k).filter(|&c| c != own).map(|c| sums[c] / sizes[c] as f64).fold(f64::INFINITY, f64::min);
            if a < b {
                1.0 - a / b
            } else if a > b {
                b / a - 1.0
            } else {
                0.0
            }
        })
        .collect();
    let mean = values.iter().sum::<f64>() / m as f64;
    Ok(Silhouette { values, mean })
}

fn distance(points: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    points.row(i).iter().zip(points.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
