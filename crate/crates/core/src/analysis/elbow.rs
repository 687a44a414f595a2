use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Distances within this of the maximum count as ties.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elbow {
    pub k: usize,
    /// Signed distance below the chord for K = 1..=K_max, normalized axes.
    pub distances: Vec<f64>,
    pub warning: Option<String>,
}

/// Elbow of an SSE curve given for K = 1..=K_max, over every interior K.
pub fn select_k_elbow(sse_by_k: &[f64]) -> Result<Elbow, AnalysisError> {
    let n = sse_by_k.len();
    if n < 3 {
        return Err(AnalysisError::Parameter(format!("elbow needs SSE for at least 3 values of K, got {n}")));
    }
    select_k_elbow_in(sse_by_k, 2, n - 1)
}

/// Elbow restricted to `k_min..=k_max` (clamped to the interior of the curve).
pub fn select_k_elbow_in(sse_by_k: &[f64], k_min: usize, k_max: usize) -> Result<Elbow, AnalysisError> {
    let n = sse_by_k.len();
    if n < 3 {
        return Err(AnalysisError::Parameter(format!("elbow needs SSE for at least 3 values of K, got {n}")));
    }
    if sse_by_k.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(AnalysisError::Domain("SSE values must be finite and non-negative".into()));
    }
    let lo = k_min.max(2);
    let hi = k_max.min(n - 1);
    if lo > hi {
        return Err(AnalysisError::Parameter(format!("no interior K in {k_min}..={k_max} for a curve of length {n}")));
    }

    let scale = sse_by_k[0].max(f64::MIN_POSITIVE);
    let warning = sse_by_k
        .windows(2)
        .position(|w| w[1] > w[0] + 1e-9 * scale)
        .map(|i| format!("SSE increases from K = {} to K = {}", i + 1, i + 2));
    if let Some(w) = &warning {
        log::warn!("{w}");
    }

    let max = sse_by_k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = sse_by_k.iter().copied().fold(f64::INFINITY, f64::min);
    let span = max - min;
    let pts: Vec<(f64, f64)> = sse_by_k
        .iter()
        .enumerate()
        .map(|(i, s)| (i as f64 / (n - 1) as f64, if span > 0.0 { (s - min) / span } else { 0.0 }))
        .collect();
    let (x0, y0) = pts[0];
    let (x1, y1) = pts[n - 1];
    let (dx, dy) = (x1 - x0, y1 - y0);
    let len = (dx * dx + dy * dy).sqrt();
    let distances: Vec<f64> = pts.iter().map(|(x, y)| (dy * (x - x0) - dx * (y - y0)) / len).collect();

    let best = (lo..=hi).map(|k| distances[k - 1]).fold(f64::NEG_INFINITY, f64::max);
    let k = (lo..=hi).find(|&k| distances[k - 1] >= best - TIE_EPS).expect("non-empty range");
    Ok(Elbow { k, distances, warning })
}
