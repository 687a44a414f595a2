use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::seed::{self, stream};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    /// K × d.
    pub centers: DMatrix<f64>,
    pub sse: f64,
    pub iterations: usize,
    /// Restart that produced this result.
    pub restart: usize,
    /// SSE after every assignment step of the winning run.
    pub sse_history: Vec<f64>,
}

/// Sum of squared distances from each row of `points` to its cluster mean.
pub fn sse(points: &DMatrix<f64>, assignments: &[usize], centers: &DMatrix<f64>) -> f64 {
    (0..points.nrows()).map(|i| sq_dist(points, i, centers, assignments[i])).sum()
}

/// Best of `restarts` k-means++ seeded Lloyd runs; restart `r` uses
/// `derive(seed, KMEANS_RESTART, r)`. Ties in SSE go to the lower restart.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<KMeansResult, AnalysisError> {
    let m = points.nrows();
    if k == 0 || k > m {
        return Err(AnalysisError::Parameter(format!("K = {k} must be in 1..={m}")));
    }
    if restarts == 0 {
        return Err(AnalysisError::Parameter("restarts must be at least 1".into()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::Domain("points must be finite".into()));
    }
    let runs: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = seed::rng_for(seed, stream::KMEANS_RESTART, r as u64);
            let init = plus_plus(points, k, &mut rng);
            let mut run = lloyd(points, init);
            run.restart = r;
            run
        })
        .collect();
    Ok(runs.into_iter().reduce(|best, r| if r.sse < best.sse { r } else { best }).expect("restarts >= 1"))
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    points.row(i).iter().zip(centers.row(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn nearest(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.nrows() {
        let d = sq_dist(points, i, centers, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut seed::Rng) -> DMatrix<f64> {
    let (m, d) = points.shape();
    let mut centers = DMatrix::zeros(k, d);
    let first = rng.random_range(0..m);
    centers.set_row(0, &points.row(first));
    let mut d2: Vec<f64> = (0..m).map(|i| sq_dist(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, w) in d2.iter().enumerate() {
                acc += w;
                if *w > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| d2.iter().rposition(|w| *w > 0.0).expect("total > 0"))
        } else {
            rng.random_range(0..m)
        };
        centers.set_row(c, &points.row(pick));
        for (i, v) in d2.iter_mut().enumerate() {
            *v = v.min(sq_dist(points, i, &centers, c));
        }
    }
    centers
}

fn lloyd(points: &DMatrix<f64>, mut centers: DMatrix<f64>) -> KMeansResult {
    let (m, d) = points.shape();
    let k = centers.nrows();
    let mut assignments: Vec<usize> = (0..m).map(|i| nearest(points, i, &centers).0).collect();
    let mut history = vec![sse(points, &assignments, &centers)];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Update step: cluster means.
        let mut sums = DMatrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &a) in assignments.iter().enumerate() {
            counts[a] += 1;
            let mut row = sums.row_mut(a);
            row += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.row(c) / counts[c] as f64;
                centers.set_row(c, &mean);
            }
        }
        // Empty clusters take the point farthest from its own centre.
        let mut taken = vec![false; m];
        for c in (0..k).filter(|&c| counts[c] == 0) {
            let far = (0..m)
                .filter(|&i| !taken[i])
                .map(|i| (i, sq_dist(points, i, &centers, assignments[i])))
                .fold((usize::MAX, -1.0), |best, (i, dd)| if dd > best.1 { (i, dd) } else { best });
            if far.0 != usize::MAX {
                taken[far.0] = true;
                centers.set_row(c, &points.row(far.0));
                assignments[far.0] = c;
            }
        }
        let next: Vec<usize> = (0..m).map(|i| nearest(points, i, &centers).0).collect();
        let s = sse(points, &next, &centers);
        let prev = *history.last().expect("non-empty");
        debug_assert!(s <= prev + 1e-9 * prev.max(1.0), "SSE rose from {prev} to {s}");
        history.push(s);
        let changed = next != assignments;
        assignments = next;
        if !changed && counts.iter().all(|&c| c > 0) {
            break;
        }
    }
    // Centres are the means of the final partition.
    let mut sums = DMatrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &a) in assignments.iter().enumerate() {
        counts[a] += 1;
        let mut row = sums.row_mut(a);
        row += points.row(i);
    }
    for c in 0..k {
        if counts[c] > 0 {
            let mean = sums.row(c) / counts[c] as f64;
            centers.set_row(c, &mean);
        }
    }
    let final_sse = sse(points, &assignments, &centers);
    KMeansResult { assignments, centers, sse: final_sse, iterations, restart: 0, sse_history: history }
}
