#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;

/// Adjusted Rand index between two labelings.
pub fn ari(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut ra: BTreeMap<usize, f64> = BTreeMap::new();
    let mut rb: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let c2 = |x: f64| x * (x - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Sum over clusters of squared distances to the cluster mean, recomputed from scratch.
pub fn brute_sse(points: &DMatrix<f64>, assignments: &[usize]) -> f64 {
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let d = points.ncols();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..points.nrows()).filter(|&i| assignments[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        let mut mean = vec![0.0; d];
        for &i in &members {
            for j in 0..d {
                mean[j] += points[(i, j)];
            }
        }
        for m in mean.iter_mut() {
            *m /= members.len() as f64;
        }
        for &i in &members {
            for j in 0..d {
                total += (points[(i, j)] - mean[j]).powi(2);
            }
        }
    }
    total
}

/// Direct double-loop silhouette.
pub fn brute_silhouette(points: &DMatrix<f64>, assignments: &[usize]) -> Vec<f64> {
    let m = points.nrows();
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let dist = |i: usize, j: usize| -> f64 {
        let mut s = 0.0;
        for c in 0..points.ncols() {
            s += (points[(i, c)] - points[(j, c)]).powi(2);
        }
        s.sqrt()
    };
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let own = assignments[i];
        let own_n = assignments.iter().filter(|&&a| a == own).count();
        if own_n == 1 {
            out.push(0.0);
            continue;
        }
        let mut a = 0.0;
        for j in 0..m {
            if j != i && assignments[j] == own {
                a += dist(i, j);
            }
        }
        a /= (own_n - 1) as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c == own {
                continue;
            }
            let members: Vec<usize> = (0..m).filter(|&j| assignments[j] == c).collect();
            if members.is_empty() {
                continue;
            }
            let mean = members.iter().map(|&j| dist(i, j)).sum::<f64>() / members.len() as f64;
            b = b.min(mean);
        }
        out.push(if a < b {
            1.0 - a / b
        } else if a > b {
            b / a - 1.0
        } else {
            0.0
        });
    }
    out
}
