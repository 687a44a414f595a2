use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{kmeans, normalize_matrix_spatial, pca, select_k_elbow_in, silhouette, AESRMatrix, AnalysisError, KMeansResult};
use crate::seed::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Divide each row by its entry at this column.
    Spatial(usize),
    /// Rows are used as given (for example already normalized to period I).
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterSpace {
    /// Cluster the PCA scores.
    Pca,
    /// Cluster the normalized rows directly.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub normalization: Normalization,
    pub pca_components: usize,
    pub scale: bool,
    pub cluster_space: ClusterSpace,
    pub k_min: usize,
    /// Clamped to M − 1.
    pub k_max: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            normalization: Normalization::Spatial(0),
            pca_components: 3,
            scale: false,
            cluster_space: ClusterSpace::Pca,
            k_min: 2,
            k_max: 8,
            restarts: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsePoint {
    pub k: usize,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub labels: Vec<String>,
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub sse: f64,
    pub sse_curve: Vec<SsePoint>,
    pub elbow_distances: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub silhouette: Vec<f64>,
    pub mean_silhouette: f64,
    pub warnings: Vec<String>,
    pub seed: u64,
}

/// Normalize, reduce with PCA, scan K, pick the elbow and score it.
///
/// K = 1..=k_max are all clustered (K = 1 anchors the elbow chord); the elbow
/// is chosen within `k_min..=k_max`. Run K uses `derive(seed, PIPELINE_K, K)`.
pub fn cluster_pipeline(matrix: &AESRMatrix, options: &PipelineOptions) -> Result<ClusterReport, AnalysisError> {
    let m = matrix.nrows();
    if m < 4 {
        return Err(AnalysisError::Parameter(format!("clustering needs at least 4 datasets, got {m}")));
    }
    let data = match options.normalization {
        Normalization::Spatial(r) => normalize_matrix_spatial(matrix, r)?.values().clone(),
        Normalization::None => matrix.values().clone(),
    };
    let k_pca = options.pca_components.min(m - 1).min(matrix.ncols());
    let reduced = pca(&data, k_pca, options.scale)?;
    let space: DMatrix<f64> = match options.cluster_space {
        ClusterSpace::Pca => reduced.scores.clone(),
        ClusterSpace::Raw => data,
    };

    let k_max = options.k_max.min(m - 1);
    if k_max < 3 || options.k_min > k_max || options.k_min < 2 {
        return Err(AnalysisError::Parameter(format!(
            "k range {}..={} invalid for {m} datasets (need 2 <= k_min <= k_max <= M - 1, k_max >= 3)",
            options.k_min, options.k_max
        )));
    }
    let runs: Vec<KMeansResult> = (1..=k_max)
        .into_par_iter()
        .map(|k| kmeans(&space, k, options.restarts, seed::derive(options.seed, stream::PIPELINE_K, k as u64)))
        .collect::<Result<_, _>>()?;
    let curve: Vec<f64> = runs.iter().map(|r| r.sse).collect();
    let elbow = select_k_elbow_in(&curve, options.k_min, k_max)?;
    let chosen = &runs[elbow.k - 1];
    let sil = silhouette(&space, &chosen.assignments)?;

    let mut warnings = Vec::new();
    warnings.extend(elbow.warning.clone());
    Ok(ClusterReport {
        k: elbow.k,
        labels: matrix.labels().to_vec(),
        assignments: chosen.assignments.clone(),
        centers: chosen.centers.row_iter().map(|r| r.iter().copied().collect()).collect(),
        sse: chosen.sse,
        sse_curve: curve.iter().enumerate().map(|(i, &s)| SsePoint { k: i + 1, sse: s }).collect(),
        elbow_distances: elbow.distances,
        explained_variance_ratio: reduced.explained_variance_ratio,
        silhouette: sil.values,
        mean_silhouette: sil.mean,
        warnings,
        seed: options.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Side {
    pub fn suffix(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }
}

/// Split `"S07-L"` into `("S07", Left)`.
pub fn parse_side_label(label: &str) -> Option<(&str, Side)> {
    let (subject, side) = label.rsplit_once('-')?;
    let side = match side {
        "L" | "l" => Side::Left,
        "R" | "r" => Side::Right,
        _ => return None,
    };
    (!subject.is_empty()).then_some((subject, side))
}

pub fn has_side_labels(labels: &[String]) -> bool {
    !labels.is_empty() && labels.iter().all(|l| parse_side_label(l).is_some())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concordance {
    pub fraction: f64,
    pub subjects: usize,
    pub matched: usize,
    /// `matrix[left][right]` counts subjects by the clusters of their two ears.
    pub matrix: Vec<Vec<usize>>,
}

/// Share of subjects whose left and right ears fall in one cluster.
pub fn concordance(assignments: &[usize], labels: &[String], k: usize) -> Result<Concordance, AnalysisError> {
    if assignments.len() != labels.len() {
        return Err(AnalysisError::Shape(format!("{} assignments for {} labels", assignments.len(), labels.len())));
    }
    let mut ears: BTreeMap<&str, [Option<usize>; 2]> = BTreeMap::new();
    for (label, &a) in labels.iter().zip(assignments) {
        if a >= k {
            return Err(AnalysisError::Parameter(format!("assignment {a} outside 0..{k}")));
        }
        let (subject, side) =
            parse_side_label(label).ok_or_else(|| AnalysisError::Label(format!("`{label}` is not of the form SUBJECT-L/R")))?;
        let slot = &mut ears.entry(subject).or_default()[side as usize];
        if slot.is_some() {
            return Err(AnalysisError::Label(format!("subject {subject} has two {side:?} ears")));
        }
        *slot = Some(a);
    }
    let mut matrix = vec![vec![0usize; k]; k];
    for (subject, pair) in &ears {
        match pair {
            [Some(l), Some(r)] => matrix[*l][*r] += 1,
            _ => return Err(AnalysisError::Label(format!("subject {subject} is missing an ear"))),
        }
    }
    let subjects = ears.len();
    let matched = (0..k).map(|c| matrix[c][c]).sum();
    let fraction = if subjects > 0 { matched as f64 / subjects as f64 } else { 0.0 };
    Ok(Concordance { fraction, subjects, matched, matrix })
}
