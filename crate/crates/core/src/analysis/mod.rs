//! Normalization, dimensionality reduction, clustering, correlation,
//! repeatability and contour interpolation of AESR datasets.

mod contour;
mod correlation;
mod elbow;
mod kmeans;
mod matrix;
mod normalize;
mod pca;
mod pipeline;
mod repeatability;
mod silhouette;

use thiserror::Error;

pub use contour::{interpolate_contour, sibson_weights, ContourField, ContourInterpolator, ContourMethod, Projection};
pub use correlation::{correlation, pearson, CorrelationResult, ExclusionRule, DEFAULT_PERMUTATIONS, MIN_EFFECT, SIGNIFICANCE};
pub use elbow::{select_k_elbow, select_k_elbow_in, Elbow};
pub use kmeans::{kmeans, sse, KMeansResult, MAX_ITERATIONS};
pub use matrix::AESRMatrix;
pub use normalize::{normalize_matrix_spatial, normalize_spatial, normalize_temporal};
pub use pca::{pca, PCAResult};
pub use pipeline::{
    cluster_pipeline, concordance, has_side_labels, parse_side_label, ClusterReport, ClusterSpace, Concordance,
    Normalization, PipelineOptions, Side, SsePoint,
};
pub use repeatability::{repeatability_cv, RepeatabilityReport};
pub use silhouette::{silhouette, Silhouette};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("CSV row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("silhouette undefined with {0} non-empty cluster(s)")]
    UndefinedSilhouette(usize),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("degenerate AP configuration: {0}")]
    Degenerate(String),
}
