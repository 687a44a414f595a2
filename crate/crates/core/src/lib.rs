//! Software pipeline for conformable full-auricle sensing.
//!
//! - [`geometry`]: mesh loading, curvature, AP placement.
//! - [`electrode_design`]: curved contact-area computation and per-AP diameter solving.
//! - [`acquisition`]: deterministic simulation of the multiplexed resistance chain
//!   and synthetic cohorts / exercise sessions.
//! - [`analysis`]: normalization, PCA, k-means with elbow and silhouette,
//!   correlation statistics, repeatability and contour interpolation.

pub mod acquisition;
pub mod analysis;
pub mod electrode_design;
pub mod geometry;
pub mod seed;
