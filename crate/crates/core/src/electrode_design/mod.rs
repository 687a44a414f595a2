//! Equal-contact-area electrode design on curved skin.
//!
//! A cylindrical pathway of fixed diameter touches very different amounts of
//! skin depending on local curvature and orientation. This module measures the
//! true curved contact patch and sizes each pathway so every AP gets the same
//! area.

mod area;
mod array;
mod solver;

use thiserror::Error;

pub use area::{clipped_area, contact_patch, sensing_area, ContactPatch, Cylinder, AREA_CONVERGENCE, MAX_AXIS_ANGLE_DEG};
pub use array::{
    design_array, fixed_diameter_areas, pathway_axis, relative_spread, ArrayDesign, DesignOptions, ElectrodeSpec,
    FailedAp, TiltPolicy, DEFAULT_TARGET_AREA,
};
pub use solver::{solve_diameter, DiameterSolution, DEFAULT_TOLERANCE, MIN_DIAMETER};

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("diameter must be positive and finite, got {0}")]
    InvalidDiameter(f64),
    #[error("pathway axis must be a nonzero finite vector")]
    InvalidAxis,
    #[error("tilt must lie in [0, 90) degrees, got {0}")]
    InvalidTilt(f64),
    #[error("expected {expected} tilt values, got {got}")]
    TiltCount { expected: usize, got: usize },
    #[error("invalid target or tolerance {0}")]
    InvalidTarget(f64),
    #[error("pathway centre is {distance:.3e} mm off the surface")]
    OffSurface { distance: f64 },
    #[error("pathway axis is {angle_deg:.1} degrees from the surface normal (limit {MAX_AXIS_ANGLE_DEG})")]
    TangentAxis { angle_deg: f64 },
    #[error("cylinder does not intersect the mesh")]
    ZeroArea,
    #[error("target area {target:.4} mm^2 unreachable: {reason}")]
    Unreachable { target: f64, reason: String },
    #[error("contact area decreases with diameter between D = {lo:.6} and {hi:.6} mm")]
    NonMonotone { lo: f64, hi: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
