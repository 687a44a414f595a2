//! Surface meshes, curvature and AP placement.

mod curvature;
pub mod io;
mod mesh;
mod placement;
pub mod primitives;

use thiserror::Error;

pub use curvature::{curvature_field, k_ring, tangent_frame, CurvatureField, MIN_FIT_NEIGHBORS};
pub use io::{load_mesh, load_ply, MeshFormat, PlyData};
pub use mesh::{closest_point_on_triangle, triangle_area, DegeneratePolicy, SurfaceMesh, SurfacePoint, DEGENERATE_AREA};
pub use placement::{
    place_aps, ApTemplate, AuricularPoint, AuricularPointSet, TemplatePoint, MAX_PROJECTION_FRACTION,
};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face with {vertices} vertices; only triangles are supported")]
    UnsupportedTopology { line: usize, vertices: usize },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("mesh has no vertices or no faces")]
    Empty,
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFinite { vertex: usize },
    #[error("face {face} references missing vertex {index}")]
    IndexOutOfRange { face: usize, index: usize },
    #[error("face {face} is degenerate")]
    DegenerateFace { face: usize },
    #[error("template line {line}: {message}")]
    Template { line: usize, message: String },
    #[error("cannot place {label}: nearest surface point is {distance:.3} mm away (limit {limit:.3} mm)")]
    Placement { label: String, distance: f64, limit: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
