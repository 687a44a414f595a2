//! Per-AP electrode sizing to a common contact area.

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{sensing_area, solve_diameter, DesignError};
use crate::geometry::{curvature_field, tangent_frame, AuricularPoint, AuricularPointSet, SurfaceMesh};

/// Contact area of a 3 mm pathway on flat skin (mm²).
pub const DEFAULT_TARGET_AREA: f64 = std::f64::consts::PI * 1.5 * 1.5;

/// How each pathway is oriented relative to the local surface normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TiltPolicy {
    /// Along the surface normal.
    Normal,
    /// The same tilt (degrees) at every AP.
    Uniform(f64),
    /// One tilt per AP, in AP order.
    PerAp(Vec<f64>),
}

impl TiltPolicy {
    fn tilt_for(&self, index: usize) -> f64 {
        match self {
            TiltPolicy::Normal => 0.0,
            TiltPolicy::Uniform(t) => *t,
            TiltPolicy::PerAp(ts) => ts[index],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// Bound on the relative area spread across the array.
    pub tolerance: f64,
    /// Neighbourhood size for the curvature fit reported per AP.
    pub k_ring: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { tolerance: super::DEFAULT_TOLERANCE, k_ring: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeSpec {
    #[serde(rename = "ap")]
    pub ap_label: String,
    pub center: [f64; 3],
    pub axis: [f64; 3],
    pub diameter_mm: f64,
    pub tilt_deg: f64,
    #[serde(rename = "area_mm2")]
    pub sensing_area: f64,
    #[serde(rename = "mean_curvature_per_mm")]
    pub mean_curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedAp {
    pub ap: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayDesign {
    #[serde(rename = "target_area_mm2")]
    pub target_area: f64,
    pub tolerance: f64,
    /// max |area − target| / target over the solved electrodes.
    pub max_relative_deviation: f64,
    pub electrodes: Vec<ElectrodeSpec>,
    pub failed: Vec<FailedAp>,
}

impl ArrayDesign {
    pub fn is_complete(&self) -> bool {
        self.failed.is_empty()
    }

    /// (max − min) / mean of the achieved areas.
    pub fn area_spread(&self) -> f64 {
        relative_spread(&self.electrodes.iter().map(|e| e.sensing_area).collect::<Vec<_>>())
    }
}

/// (max − min) / mean; zero for fewer than two values.
pub fn relative_spread(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean
}

/// Pathway direction at an AP: the surface normal rotated by `tilt_deg`
/// towards the first tangent of [`tangent_frame`].
pub fn pathway_axis(mesh: &SurfaceMesh, ap: &AuricularPoint, tilt_deg: f64) -> Result<Vector3<f64>, DesignError> {
    if !(0.0..90.0).contains(&tilt_deg) {
        return Err(DesignError::InvalidTilt(tilt_deg));
    }
    let n = mesh.interpolated_normal(ap.face, ap.barycentric);
    let (t1, _) = tangent_frame(&n);
    let theta = tilt_deg.to_radians();
    Ok((n * theta.cos() + t1 * theta.sin()).normalize())
}

pub fn design_array(
    mesh: &SurfaceMesh,
    aps: &AuricularPointSet,
    target_area: f64,
    tilt: &TiltPolicy,
    options: &DesignOptions,
) -> Result<ArrayDesign, DesignError> {
    if let TiltPolicy::PerAp(ts) = tilt {
        if ts.len() != aps.len() {
            return Err(DesignError::TiltCount { expected: aps.len(), got: ts.len() });
        }
    }
    let curvature = curvature_field(mesh, options.k_ring)?;
    // Each electrode within ±0.45·tol of the target keeps (max − min)/mean below tol.
    let per_electrode = 0.45 * options.tolerance;

    let outcomes: Vec<Result<ElectrodeSpec, FailedAp>> = aps
        .points
        .par_iter()
        .enumerate()
        .map(|(i, ap)| {
            let tilt_deg = tilt.tilt_for(i);
            let solved = pathway_axis(mesh, ap, tilt_deg).and_then(|axis| {
                solve_diameter(mesh, &ap.position, &axis, target_area, per_electrode).map(|s| (axis, s))
            });
            match solved {
                Ok((axis, s)) => Ok(spec(ap, axis, s.diameter, tilt_deg, s.area, curvature.mean_at(mesh, ap.face, ap.barycentric))),
                Err(e) => Err(FailedAp { ap: ap.label.clone(), reason: e.to_string() }),
            }
        })
        .collect();

    let mut electrodes = Vec::new();
    let mut failed = Vec::new();
    for o in outcomes {
        match o {
            Ok(e) => electrodes.push(e),
            Err(f) => failed.push(f),
        }
    }
    if !failed.is_empty() {
        log::warn!("{} AP(s) could not reach the target area", failed.len());
    }
    let max_relative_deviation = electrodes
        .iter()
        .map(|e| (e.sensing_area - target_area).abs() / target_area)
        .fold(0.0, f64::max);
    Ok(ArrayDesign { target_area, tolerance: options.tolerance, max_relative_deviation, electrodes, failed })
}

/// Contact area at every AP for one fixed diameter, the baseline an
/// equal-area design improves on.
pub fn fixed_diameter_areas(
    mesh: &SurfaceMesh,
    aps: &AuricularPointSet,
    diameter: f64,
    tilt: &TiltPolicy,
) -> Result<Vec<f64>, DesignError> {
    aps.points
        .par_iter()
        .enumerate()
        .map(|(i, ap)| {
            let axis = pathway_axis(mesh, ap, tilt.tilt_for(i))?;
            sensing_area(mesh, &ap.position, &axis, diameter)
        })
        .collect()
}

fn spec(ap: &AuricularPoint, axis: Vector3<f64>, diameter: f64, tilt_deg: f64, area: f64, h: f64) -> ElectrodeSpec {
    let c: Point3<f64> = ap.position;
    ElectrodeSpec {
        ap_label: ap.label.clone(),
        center: [c.x, c.y, c.z],
        axis: [axis.x, axis.y, axis.z],
        diameter_mm: diameter,
        tilt_deg,
        sensing_area: area,
        mean_curvature: h,
    }
}
