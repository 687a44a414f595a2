//! Diameter that yields a target contact area.

use nalgebra::{Point3, Vector3};

use super::{sensing_area, DesignError};
use crate::geometry::SurfaceMesh;

/// Smallest diameter considered (mm).
pub const MIN_DIAMETER: f64 = 0.1;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiameterSolution {
    pub diameter: f64,
    pub area: f64,
    pub evaluations: usize,
}

/// Bisection on `D` with automatic upper-bracket expansion.
///
/// The upper end starts at twice the flat-disc diameter for `target_area` and
/// doubles until it brackets the target or exceeds twice the mesh diagonal
/// (at which point the cylinder swallows the whole connected patch). Every
/// evaluated `(D, area)` pair is checked against its neighbours; a decrease
/// larger than the tolerance aborts with the offending sub-bracket.
pub fn solve_diameter(
    mesh: &SurfaceMesh,
    center: &Point3<f64>,
    axis: &Vector3<f64>,
    target_area: f64,
    tol: f64,
) -> Result<DiameterSolution, DesignError> {
    if !(target_area > 0.0 && target_area.is_finite()) {
        return Err(DesignError::InvalidTarget(target_area));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(DesignError::InvalidTarget(tol));
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let eval = |d: f64, samples: &mut Vec<(f64, f64)>| -> Result<f64, DesignError> {
        let a = sensing_area(mesh, center, axis, d)?;
        let at = samples.partition_point(|(x, _)| *x < d);
        let slack = tol * target_area;
        if at > 0 && samples[at - 1].1 > a + slack {
            return Err(DesignError::NonMonotone { lo: samples[at - 1].0, hi: d });
        }
        if at < samples.len() && samples[at].1 + slack < a {
            return Err(DesignError::NonMonotone { lo: d, hi: samples[at].0 });
        }
        samples.insert(at, (d, a));
        Ok(a)
    };
    let close = |a: f64| (a - target_area).abs() <= tol * target_area;

    let mut lo = MIN_DIAMETER;
    let a_lo = eval(lo, &mut samples)?;
    if close(a_lo) {
        return Ok(DiameterSolution { diameter: lo, area: a_lo, evaluations: samples.len() });
    }
    if a_lo > target_area {
        return Err(DesignError::Unreachable {
            target: target_area,
            reason: format!("area {a_lo:.4} mm^2 at the minimum diameter {MIN_DIAMETER} mm already exceeds it"),
        });
    }

    let ceiling = 2.0 * mesh.bbox_diagonal();
    let mut hi = (2.0 * 2.0 * (target_area / std::f64::consts::PI).sqrt()).max(2.0 * lo).min(ceiling);
    let mut a_hi = eval(hi, &mut samples)?;
    while a_hi < target_area && !close(a_hi) {
        if hi >= ceiling {
            return Err(DesignError::Unreachable {
                target: target_area,
                reason: format!("connected patch saturates at {a_hi:.4} mm^2"),
            });
        }
        lo = hi;
        hi = (hi * 2.0).min(ceiling);
        a_hi = eval(hi, &mut samples)?;
    }
    if close(a_hi) {
        return Ok(DiameterSolution { diameter: hi, area: a_hi, evaluations: samples.len() });
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let a = eval(mid, &mut samples)?;
        if close(a) {
            return Ok(DiameterSolution { diameter: mid, area: a, evaluations: samples.len() });
        }
        if a < target_area {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Err(DesignError::Unreachable {
        target: target_area,
        reason: format!("bisection collapsed at D = {lo:.6} mm without meeting the tolerance"),
    })
}
