//! Curved contact area between a cylindrical pathway and the mesh surface.
//!
//! Every face is clipped against the infinite cylinder of radius `D/2` around
//! the pathway axis. Faces with all corners inside are counted whole (the
//! cylinder is convex); faces provably outside are skipped; the rest are split
//! 1→4 until their edges fall below the current resolution, and each leaf is
//! clipped against the linear interpolant of the signed radial distance.
//! The resolution is halved until the patch area changes by less than
//! [`AREA_CONVERGENCE`] between levels.

use std::collections::VecDeque;

use nalgebra::{Point3, Vector3};

use super::DesignError;
use crate::geometry::SurfaceMesh;

/// Relative area change between refinement levels that ends refinement.
pub const AREA_CONVERGENCE: f64 = 1e-4;
/// Pathways more oblique than this (degrees from the surface normal) are rejected.
pub const MAX_AXIS_ANGLE_DEG: f64 = 85.0;
const FIRST_LEVEL: u32 = 2;
const MAX_LEVEL: u32 = 12;

#[derive(Debug, Clone, Copy)]
pub struct Cylinder {
    pub center: Point3<f64>,
    /// Unit direction.
    pub axis: Vector3<f64>,
    pub radius: f64,
}

impl Cylinder {
    /// Distance from `p` to the axis line.
    pub fn radial_distance(&self, p: &Point3<f64>) -> f64 {
        let d = p - self.center;
        (d - self.axis * d.dot(&self.axis)).norm()
    }
}

/// Result of one contact-area evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPatch {
    /// Area of the connected clipped patch containing the pathway centre (mm²).
    pub area: f64,
    /// Clipped area found in other, disconnected surface regions (mm²), not counted.
    pub excluded_area: f64,
    /// Faces contributing to `area`, sorted.
    pub faces: Vec<usize>,
    /// Angle between the pathway axis and the surface normal at the centre (degrees).
    pub tilt_deg: f64,
    /// Refinement level at which the area converged.
    pub level: u32,
}

pub fn sensing_area(
    mesh: &SurfaceMesh,
    center: &Point3<f64>,
    axis: &Vector3<f64>,
    diameter: f64,
) -> Result<f64, DesignError> {
    contact_patch(mesh, center, axis, diameter).map(|p| p.area)
}

pub fn contact_patch(
    mesh: &SurfaceMesh,
    center: &Point3<f64>,
    axis: &Vector3<f64>,
    diameter: f64,
) -> Result<ContactPatch, DesignError> {
    if !(diameter > 0.0 && diameter.is_finite()) {
        return Err(DesignError::InvalidDiameter(diameter));
    }
    let len = axis.norm();
    if !(len > 0.0 && len.is_finite()) {
        return Err(DesignError::InvalidAxis);
    }
    let axis = axis / len;
    let hit = mesh.closest_point(center);
    let tolerance = 1e-6 * mesh.bbox_diagonal() + 1e-9;
    if hit.distance > tolerance {
        return Err(DesignError::OffSurface { distance: hit.distance });
    }
    let normal = mesh.interpolated_normal(hit.face, hit.barycentric);
    let tilt_deg = normal.dot(&axis).abs().min(1.0).acos().to_degrees();
    if tilt_deg >= MAX_AXIS_ANGLE_DEG {
        return Err(DesignError::TangentAxis { angle_deg: tilt_deg });
    }

    let cyl = Cylinder { center: *center, axis, radius: diameter / 2.0 };
    let candidates: Vec<usize> = (0..mesh.face_count()).filter(|&f| !surely_outside(&mesh.triangle(f), &cyl)).collect();

    let mut previous: Option<(f64, Vec<f64>)> = None;
    let mut level = FIRST_LEVEL;
    let (per_face, converged_level) = loop {
        let resolution = cyl.radius * 0.5f64.powi(level as i32);
        let mut per_face = vec![0.0; mesh.face_count()];
        for &f in &candidates {
            per_face[f] = clipped_area(&mesh.triangle(f), &cyl, resolution);
        }
        let (area, _, _) = flood_patch(mesh, hit.face, &per_face);
        if let Some((prev_area, _)) = &previous {
            if (area - prev_area).abs() <= AREA_CONVERGENCE * area.max(f64::MIN_POSITIVE) || level >= MAX_LEVEL {
                break (per_face, level);
            }
        }
        previous = Some((area, per_face));
        level += 1;
    };

    let (area, excluded_area, faces) = flood_patch(mesh, hit.face, &per_face);
    if area <= 0.0 {
        return Err(DesignError::ZeroArea);
    }
    if excluded_area > 0.0 {
        log::warn!("cylinder also cuts {excluded_area:.4} mm^2 of disconnected surface; counting the centre patch only");
    }
    Ok(ContactPatch { area, excluded_area, faces, tilt_deg, level: converged_level })
}

/// Connected component of faces with positive clipped area that contains `seed`.
fn flood_patch(mesh: &SurfaceMesh, seed: usize, per_face: &[f64]) -> (f64, f64, Vec<usize>) {
    let mut visited = vec![false; per_face.len()];
    let mut faces = Vec::new();
    let mut queue = VecDeque::from([seed]);
    visited[seed] = true;
    while let Some(f) = queue.pop_front() {
        faces.push(f);
        for &g in mesh.face_neighbors(f) {
            if !visited[g] && per_face[g] > 0.0 {
                visited[g] = true;
                queue.push_back(g);
            }
        }
    }
    faces.sort_unstable();
    let area: f64 = faces.iter().map(|&f| per_face[f]).sum();
    let total: f64 = per_face.iter().sum();
    (area, (total - area).max(0.0), faces)
}

fn surely_outside(tri: &[Point3<f64>; 3], cyl: &Cylinder) -> bool {
    let c = Point3::from((tri[0].coords + tri[1].coords + tri[2].coords) / 3.0);
    let reach = tri.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    // Radial distance is 1-Lipschitz, so no point of the triangle gets closer than this.
    cyl.radial_distance(&c) - reach > cyl.radius
}

/// Area of `tri` inside the cylinder, refined to edges no longer than `resolution`.
pub fn clipped_area(tri: &[Point3<f64>; 3], cyl: &Cylinder, resolution: f64) -> f64 {
    let signed = [
        cyl.radial_distance(&tri[0]) - cyl.radius,
        cyl.radial_distance(&tri[1]) - cyl.radius,
        cyl.radial_distance(&tri[2]) - cyl.radius,
    ];
    if signed.iter().all(|s| *s <= 0.0) {
        return tri_area(tri);
    }
    if surely_outside(tri, cyl) {
        return 0.0;
    }
    let longest = (tri[1] - tri[0]).norm().max((tri[2] - tri[1]).norm()).max((tri[0] - tri[2]).norm());
    if longest <= resolution {
        return linear_clip_area(tri, &signed);
    }
    let m01 = Point3::from((tri[0].coords + tri[1].coords) / 2.0);
    let m12 = Point3::from((tri[1].coords + tri[2].coords) / 2.0);
    let m20 = Point3::from((tri[2].coords + tri[0].coords) / 2.0);
    [[tri[0], m01, m20], [m01, tri[1], m12], [m20, m12, tri[2]], [m01, m12, m20]]
        .iter()
        .map(|t| clipped_area(t, cyl, resolution))
        .sum()
}

fn tri_area(t: &[Point3<f64>; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(&(t[2] - t[0])).norm()
}

/// Area of the part of `tri` where the linear interpolant of `signed` is ≤ 0.
fn linear_clip_area(tri: &[Point3<f64>; 3], signed: &[f64; 3]) -> f64 {
    let mut poly: Vec<Point3<f64>> = Vec::with_capacity(4);
    for i in 0..3 {
        let j = (i + 1) % 3;
        let (a, b) = (tri[i], tri[j]);
        let (sa, sb) = (signed[i], signed[j]);
        if sa <= 0.0 {
            poly.push(a);
        }
        if (sa <= 0.0) != (sb <= 0.0) {
            let t = sa / (sa - sb);
            poly.push(a + (b - a) * t);
        }
    }
    if poly.len() < 3 {
        return 0.0;
    }
    let origin = poly[0];
    let mut twice = Vector3::zeros();
    for k in 1..poly.len() - 1 {
        twice += (poly[k] - origin).cross(&(poly[k + 1] - origin));
    }
    0.5 * twice.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{icosphere, plane_grid};
    use std::f64::consts::PI;

    #[test]
    fn plane_normal_circle() {
        let m = plane_grid(12.0, 12.0, 40, 40);
        let a = sensing_area(&m, &Point3::origin(), &Vector3::z(), 3.0).unwrap();
        assert!((a - PI * 1.5 * 1.5).abs() / (PI * 2.25) < 1e-3, "{a}");
    }

    #[test]
    fn single_triangle_fully_inside() {
        let tri = [Point3::new(0.0, 0.0, 0.0), Point3::new(0.1, 0.0, 0.0), Point3::new(0.0, 0.1, 0.0)];
        let cyl = Cylinder { center: Point3::origin(), axis: Vector3::z(), radius: 1.0 };
        assert!((clipped_area(&tri, &cyl, 0.01) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn disconnected_region_excluded() {
        // Two parallel sheets; the pathway axis pierces both.
        let top = plane_grid(10.0, 10.0, 10, 10);
        let mut vertices = top.vertices().to_vec();
        let mut faces = top.faces().to_vec();
        let offset = vertices.len();
        vertices.extend(top.vertices().iter().map(|p| Point3::new(p.x, p.y, p.z - 2.0)));
        faces.extend(top.faces().iter().map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]));
        let m = SurfaceMesh::new(vertices, faces).unwrap();
        let patch = contact_patch(&m, &Point3::origin(), &Vector3::z(), 3.0).unwrap();
        assert!((patch.area - PI * 2.25).abs() / (PI * 2.25) < 2e-3);
        assert!((patch.excluded_area - patch.area).abs() < 1e-9);
    }

    #[test]
    fn argument_errors() {
        let m = plane_grid(10.0, 10.0, 4, 4);
        let c = Point3::origin();
        assert!(matches!(sensing_area(&m, &c, &Vector3::z(), 0.0), Err(DesignError::InvalidDiameter(_))));
        assert!(matches!(sensing_area(&m, &c, &Vector3::zeros(), 3.0), Err(DesignError::InvalidAxis)));
        assert!(matches!(sensing_area(&m, &c, &Vector3::x(), 3.0), Err(DesignError::TangentAxis { .. })));
        let off = Point3::new(0.0, 0.0, 1.0);
        assert!(matches!(sensing_area(&m, &off, &Vector3::z(), 3.0), Err(DesignError::OffSurface { .. })));
    }

    #[test]
    fn sphere_cap() {
        let r = 10.0;
        let m = icosphere(r, 5);
        let top = m.closest_point(&Point3::new(0.0, 0.0, 2.0 * r)).position;
        let axis = top.coords.normalize();
        let a = sensing_area(&m, &top, &axis, 6.0).unwrap();
        let exact = 2.0 * PI * r * (r - (r * r - 9.0f64).sqrt());
        assert!((a - exact).abs() / exact < 5e-3, "{a} vs {exact}");
    }
}
