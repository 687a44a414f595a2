//! Per-vertex principal curvatures from local quadric fits.
//!
//! Around each vertex the k-ring neighbourhood is expressed in a tangent frame
//! `(u, v, w)` with `w` along the vertex normal, and the height function
//! `w = a u² + b uv + c v² + d u + e v` is fitted by least squares. The first
//! and second fundamental forms of that graph at the origin give the shape
//! operator. Curvatures are reported so that a sphere with outward normals has
//! positive mean curvature.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, Vector3};
use rayon::prelude::*;

use super::{GeometryError, SurfaceMesh};

/// Minimum neighbours for the five-coefficient fit.
pub const MIN_FIT_NEIGHBORS: usize = 5;
/// How many extra rings an underdetermined vertex may borrow.
const MAX_EXTRA_RINGS: usize = 3;

#[derive(Debug, Clone)]
pub struct CurvatureField {
    k1: Vec<f64>,
    k2: Vec<f64>,
    mean: Vec<f64>,
    flagged: Vec<usize>,
}

impl CurvatureField {
    /// Mean curvature per vertex (1/mm).
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Larger principal curvature per vertex.
    pub fn k1(&self) -> &[f64] {
        &self.k1
    }

    /// Smaller principal curvature per vertex.
    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn gaussian(&self, v: usize) -> f64 {
        self.k1[v] * self.k2[v]
    }

    /// Vertices whose requested ring was too small and needed a wider one.
    /// Vertices that stayed underdetermined even then are reported here too,
    /// with all curvatures set to zero.
    pub fn flagged(&self) -> &[usize] {
        &self.flagged
    }

    /// Mean curvature at a surface point, interpolated barycentrically.
    pub fn mean_at(&self, mesh: &SurfaceMesh, face: usize, barycentric: [f64; 3]) -> f64 {
        let [a, b, c] = mesh.faces()[face];
        self.mean[a] * barycentric[0] + self.mean[b] * barycentric[1] + self.mean[c] * barycentric[2]
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

pub fn curvature_field(mesh: &SurfaceMesh, k_ring: usize) -> Result<CurvatureField, GeometryError> {
    if k_ring == 0 {
        return Err(GeometryError::InvalidArgument("k_ring must be at least 1".into()));
    }
    let per_vertex: Vec<(f64, f64, bool)> = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| vertex_curvature(mesh, v, k_ring))
        .collect();

    let mut field = CurvatureField {
        k1: Vec::with_capacity(per_vertex.len()),
        k2: Vec::with_capacity(per_vertex.len()),
        mean: Vec::with_capacity(per_vertex.len()),
        flagged: Vec::new(),
    };
    for (v, (k1, k2, flagged)) in per_vertex.into_iter().enumerate() {
        field.k1.push(k1);
        field.k2.push(k2);
        field.mean.push(0.5 * (k1 + k2));
        if flagged {
            field.flagged.push(v);
        }
    }
    if !field.flagged.is_empty() {
        log::warn!("{} vertex/vertices needed a wider ring for the quadric fit", field.flagged.len());
    }
    Ok(field)
}

/// Vertices within `k` edges of `v`, excluding `v`, in BFS order.
pub fn k_ring(mesh: &SurfaceMesh, v: usize, k: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; mesh.vertex_count()];
    depth[v] = 0;
    let mut queue = VecDeque::from([v]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        if depth[u] == k {
            continue;
        }
        for &w in mesh.vertex_neighbors(u) {
            if depth[w] == usize::MAX {
                depth[w] = depth[u] + 1;
                out.push(w);
                queue.push_back(w);
            }
        }
    }
    out
}

fn vertex_curvature(mesh: &SurfaceMesh, v: usize, k_ring_size: usize) -> (f64, f64, bool) {
    let mut ring = k_ring(mesh, v, k_ring_size);
    let mut flagged = false;
    let mut k = k_ring_size;
    while ring.len() < MIN_FIT_NEIGHBORS && k < k_ring_size + MAX_EXTRA_RINGS {
        flagged = true;
        k += 1;
        ring = k_ring(mesh, v, k);
    }
    if ring.len() < MIN_FIT_NEIGHBORS {
        return (0.0, 0.0, true);
    }

    let p = mesh.vertices()[v];
    let n = mesh.normals()[v];
    let (t1, t2) = tangent_frame(&n);

    let mut design = DMatrix::zeros(ring.len(), 5);
    let mut rhs = DVector::zeros(ring.len());
    for (row, &q) in ring.iter().enumerate() {
        let d = mesh.vertices()[q] - p;
        let (u, w, h) = (d.dot(&t1), d.dot(&t2), d.dot(&n));
        design[(row, 0)] = u * u;
        design[(row, 1)] = u * w;
        design[(row, 2)] = w * w;
        design[(row, 3)] = u;
        design[(row, 4)] = w;
        rhs[row] = h;
    }
    let Some(coef) = least_squares(design, rhs) else {
        return (0.0, 0.0, true);
    };
    let (a, b, c, d, e) = (coef[0], coef[1], coef[2], coef[3], coef[4]);

    let big_e = 1.0 + d * d;
    let big_f = d * e;
    let big_g = 1.0 + e * e;
    let root = (1.0 + d * d + e * e).sqrt();
    let big_l = 2.0 * a / root;
    let big_m = b / root;
    let big_n = 2.0 * c / root;
    let det = big_e * big_g - big_f * big_f;
    // Graph curvature is measured along +normal; flip so convex-outward is positive.
    let mean = -(big_e * big_n - 2.0 * big_f * big_m + big_g * big_l) / (2.0 * det);
    let gauss = (big_l * big_n - big_m * big_m) / det;
    let disc = (mean * mean - gauss).max(0.0).sqrt();
    (mean + disc, mean - disc, flagged)
}

/// Orthonormal tangent pair completing `n` to a right-handed frame.
pub fn tangent_frame(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

fn least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let svd = a.svd(true, true);
    let rank = svd.rank(scale * 1e-12);
    if rank < 5 {
        return None;
    }
    svd.solve(&b, scale * 1e-12).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{cylinder, icosphere, plane_grid};

    #[test]
    fn plane_is_flat() {
        let m = plane_grid(10.0, 10.0, 10, 10);
        let c = curvature_field(&m, 2).unwrap();
        for v in 0..m.vertex_count() {
            assert!(c.mean()[v].abs() < 1e-9 && c.k1()[v].abs() < 1e-9 && c.k2()[v].abs() < 1e-9);
        }
        assert!(c.flagged().is_empty());
    }

    #[test]
    fn sphere_mean_curvature_positive() {
        let m = icosphere(1.0, 3);
        let c = curvature_field(&m, 2).unwrap();
        for &h in c.mean() {
            assert!((h - 1.0).abs() < 0.05, "H = {h}");
        }
    }

    #[test]
    fn cylinder_mean_curvature() {
        let m = cylinder(2.0, 8.0, 48, 24);
        let c = curvature_field(&m, 2).unwrap();
        let interior = m.vertices().iter().enumerate().filter(|(_, p)| p.z.abs() < 2.5);
        for (v, _) in interior {
            assert!((c.mean()[v] - 0.25).abs() < 0.25 * 0.05, "H = {}", c.mean()[v]);
            assert!((c.k1()[v] - 0.5).abs() < 0.5 * 0.05);
            assert!(c.k2()[v].abs() < 0.02);
        }
    }

    #[test]
    fn mean_is_average_of_principal() {
        let m = crate::geometry::primitives::bumpy_surface(20.0, 30);
        let c = curvature_field(&m, 2).unwrap();
        for v in 0..m.vertex_count() {
            assert!((c.mean()[v] - 0.5 * (c.k1()[v] + c.k2()[v])).abs() < 1e-12);
            assert!(c.k1()[v] >= c.k2()[v]);
            assert!(c.mean()[v].is_finite());
        }
    }

    #[test]
    fn lone_triangle_is_flagged() {
        let m = plane_grid(1.0, 1.0, 1, 1);
        let c = curvature_field(&m, 1).unwrap();
        assert_eq!(c.flagged(), &[0, 1, 2, 3]);
        assert!(c.mean().iter().all(|h| *h == 0.0));
    }

    #[test]
    fn zero_ring_rejected() {
        let m = plane_grid(1.0, 1.0, 2, 2);
        assert!(curvature_field(&m, 0).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let m = crate::geometry::primitives::bumpy_surface(20.0, 20);
        let par = curvature_field(&m, 2).unwrap();
        for v in 0..m.vertex_count() {
            let (k1, k2, _) = vertex_curvature(&m, v, 2);
            assert_eq!(par.k1()[v].to_bits(), k1.to_bits());
            assert_eq!(par.k2()[v].to_bits(), k2.to_bits());
        }
    }
}
