//! Natural-neighbour (Sibson) contour of AP values over a surface mesh.
//!
//! APs and mesh vertices are mapped to 2D by projecting onto the best-fit
//! plane of the APs (or, when that collapses APs together, by an azimuthal
//! map about the AP centroid). Inside the convex hull of the projected APs
//! each vertex takes Sibson weights: the share of its Voronoi cell stolen
//! from each AP's cell. On or beyond the hull it takes the 1D linear
//! interpolant along the nearest hull edge, which is the limit of the Sibson
//! weights at the boundary.

use nalgebra::{Matrix3, Point3, Vector2, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::geometry::{AuricularPointSet, SurfaceMesh};

/// Points closer than this (relative to the AP spread) to the hull are treated as on it.
const HULL_TOL: f64 = 1e-7;
/// Relative distance below which two APs coincide.
const COINCIDENT_TOL: f64 = 1e-9;
/// Half-width of the clipping box for unbounded Voronoi cells, in AP spreads.
const BOX_SCALE: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourMethod {
    NaturalNeighbor,
    /// Inverse-distance weighting, used when the APs are collinear.
    InverseDistance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Plane { origin: Point3<f64>, u: Vector3<f64>, v: Vector3<f64> },
    Azimuthal { origin: Point3<f64>, u: Vector3<f64>, v: Vector3<f64>, n: Vector3<f64> },
}

impl Projection {
    pub fn apply(&self, p: &Point3<f64>) -> Vector2<f64> {
        match self {
            Projection::Plane { origin, u, v } => {
                let d = p - origin;
                Vector2::new(d.dot(u), d.dot(v))
            }
            Projection::Azimuthal { origin, u, v, n } => {
                let d = p - origin;
                let len = d.norm();
                if len == 0.0 {
                    return Vector2::zeros();
                }
                let w = d / len;
                let theta = w.dot(n).clamp(-1.0, 1.0).acos();
                let psi = w.dot(v).atan2(w.dot(u));
                Vector2::new(theta * psi.cos(), theta * psi.sin())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourField {
    /// One value per mesh vertex.
    pub values: Vec<f64>,
    pub method: ContourMethod,
    pub warnings: Vec<String>,
}

/// Interpolates AP values at arbitrary surface points.
#[derive(Debug, Clone)]
pub struct ContourInterpolator {
    method: ContourMethod,
    projection: Projection,
    sites3: Vec<Point3<f64>>,
    sites: Vec<Vector2<f64>>,
    values: Vec<f64>,
    /// Counter-clockwise hull vertex indices, collinear points removed.
    hull: Vec<usize>,
    spread: f64,
    spread3: f64,
    warnings: Vec<String>,
}

impl ContourInterpolator {
    pub fn new(positions: &[Point3<f64>], values: &[f64]) -> Result<Self, AnalysisError> {
        if positions.len() != values.len() {
            return Err(AnalysisError::Shape(format!("{} APs but {} values", positions.len(), values.len())));
        }
        if positions.len() < 3 {
            return Err(AnalysisError::Degenerate(format!("need at least 3 APs, got {}", positions.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(AnalysisError::Domain("contour values must be finite".into()));
        }
        let spread3 = diameter3(positions);
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if (positions[i] - positions[j]).norm() <= COINCIDENT_TOL * spread3.max(f64::MIN_POSITIVE) {
                    return Err(AnalysisError::Degenerate(format!("APs {} and {} coincide", i + 1, j + 1)));
                }
            }
        }

        let (origin, axes, sv) = principal_axes(positions);
        let mut warnings = Vec::new();
        let mut base = Self {
            method: ContourMethod::InverseDistance,
            projection: Projection::Plane { origin, u: axes[0], v: axes[1] },
            sites3: positions.to_vec(),
            sites: Vec::new(),
            values: values.to_vec(),
            hull: Vec::new(),
            spread: 0.0,
            spread3,
            warnings: Vec::new(),
        };
        if sv[1] <= COINCIDENT_TOL * sv[0] {
            let w = "APs are collinear; using inverse-distance weighting".to_string();
            log::warn!("{w}");
            base.warnings.push(w);
            return Ok(base);
        }

        let candidates = [
            Projection::Plane { origin, u: axes[0], v: axes[1] },
            Projection::Azimuthal { origin, u: axes[0], v: axes[1], n: axes[2] },
        ];
        for (attempt, projection) in candidates.into_iter().enumerate() {
            let sites: Vec<Vector2<f64>> = positions.iter().map(|p| projection.apply(p)).collect();
            let spread = diameter2(&sites);
            let collide = (0..sites.len())
                .any(|i| (i + 1..sites.len()).any(|j| (sites[i] - sites[j]).norm() <= COINCIDENT_TOL * spread));
            let hull = convex_hull(&sites);
            if !collide && hull.len() >= 3 && polygon_area(&hull.iter().map(|&i| sites[i]).collect::<Vec<_>>()) > COINCIDENT_TOL * spread * spread {
                if attempt > 0 {
                    let w = "planar projection folds APs together; using azimuthal projection".to_string();
                    log::warn!("{w}");
                    warnings.push(w);
                }
                return Ok(Self { method: ContourMethod::NaturalNeighbor, projection, sites, hull, spread, warnings, ..base });
            }
        }
        let w = "APs degenerate in every projection; using inverse-distance weighting".to_string();
        log::warn!("{w}");
        warnings.push(w);
        Ok(Self { warnings, ..base })
    }

    pub fn method(&self) -> ContourMethod {
        self.method
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn evaluate(&self, p: &Point3<f64>) -> f64 {
        match self.method {
            ContourMethod::InverseDistance => self.idw(p),
            ContourMethod::NaturalNeighbor => self.natural_neighbor(self.projection.apply(p)),
        }
    }

    fn idw(&self, p: &Point3<f64>) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (s, v) in self.sites3.iter().zip(&self.values) {
            let d2 = (p - s).norm_squared();
            if d2.sqrt() <= COINCIDENT_TOL * self.spread3 {
                return *v;
            }
            num += v / d2;
            den += 1.0 / d2;
        }
        num / den
    }

    fn natural_neighbor(&self, q: Vector2<f64>) -> f64 {
        let tol = HULL_TOL * self.spread;
        if let Some(i) = self.sites.iter().position(|s| (s - q).norm() <= COINCIDENT_TOL * self.spread) {
            return self.values[i];
        }
        let k = self.hull.len();
        let inside = (0..k).all(|e| {
            let a = self.sites[self.hull[e]];
            let b = self.sites[self.hull[(e + 1) % k]];
            cross(b - a, q - a) / (b - a).norm() > tol
        });
        if inside {
            if let Some(w) = sibson_weights(&self.sites, q, BOX_SCALE * self.spread) {
                return w.iter().zip(&self.values).map(|(w, v)| w * v).sum();
            }
        }
        self.boundary_value(q)
    }

    /// Linear interpolation along the hull edge nearest to `q`.
    fn boundary_value(&self, q: Vector2<f64>) -> f64 {
        let k = self.hull.len();
        let (mut best_e, mut best_d) = (0, f64::INFINITY);
        for e in 0..k {
            let a = self.sites[self.hull[e]];
            let b = self.sites[self.hull[(e + 1) % k]];
            let t = ((q - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
            let d = (a + (b - a) * t - q).norm();
            if d < best_d {
                best_d = d;
                best_e = e;
            }
        }
        let ia = self.hull[best_e];
        let ib = self.hull[(best_e + 1) % k];
        let (a, b) = (self.sites[ia], self.sites[ib]);
        let ab = b - a;
        let len2 = ab.norm_squared();
        let tol = HULL_TOL * self.spread;
        // Sites lying on this edge, ordered along it.
        let mut on_edge: Vec<(f64, usize)> = self
            .sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                let t = (s - a).dot(&ab) / len2;
                let off = (a + ab * t - s).norm();
                (off <= tol && (-1e-12..=1.0 + 1e-12).contains(&t)).then_some((t, i))
            })
            .collect();
        on_edge.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let t = ((q - a).dot(&ab) / len2).clamp(0.0, 1.0);
        let seg = on_edge.windows(2).position(|w| t <= w[1].0).unwrap_or(on_edge.len() - 2);
        let (t0, i0) = on_edge[seg];
        let (t1, i1) = on_edge[seg + 1];
        let s = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        self.values[i0] * (1.0 - s) + self.values[i1] * s
    }
}

/// Contour over every mesh vertex.
pub fn interpolate_contour(mesh: &SurfaceMesh, aps: &AuricularPointSet, values: &[f64]) -> Result<ContourField, AnalysisError> {
    let interp = ContourInterpolator::new(&aps.positions(), values)?;
    let field: Vec<f64> = mesh.vertices().par_iter().map(|p| interp.evaluate(p)).collect();
    Ok(ContourField { values: field, method: interp.method, warnings: interp.warnings.clone() })
}

/// Sibson coordinates of `q` with respect to `sites`; `None` when the cell
/// of `q` is degenerate.
pub fn sibson_weights(sites: &[Vector2<f64>], q: Vector2<f64>, half_box: f64) -> Option<Vec<f64>> {
    let rel: Vec<Vector2<f64>> = sites.iter().map(|s| s - q).collect();
    let mut order: Vec<usize> = (0..rel.len()).collect();
    order.sort_by(|&a, &b| rel[a].norm_squared().total_cmp(&rel[b].norm_squared()).then(a.cmp(&b)));

    let mut cell = square(half_box);
    for &i in &order {
        cell = clip(&cell, &HalfPlane { n: rel[i] * 2.0, c: rel[i].norm_squared() });
        if cell.is_empty() {
            return None;
        }
    }
    let mut stolen = vec![0.0; rel.len()];
    for &i in &order {
        let mut part = cell.clone();
        for &j in &order {
            if j == i || part.is_empty() {
                continue;
            }
            let n = (rel[j] - rel[i]) * 2.0;
            part = clip(&part, &HalfPlane { n, c: rel[j].norm_squared() - rel[i].norm_squared() });
        }
        stolen[i] = area(&part);
    }
    let total: f64 = stolen.iter().sum();
    (total > 0.0).then(|| stolen.iter().map(|a| a / total).collect())
}

/// `n · x ≤ c`.
#[derive(Debug, Clone, Copy)]
struct HalfPlane {
    n: Vector2<f64>,
    c: f64,
}

/// Convex polygon stored as its bounding lines in counter-clockwise order;
/// vertex `i` is where line `i` meets line `i + 1`. Vertices are always
/// recomputed from the two lines, so far-away box corners never lose
/// precision in the vertices that survive clipping.
type Polygon = Vec<HalfPlane>;

fn square(h: f64) -> Polygon {
    vec![
        HalfPlane { n: Vector2::new(0.0, -1.0), c: h },
        HalfPlane { n: Vector2::new(1.0, 0.0), c: h },
        HalfPlane { n: Vector2::new(0.0, 1.0), c: h },
        HalfPlane { n: Vector2::new(-1.0, 0.0), c: h },
    ]
}

fn meet(a: &HalfPlane, b: &HalfPlane) -> Option<Vector2<f64>> {
    let det = a.n.x * b.n.y - a.n.y * b.n.x;
    if det == 0.0 {
        return None;
    }
    Some(Vector2::new((a.c * b.n.y - a.n.y * b.c) / det, (a.n.x * b.c - a.c * b.n.x) / det))
}

fn vertices(poly: &Polygon) -> Option<Vec<Vector2<f64>>> {
    let k = poly.len();
    (0..k).map(|i| meet(&poly[i], &poly[(i + 1) % k])).collect()
}

fn clip(poly: &Polygon, h: &HalfPlane) -> Polygon {
    let Some(verts) = vertices(poly) else {
        return Vec::new();
    };
    let inside: Vec<bool> = verts.iter().map(|v| h.n.dot(v) <= h.c).collect();
    if inside.iter().all(|&b| b) {
        return poly.clone();
    }
    if !inside.iter().any(|&b| b) {
        return Vec::new();
    }
    let k = poly.len();
    let mut out = Vec::with_capacity(k + 1);
    for i in 0..k {
        let start_in = inside[(i + k - 1) % k];
        let end_in = inside[i];
        if start_in || end_in {
            out.push(poly[i]);
        }
        if start_in && !end_in {
            out.push(*h);
        }
    }
    out
}

fn area(poly: &Polygon) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    vertices(poly).map_or(0.0, |v| polygon_area(&v))
}

fn polygon_area(v: &[Vector2<f64>]) -> f64 {
    let k = v.len();
    0.5 * (0..k).map(|i| cross(v[i], v[(i + 1) % k])).sum::<f64>().abs()
}

fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn convex_hull(pts: &[Vector2<f64>]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].x.total_cmp(&pts[b].x).then(pts[a].y.total_cmp(&pts[b].y)));
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| cross(pts[a] - pts[o], pts[b] - pts[o]);
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn principal_axes(points: &[Point3<f64>]) -> (Point3<f64>, [Vector3<f64>; 3], [f64; 3]) {
    let n = points.len() as f64;
    let c = Point3::from(points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = cov.symmetric_eigen();
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let axes = order.map(|i| {
        let v: Vector3<f64> = eig.eigenvectors.column(i).into_owned();
        // Deterministic sign: largest component positive.
        let j = v.iamax();
        if v[j] < 0.0 {
            -v
        } else {
            v
        }
    });
    let sv = order.map(|i| eig.eigenvalues[i].max(0.0).sqrt());
    (c, axes, sv)
}

fn diameter3(p: &[Point3<f64>]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            d = d.max((p[i] - p[j]).norm());
        }
    }
    d
}

fn diameter2(p: &[Vector2<f64>]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            d = d.max((p[i] - p[j]).norm());
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_sites() -> Vec<Vector2<f64>> {
        vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0), Vector2::new(1.0, 1.0)]
    }

    #[test]
    fn square_centre_weights_equal() {
        let w = sibson_weights(&grid_sites(), Vector2::new(0.5, 0.5), 1e8).unwrap();
        for x in w {
            assert!((x - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_reproduce_position() {
        let sites = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(3.0, 0.2),
            Vector2::new(1.0, 2.5),
            Vector2::new(2.2, 1.9),
            Vector2::new(0.4, 1.1),
        ];
        let q = Vector2::new(1.3, 1.0);
        let w = sibson_weights(&sites, q, 1e8).unwrap();
        let r: Vector2<f64> = sites.iter().zip(&w).map(|(s, w)| s * *w).sum();
        assert!((r - q).norm() < 1e-9, "{r:?}");
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_drops_collinear() {
        let mut s = grid_sites();
        s.push(Vector2::new(0.5, 0.0));
        s.push(Vector2::new(0.5, 0.5));
        assert_eq!(convex_hull(&s).len(), 4);
    }

    #[test]
    fn collinear_aps_fall_back() {
        let pts: Vec<Point3<f64>> = (0..4).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let c = ContourInterpolator::new(&pts, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(c.method(), ContourMethod::InverseDistance);
        assert_eq!(c.evaluate(&pts[2]), 3.0);
    }

    #[test]
    fn coincident_aps_rejected() {
        let pts = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::origin()];
        assert!(matches!(ContourInterpolator::new(&pts, &[1.0, 2.0, 3.0]), Err(AnalysisError::Degenerate(_))));
    }

    #[test]
    fn boundary_uses_edge_neighbours() {
        let pts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 0.0),
            Point3::new(2.0, 2.0, 0.0),
        ];
        let f = |p: &Point3<f64>| 1.0 + p.x + 2.0 * p.y;
        let vals: Vec<f64> = pts.iter().map(f).collect();
        let c = ContourInterpolator::new(&pts, &vals).unwrap();
        let q = Point3::new(1.5, 0.0, 0.0);
        assert!((c.evaluate(&q) - f(&q)).abs() < 1e-12);
    }
}
