//! Validated triangle surface mesh with cached normals and adjacency.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use super::GeometryError;

/// Faces with an area below this threshold (mm²) are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// What to do with zero-area faces during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Drop them and log a warning. Scan meshes routinely carry slivers.
    #[default]
    Drop,
    /// Fail validation.
    Reject,
}

/// A point on the surface expressed against one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub face: usize,
    /// Barycentric weights of the face's three vertices, nonnegative, summing to one.
    pub barycentric: [f64; 3],
    pub position: Point3<f64>,
    /// Distance from the query point that produced this surface point.
    pub distance: f64,
}

/// Triangulated surface in millimetres.
///
/// Immutable after construction. Vertex normals are area-weighted averages of
/// the incident face normals and follow the face winding (counter-clockwise
/// faces seen from outside give outward normals).
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    normals: Vec<Vector3<f64>>,
    vertex_neighbors: Vec<Vec<usize>>,
    face_neighbors: Vec<Vec<usize>>,
    dropped_faces: usize,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self, GeometryError> {
        Self::with_policy(vertices, faces, DegeneratePolicy::Drop)
    }

    pub fn with_policy(
        vertices: Vec<Point3<f64>>,
        faces: Vec<[usize; 3]>,
        policy: DegeneratePolicy,
    ) -> Result<Self, GeometryError> {
        if vertices.is_empty() || faces.is_empty() {
            return Err(GeometryError::Empty);
        }
        if let Some(v) = vertices.iter().position(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::NonFinite { vertex: v });
        }
        for (f, face) in faces.iter().enumerate() {
            if let Some(&index) = face.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange { face: f, index });
            }
        }

        let total = faces.len();
        let mut kept = Vec::with_capacity(total);
        for (f, face) in faces.into_iter().enumerate() {
            if triangle_area(&vertices[face[0]], &vertices[face[1]], &vertices[face[2]]) < DEGENERATE_AREA {
                if policy == DegeneratePolicy::Reject {
                    return Err(GeometryError::DegenerateFace { face: f });
                }
                continue;
            }
            kept.push(face);
        }
        let dropped_faces = total - kept.len();
        if dropped_faces > 0 {
            log::warn!("dropped {dropped_faces} degenerate face(s) with area < {DEGENERATE_AREA} mm^2");
        }
        if kept.is_empty() {
            return Err(GeometryError::Empty);
        }

        let normals = vertex_normals(&vertices, &kept);
        let vertex_neighbors = vertex_adjacency(vertices.len(), &kept);
        let face_neighbors = face_adjacency(&kept);
        Ok(Self {
            vertices,
            faces: kept,
            normals,
            vertex_neighbors,
            face_neighbors,
            dropped_faces,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// Unit per-vertex normals.
    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Number of degenerate faces removed during validation.
    pub fn dropped_faces(&self) -> usize {
        self.dropped_faces
    }

    /// Sorted one-ring neighbours of a vertex.
    pub fn vertex_neighbors(&self, v: usize) -> &[usize] {
        &self.vertex_neighbors[v]
    }

    /// Faces sharing an edge with `f`, sorted.
    pub fn face_neighbors(&self, f: usize) -> &[usize] {
        &self.face_neighbors[f]
    }

    pub fn triangle(&self, f: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        triangle_area(&a, &b, &c)
    }

    pub fn face_normal(&self, f: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounding_box(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices[1..] {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn centroid(&self) -> Point3<f64> {
        let sum = self.vertices.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords);
        Point3::from(sum / self.vertices.len() as f64)
    }

    /// Normal at a surface point, interpolated from the vertex normals.
    pub fn interpolated_normal(&self, face: usize, barycentric: [f64; 3]) -> Vector3<f64> {
        let [a, b, c] = self.faces[face];
        let n = self.normals[a] * barycentric[0] + self.normals[b] * barycentric[1] + self.normals[c] * barycentric[2];
        let len = n.norm();
        if len > 1e-12 {
            n / len
        } else {
            self.face_normal(face)
        }
    }

    pub fn point_at(&self, face: usize, barycentric: [f64; 3]) -> Point3<f64> {
        let [a, b, c] = self.triangle(face);
        Point3::from(a.coords * barycentric[0] + b.coords * barycentric[1] + c.coords * barycentric[2])
    }

    /// Nearest surface point to `query`, brute force over all faces.
    /// Ties resolve to the lowest face index.
    pub fn closest_point(&self, query: &Point3<f64>) -> SurfacePoint {
        let mut best: Option<SurfacePoint> = None;
        for f in 0..self.faces.len() {
            let [a, b, c] = self.triangle(f);
            let (position, barycentric) = closest_point_on_triangle(query, &a, &b, &c);
            let distance = (position - query).norm();
            if best.as_ref().is_none_or(|b| distance < b.distance) {
                best = Some(SurfacePoint { face: f, barycentric, position, distance });
            }
        }
        best.expect("validated mesh has faces")
    }

    /// Copy scaled uniformly about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self, GeometryError> {
        let vertices = self.vertices.iter().map(|p| Point3::from(p.coords * s)).collect();
        Self::new(vertices, self.faces.clone())
    }

    pub fn translated(&self, t: Vector3<f64>) -> Result<Self, GeometryError> {
        let vertices = self.vertices.iter().map(|p| p + t).collect();
        Self::new(vertices, self.faces.clone())
    }
}

pub fn triangle_area(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

fn vertex_normals(vertices: &[Point3<f64>], faces: &[[usize; 3]]) -> Vec<Vector3<f64>> {
    let mut acc = vec![Vector3::zeros(); vertices.len()];
    for &[a, b, c] in faces {
        // Unnormalized cross product weights each face by twice its area.
        let n = (vertices[b] - vertices[a]).cross(&(vertices[c] - vertices[a]));
        acc[a] += n;
        acc[b] += n;
        acc[c] += n;
    }
    let mut orphans = 0usize;
    let normals = acc
        .into_iter()
        .map(|n| {
            let len = n.norm();
            if len > 0.0 {
                n / len
            } else {
                orphans += 1;
                Vector3::z()
            }
        })
        .collect();
    if orphans > 0 {
        log::warn!("{orphans} vertex/vertices without incident faces; normal set to +Z");
    }
    normals
}

fn vertex_adjacency(n: usize, faces: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &[a, b, c] in faces {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn face_adjacency(faces: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (f, &[a, b, c]) in faces.iter().enumerate() {
        for (u, v) in [(a, b), (b, c), (c, a)] {
            edges.entry((u.min(v), u.max(v))).or_default().push(f);
        }
    }
    let mut adj = vec![Vec::new(); faces.len()];
    for incident in edges.values() {
        for &f in incident {
            adj[f].extend(incident.iter().copied().filter(|&g| g != f));
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Closest point on triangle `abc` to `p` with its barycentric coordinates.
pub fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> (Point3<f64>, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (*a, [1.0, 0.0, 0.0]);
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (*b, [0.0, 1.0, 0.0]);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (*c, [0.0, 0.0, 1.0]);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}
