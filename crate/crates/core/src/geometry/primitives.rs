//! Synthetic test surfaces: planes, icospheres, cylinders and height fields.

use std::collections::HashMap;

use nalgebra::Point3;

use super::SurfaceMesh;

/// Regular grid in the z = 0 plane centred on the origin, normals +Z.
/// `nx` × `ny` cells, two triangles per cell.
pub fn plane_grid(width: f64, height: f64, nx: usize, ny: usize) -> SurfaceMesh {
    height_field(width, height, nx, ny, |_, _| 0.0)
}

/// Triangulated height field `z = f(x, y)` over a centred `width` × `height` rectangle.
pub fn height_field(width: f64, height: f64, nx: usize, ny: usize, f: impl Fn(f64, f64) -> f64) -> SurfaceMesh {
    assert!(nx >= 1 && ny >= 1);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = -height / 2.0 + height * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = -width / 2.0 + width * i as f64 / nx as f64;
            vertices.push(Point3::new(x, y, f(x, y)));
        }
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SurfaceMesh::new(vertices, faces).expect("grid is valid")
}

/// Icosphere of the given radius centred on the origin with outward normals.
/// Level `n` has 10·4ⁿ + 2 vertices and 20·4ⁿ faces.
pub fn icosphere(radius: f64, subdivisions: u32) -> SurfaceMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point3<f64>> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&[x, y, z]| Point3::from(Point3::new(x, y, z).coords.normalize()))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point3<f64>>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = (vertices[a].coords + vertices[b].coords).normalize();
                vertices.push(Point3::from(m));
                vertices.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut vertices {
        v.coords *= radius;
    }
    SurfaceMesh::new(vertices, faces).expect("icosphere is valid")
}

/// Open cylinder about the Z axis, `z ∈ [-length/2, length/2]`, outward normals.
pub fn cylinder(radius: f64, length: f64, segments: usize, rings: usize) -> SurfaceMesh {
    assert!(segments >= 3 && rings >= 1);
    let mut vertices = Vec::with_capacity(segments * (rings + 1));
    for j in 0..=rings {
        let z = -length / 2.0 + length * j as f64 / rings as f64;
        for i in 0..segments {
            let theta = std::f64::consts::TAU * i as f64 / segments as f64;
            vertices.push(Point3::new(radius * theta.cos(), radius * theta.sin(), z));
        }
    }
    let idx = |i: usize, j: usize| j * segments + (i % segments);
    let mut faces = Vec::with_capacity(2 * segments * rings);
    for j in 0..rings {
        for i in 0..segments {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    SurfaceMesh::new(vertices, faces).expect("cylinder is valid")
}

/// Gently undulating surface with regions of differing curvature, used as a
/// stand-in for an auricle patch: a sum of Gaussian bumps and dimples.
pub fn bumpy_surface(size: f64, cells: usize) -> SurfaceMesh {
    let bumps: [(f64, f64, f64, f64); 5] = [
        // (x, y, amplitude, width) in units of `size`
        (-0.25, -0.2, 0.08, 0.12),
        (0.22, 0.18, -0.06, 0.10),
        (0.18, -0.25, 0.10, 0.08),
        (-0.2, 0.25, 0.05, 0.15),
        (0.0, 0.0, -0.03, 0.2),
    ];
    height_field(size, size, cells, cells, |x, y| {
        bumps
            .iter()
            .map(|&(cx, cy, amp, w)| {
                let dx = x / size - cx;
                let dy = y / size - cy;
                amp * size * (-(dx * dx + dy * dy) / (2.0 * w * w)).exp()
            })
            .sum()
    })
}
