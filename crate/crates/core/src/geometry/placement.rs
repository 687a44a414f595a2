//! Auricular-point templates and their projection onto a mesh.
//!
//! A template lists AP labels with coordinates in the unit cube of a canonical
//! ear bounding box. Placement stretches the template over the target mesh's
//! axis-aligned bounding box and snaps every point to the nearest surface
//! point, which makes the layout proportional to each ear.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::{GeometryError, SurfaceMesh};

/// Projection distances beyond this fraction of the bbox diagonal are rejected.
pub const MAX_PROJECTION_FRACTION: f64 = 0.2;

const AP10: &str = include_str!("../../templates/ap10.txt");
const AP13: &str = include_str!("../../templates/ap13.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplatePoint {
    pub label: String,
    pub coords: [f64; 3],
}

/// Normalized AP layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApTemplate {
    points: Vec<TemplatePoint>,
}

impl ApTemplate {
    /// Validates labels (unique) and coordinates (inside `[0, 1]`), then orders
    /// the points by label.
    pub fn new(mut points: Vec<TemplatePoint>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::Template { line: 0, message: "template has no points".into() });
        }
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(p.label.as_str()) {
                return Err(GeometryError::Template { line: 0, message: format!("duplicate label `{}`", p.label) });
            }
            if p.coords.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(GeometryError::Template {
                    line: 0,
                    message: format!("coordinates of `{}` outside [0, 1]", p.label),
                });
            }
        }
        points.sort_by(|a, b| label_order(&a.label, &b.label));
        Ok(Self { points })
    }

    /// Parse the text format: one `label x y z` per line, `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut points = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let [label, x, y, z] = tokens.as_slice() else {
                return Err(GeometryError::Template { line, message: "expected `label x y z`".into() });
            };
            let mut coords = [0.0; 3];
            for (slot, t) in coords.iter_mut().zip([x, y, z]) {
                *slot = t
                    .parse::<f64>()
                    .map_err(|_| GeometryError::Template { line, message: format!("invalid number `{t}`") })?;
                if !(0.0..=1.0).contains(slot) {
                    return Err(GeometryError::Template { line, message: format!("coordinate {t} outside [0, 1]") });
                }
            }
            if !seen.insert(label.to_string()) {
                return Err(GeometryError::Template { line, message: format!("duplicate label `{label}`") });
            }
            points.push(TemplatePoint { label: label.to_string(), coords });
        }
        Self::new(points)
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = fs::read_to_string(path)
            .map_err(|source| GeometryError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Ten-point layout. Illustrative stand-in: no anatomical coordinates are published.
    pub fn default_10() -> Self {
        Self::parse(AP10).expect("bundled template parses")
    }

    /// Thirteen-point layout. Illustrative stand-in like [`ApTemplate::default_10`].
    pub fn default_13() -> Self {
        Self::parse(AP13).expect("bundled template parses")
    }

    pub fn points(&self) -> &[TemplatePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.points
            .iter()
            .map(|p| format!("{} {} {} {}\n", p.label, p.coords[0], p.coords[1], p.coords[2]))
            .collect()
    }
}

/// Natural label order: `AP2` before `AP10`.
fn label_order(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(s.len() - digits);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then(a.cmp(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuricularPoint {
    pub label: String,
    pub position: Point3<f64>,
    pub face: usize,
    pub barycentric: [f64; 3],
}

/// APs placed on a specific mesh, ordered by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuricularPointSet {
    pub points: Vec<AuricularPoint>,
}

impl AuricularPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.points.iter().map(|p| p.label.as_str()).collect()
    }

    pub fn positions(&self) -> Vec<Point3<f64>> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Re-derive face and barycentric coordinates of arbitrary positions
    /// against `mesh` (useful when APs come from outside, e.g. mesh vertices).
    pub fn from_positions(mesh: &SurfaceMesh, labelled: &[(String, Point3<f64>)]) -> Self {
        let points = labelled
            .iter()
            .map(|(label, p)| {
                let hit = mesh.closest_point(p);
                AuricularPoint { label: label.clone(), position: hit.position, face: hit.face, barycentric: hit.barycentric }
            })
            .collect();
        Self { points }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("point set serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub fn place_aps(mesh: &SurfaceMesh, template: &ApTemplate) -> Result<AuricularPointSet, GeometryError> {
    let (lo, hi) = mesh.bounding_box();
    let extent = hi - lo;
    let limit = MAX_PROJECTION_FRACTION * extent.norm();
    let mut points = Vec::with_capacity(template.len());
    for tp in template.points() {
        let target = Point3::new(
            lo.x + tp.coords[0] * extent.x,
            lo.y + tp.coords[1] * extent.y,
            lo.z + tp.coords[2] * extent.z,
        );
        let hit = mesh.closest_point(&target);
        if hit.distance > limit {
            return Err(GeometryError::Placement { label: tp.label.clone(), distance: hit.distance, limit });
        }
        points.push(AuricularPoint {
            label: tp.label.clone(),
            position: hit.position,
            face: hit.face,
            barycentric: hit.barycentric,
        });
    }
    Ok(AuricularPointSet { points })
}
