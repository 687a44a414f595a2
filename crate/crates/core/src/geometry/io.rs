//! ASCII OBJ / PLY readers and OBJ / PLY / legacy-VTK writers.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::Point3;

use super::{GeometryError, SurfaceMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl MeshFormat {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Self::Obj),
            "ply" => Some(Self::Ply),
            _ => None,
        }
    }
}

/// A PLY file's mesh plus any extra per-vertex scalar properties.
#[derive(Debug, Clone)]
pub struct PlyData {
    pub mesh: SurfaceMesh,
    pub vertex_scalars: BTreeMap<String, Vec<f64>>,
    pub comments: Vec<String>,
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<SurfaceMesh, GeometryError> {
    let text = read(path)?;
    let mesh = match format {
        MeshFormat::Obj => parse_obj(&text)?,
        MeshFormat::Ply => parse_ply(&text)?.mesh,
    };
    log::info!(
        "loaded {}: {} vertices, {} faces",
        path.display(),
        mesh.vertex_count(),
        mesh.face_count()
    );
    Ok(mesh)
}

pub fn load_ply(path: &Path) -> Result<PlyData, GeometryError> {
    parse_ply(&read(path)?)
}

fn read(path: &Path) -> Result<String, GeometryError> {
    fs::read_to_string(path).map_err(|source| GeometryError::Io { path: path.display().to_string(), source })
}

fn parse_f64(token: &str, line: usize) -> Result<f64, GeometryError> {
    token
        .parse::<f64>()
        .map_err(|_| GeometryError::Parse { line, message: format!("invalid number `{token}`") })
}

pub fn parse_obj(text: &str) -> Result<SurfaceMesh, GeometryError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let coords: Vec<&str> = tokens.collect();
                if coords.len() < 3 {
                    return Err(GeometryError::Parse { line, message: "vertex needs three coordinates".into() });
                }
                vertices.push(Point3::new(
                    parse_f64(coords[0], line)?,
                    parse_f64(coords[1], line)?,
                    parse_f64(coords[2], line)?,
                ));
            }
            Some("f") => {
                let refs: Vec<&str> = tokens.collect();
                if refs.len() != 3 {
                    return Err(GeometryError::UnsupportedTopology { line, vertices: refs.len() });
                }
                let mut face = [0usize; 3];
                for (slot, r) in face.iter_mut().zip(&refs) {
                    *slot = obj_index(r, vertices.len(), line)?;
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    SurfaceMesh::new(vertices, faces)
}

fn obj_index(token: &str, n_vertices: usize, line: usize) -> Result<usize, GeometryError> {
    let head = token.split('/').next().unwrap_or("");
    let idx: i64 = head
        .parse()
        .map_err(|_| GeometryError::Parse { line, message: format!("invalid face index `{token}`") })?;
    let resolved = match idx {
        0 => None,
        i if i > 0 => Some(i as usize - 1),
        i => (n_vertices as i64 + i).try_into().ok(),
    };
    resolved
        .filter(|&r| r < n_vertices)
        .ok_or_else(|| GeometryError::Parse { line, message: format!("face index `{token}` out of range") })
}

#[derive(Debug)]
enum Property {
    Scalar(String),
    List(String),
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

pub fn parse_ply(text: &str) -> Result<PlyData, GeometryError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(GeometryError::Parse { line: 1, message: "missing `ply` magic".into() }),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut comments = Vec::new();
    let mut ended = false;
    for (line, raw) in lines.by_ref() {
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        match tokens.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, _] => return Err(GeometryError::UnsupportedFormat(format!("PLY format `{other}`"))),
            ["comment", ..] => comments.push(raw.trim_start()["comment".len()..].trim().to_string()),
            ["obj_info", ..] | [] => {}
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count
                    .parse()
                    .map_err(|_| GeometryError::Parse { line, message: format!("bad element count `{count}`") })?,
                properties: Vec::new(),
            }),
            ["property", "list", _, _, name] => current(&mut elements, line)?.properties.push(Property::List(name.to_string())),
            ["property", _, name] => current(&mut elements, line)?.properties.push(Property::Scalar(name.to_string())),
            ["end_header"] => {
                ended = true;
                break;
            }
            _ => return Err(GeometryError::Parse { line, message: format!("unrecognized header line `{raw}`") }),
        }
    }
    if !ended {
        return Err(GeometryError::Parse { line: text.lines().count(), message: "missing end_header".into() });
    }

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vertex_scalars: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty());
    for element in &elements {
        let scalar_names: Vec<&str> = element
            .properties
            .iter()
            .filter_map(|p| match p {
                Property::Scalar(n) => Some(n.as_str()),
                Property::List(_) => None,
            })
            .collect();
        let is_vertex = element.name == "vertex";
        let is_face = element.name == "face";
        if is_vertex {
            for axis in ["x", "y", "z"] {
                if !scalar_names.contains(&axis) {
                    return Err(GeometryError::Parse { line: 0, message: format!("vertex element lacks `{axis}`") });
                }
            }
        }
        for _ in 0..element.count {
            let (line, raw) = body
                .next()
                .ok_or(GeometryError::Parse { line: text.lines().count(), message: "unexpected end of data".into() })?;
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            let mut cursor = 0usize;
            let mut row: BTreeMap<&str, f64> = BTreeMap::new();
            let mut list: Option<Vec<usize>> = None;
            for property in &element.properties {
                match property {
                    Property::Scalar(name) => {
                        let t = tokens
                            .get(cursor)
                            .ok_or(GeometryError::Parse { line, message: "missing property value".into() })?;
                        row.insert(name.as_str(), parse_f64(t, line)?);
                        cursor += 1;
                    }
                    Property::List(name) => {
                        let t = tokens.get(cursor).ok_or(GeometryError::Parse { line, message: "missing list length".into() })?;
                        let n: usize = t
                            .parse()
                            .map_err(|_| GeometryError::Parse { line, message: format!("bad list length `{t}`") })?;
                        let items = tokens
                            .get(cursor + 1..cursor + 1 + n)
                            .ok_or(GeometryError::Parse { line, message: "truncated list".into() })?;
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            let parsed = items
                                .iter()
                                .map(|s| {
                                    s.parse::<usize>().map_err(|_| GeometryError::Parse {
                                        line,
                                        message: format!("bad vertex index `{s}`"),
                                    })
                                })
                                .collect::<Result<Vec<_>, _>>()?;
                            list = Some(parsed);
                        }
                        cursor += 1 + n;
                    }
                }
            }
            if is_vertex {
                vertices.push(Point3::new(row["x"], row["y"], row["z"]));
                for (name, value) in row.iter().filter(|(n, _)| !matches!(**n, "x" | "y" | "z")) {
                    vertex_scalars.entry(name.to_string()).or_default().push(*value);
                }
            } else if is_face {
                let idx = list.ok_or(GeometryError::Parse { line, message: "face without vertex_indices".into() })?;
                if idx.len() != 3 {
                    return Err(GeometryError::UnsupportedTopology { line, vertices: idx.len() });
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
        }
    }

    let mesh = SurfaceMesh::new(vertices, faces)?;
    Ok(PlyData { mesh, vertex_scalars, comments })
}

fn current(elements: &mut [Element], line: usize) -> Result<&mut Element, GeometryError> {
    elements
        .last_mut()
        .ok_or(GeometryError::Parse { line, message: "property before any element".into() })
}

pub fn write_obj<W: Write>(mesh: &SurfaceMesh, mut w: W) -> io::Result<()> {
    for p in mesh.vertices() {
        writeln!(w, "v {} {} {}", p.x, p.y, p.z)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

/// Write an ASCII PLY, optionally with one per-vertex scalar property (stored as double).
pub fn write_ply<W: Write>(
    mesh: &SurfaceMesh,
    scalar: Option<(&str, &[f64])>,
    comments: &[String],
    mut w: W,
) -> io::Result<()> {
    if let Some((_, values)) = scalar {
        assert_eq!(values.len(), mesh.vertex_count(), "one scalar per vertex");
    }
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    for c in comments {
        writeln!(w, "comment {c}")?;
    }
    writeln!(w, "element vertex {}", mesh.vertex_count())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    if let Some((name, _)) = scalar {
        writeln!(w, "property double {name}")?;
    }
    writeln!(w, "element face {}", mesh.face_count())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        match scalar {
            Some((_, values)) => writeln!(w, "{} {} {} {}", p.x, p.y, p.z, values[i])?,
            None => writeln!(w, "{} {} {}", p.x, p.y, p.z)?,
        }
    }
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}

/// Legacy ASCII VTK PolyData with `POINT_DATA` / `SCALARS <name> double`.
pub fn write_vtk<W: Write>(mesh: &SurfaceMesh, name: &str, values: &[f64], title: &str, mut w: W) -> io::Result<()> {
    assert_eq!(values.len(), mesh.vertex_count(), "one scalar per vertex");
    writeln!(w, "# vtk DataFile Version 3.0")?;
    // The title line is limited to 256 characters and must not contain newlines.
    let title: String = title.chars().filter(|c| *c != '\n').take(255).collect();
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", mesh.vertex_count())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    writeln!(w, "POLYGONS {} {}", mesh.face_count(), mesh.face_count() * 4)?;
    for f in mesh.faces() {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    writeln!(w, "POINT_DATA {}", mesh.vertex_count())?;
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}
