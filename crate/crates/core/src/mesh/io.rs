//! OFF, OBJ and ASCII PLY readers/writers plus the `.edgeattr` sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{MeshError, MeshResult, TriMesh};
use crate::geom::Point3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
    Ply,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> MeshResult<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or_default()
            .to_ascii_lowercase();
        ext.parse()
    }
}

impl FromStr for MeshFormat {
    type Err = MeshError;

    fn from_str(s: &str) -> MeshResult<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "obj" => Ok(Self::Obj),
            "ply" => Ok(Self::Ply),
            other => Err(MeshError::UnsupportedFormat(other.to_string())),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> MeshError {
    MeshError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> MeshResult<TriMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_mesh(&text, format)
}

pub fn save_mesh(mesh: &TriMesh, path: impl AsRef<Path>, format: MeshFormat) -> MeshResult<()> {
    let path = path.as_ref();
    fs::write(path, write_mesh(mesh, format)).map_err(|e| io_err(path, e))
}

pub fn parse_mesh(text: &str, format: MeshFormat) -> MeshResult<TriMesh> {
    match format {
        MeshFormat::Off => parse_off(text),
        MeshFormat::Obj => parse_obj(text),
        MeshFormat::Ply => parse_ply(text),
    }
}

/// Serializes with shortest round-trip float formatting.
pub fn write_mesh(mesh: &TriMesh, format: MeshFormat) -> String {
    let mut s = String::new();
    match format {
        MeshFormat::Off => {
            let _ = writeln!(s, "OFF");
            let _ = writeln!(s, "{} {} {}", mesh.vertex_count(), mesh.face_count(), mesh.edge_count());
            for p in mesh.vertices() {
                let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
            }
            for f in mesh.faces() {
                let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
            }
        }
        MeshFormat::Obj => {
            for p in mesh.vertices() {
                let _ = writeln!(s, "v {} {} {}", p[0], p[1], p[2]);
            }
            for f in mesh.faces() {
                let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
            }
        }
        MeshFormat::Ply => {
            let _ = writeln!(s, "ply\nformat ascii 1.0");
            let _ = writeln!(s, "element vertex {}", mesh.vertex_count());
            let _ = writeln!(s, "property double x\nproperty double y\nproperty double z");
            let _ = writeln!(s, "element face {}", mesh.face_count());
            let _ = writeln!(s, "property list uchar int vertex_indices\nend_header");
            for p in mesh.vertices() {
                let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
            }
            for f in mesh.faces() {
                let _ = writeln!(s, "3 {} {} {}", f[0], f[1], f[2]);
            }
        }
    }
    s
}

/// Writes `v_i v_j value` lines, one per edge.
pub fn write_edge_attributes(path: impl AsRef<Path>, rows: &[([usize; 2], f64)]) -> MeshResult<()> {
    let path = path.as_ref();
    let mut s = String::with_capacity(rows.len() * 24);
    for ([a, b], value) in rows {
        let _ = writeln!(s, "{a} {b} {value}");
    }
    fs::write(path, s).map_err(|e| io_err(path, e))
}

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> MeshResult<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid number `{tok}`")))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_point(tokens: &[&str], line: usize) -> MeshResult<Point3> {
    if tokens.len() < 3 {
        return Err(parse_err(line, "expected three coordinates"));
    }
    Ok([
        parse_num(tokens[0], line)?,
        parse_num(tokens[1], line)?,
        parse_num(tokens[2], line)?,
    ])
}

fn parse_face(tokens: &[&str], line: usize) -> MeshResult<[usize; 3]> {
    let arity: usize = parse_num(tokens.first().copied().unwrap_or(""), line)?;
    if arity != 3 {
        return Err(MeshError::NonTriangular { line, arity });
    }
    if tokens.len() < 4 {
        return Err(parse_err(line, "face record is missing indices"));
    }
    Ok([
        parse_num(tokens[1], line)?,
        parse_num(tokens[2], line)?,
        parse_num(tokens[3], line)?,
    ])
}

fn parse_off(text: &str) -> MeshResult<TriMesh> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let mut tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens[0] != "OFF" {
        return Err(parse_err(hline, "missing OFF header"));
    }
    tokens.remove(0);
    let (cline, counts) = if tokens.is_empty() {
        let (l, c) = lines
            .next()
            .ok_or_else(|| parse_err(hline, "missing element counts"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (hline, tokens)
    };
    if counts.len() < 2 {
        return Err(parse_err(cline, "expected vertex and face counts"));
    }
    let nv: usize = parse_num(counts[0], cline)?;
    let nf: usize = parse_num(counts[1], cline)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(cline, "unexpected end of file in vertex block"))?;
        vertices.push(parse_point(&s.split_whitespace().collect::<Vec<_>>(), l)?);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, s) = lines
            .next()
            .ok_or_else(|| parse_err(cline, "unexpected end of file in face block"))?;
        faces.push(parse_face(&s.split_whitespace().collect::<Vec<_>>(), l)?);
    }
    TriMesh::new(vertices, faces)
}

fn parse_obj(text: &str) -> MeshResult<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (l, s) in content_lines(text) {
        let mut tok = s.split_whitespace();
        match tok.next() {
            Some("v") => vertices.push(parse_point(&tok.collect::<Vec<_>>(), l)?),
            Some("f") => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    return Err(MeshError::NonTriangular {
                        line: l,
                        arity: refs.len(),
                    });
                }
                let mut f = [0usize; 3];
                for (k, r) in refs.iter().enumerate() {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = parse_num(head, l)?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(parse_err(l, "OBJ indices are 1-based"));
                    };
                    if resolved < 0 {
                        return Err(parse_err(l, format!("index {idx} out of range")));
                    }
                    f[k] = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
    line: usize,
}

fn parse_ply(text: &str) -> MeshResult<TriMesh> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_err(1, "missing ply magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut header_done = false;
    for (l, s) in lines.by_ref() {
        let tok: Vec<&str> = s.split_whitespace().collect();
        match tok.first().copied() {
            Some("format") => {
                if tok.get(1) != Some(&"ascii") {
                    return Err(MeshError::UnsupportedFormat(format!(
                        "ply {}",
                        tok.get(1).unwrap_or(&"?")
                    )));
                }
            }
            Some("element") => {
                if tok.len() < 3 {
                    return Err(parse_err(l, "malformed element line"));
                }
                elements.push(PlyElement {
                    name: tok[1].to_string(),
                    count: parse_num(tok[2], l)?,
                    properties: Vec::new(),
                    line: l,
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(l, "property before element"))?;
                let name = tok.last().copied().unwrap_or_default().to_string();
                el.properties.push(name);
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(parse_err(1, "missing end_header"));
    }
    let mut body = lines.filter(|(_, s)| !s.is_empty());
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let pos = |n: &str| {
                    el.properties
                        .iter()
                        .position(|p| p == n)
                        .ok_or_else(|| parse_err(el.line, format!("vertex element lacks `{n}`")))
                };
                let (ix, iy, iz) = (pos("x")?, pos("y")?, pos("z")?);
                for _ in 0..el.count {
                    let (l, s) = body
                        .next()
                        .ok_or_else(|| parse_err(el.line, "unexpected end of vertex data"))?;
                    let tok: Vec<&str> = s.split_whitespace().collect();
                    let get = |i: usize| -> MeshResult<f64> {
                        parse_num(
                            tok.get(i).copied().ok_or_else(|| parse_err(l, "short vertex row"))?,
                            l,
                        )
                    };
                    vertices.push([get(ix)?, get(iy)?, get(iz)?]);
                }
            }
            "face" => {
                if !el
                    .properties
                    .iter()
                    .any(|p| p == "vertex_indices" || p == "vertex_index")
                {
                    return Err(parse_err(el.line, "face element lacks vertex_indices"));
                }
                for _ in 0..el.count {
                    let (l, s) = body
                        .next()
                        .ok_or_else(|| parse_err(el.line, "unexpected end of face data"))?;
                    faces.push(parse_face(&s.split_whitespace().collect::<Vec<_>>(), l)?);
                }
            }
            _ => {
                for _ in 0..el.count {
                    body.next();
                }
            }
        }
    }
    TriMesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn single_triangle_off() {
        let m = parse_mesh("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2", MeshFormat::Off).unwrap();
        assert_eq!((m.vertex_count(), m.face_count(), m.edge_count()), (3, 1, 3));
    }

    #[test]
    fn quads_are_rejected() {
        let off = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(
            parse_mesh(off, MeshFormat::Off),
            Err(MeshError::NonTriangular { line: 7, arity: 4 })
        ));
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        assert!(matches!(
            parse_mesh(obj, MeshFormat::Obj),
            Err(MeshError::NonTriangular { line: 5, arity: 4 })
        ));
    }

    #[test]
    fn parse_error_reports_line() {
        let off = "OFF\n3 1 0\n0 0 0\n1 zero 0\n0 1 0\n3 0 1 2\n";
        match parse_mesh(off, MeshFormat::Off) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn obj_slash_refs_and_comments() {
        let obj = "# c\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nf 1/1/1 2//1 3\n";
        let m = parse_mesh(obj, MeshFormat::Obj).unwrap();
        assert_eq!(m.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn ply_binary_rejected() {
        let ply = "ply\nformat binary_little_endian 1.0\nelement vertex 0\nend_header\n";
        assert!(matches!(
            parse_mesh(ply, MeshFormat::Ply),
            Err(MeshError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn ply_with_extra_properties() {
        let ply = "ply\nformat ascii 1.0\nelement vertex 3\nproperty float nx\nproperty float x\n\
                   property float y\nproperty float z\nelement face 1\n\
                   property list uchar int vertex_indices\nend_header\n\
                   9 0 0 0\n9 1 0 0\n9 0 1 0\n3 0 1 2\n";
        let m = parse_mesh(ply, MeshFormat::Ply).unwrap();
        assert_eq!(m.vertices()[1], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn round_trip_all_formats() {
        let m = primitives::icosphere(2);
        for fmt in [MeshFormat::Off, MeshFormat::Obj, MeshFormat::Ply] {
            let back = parse_mesh(&write_mesh(&m, fmt), fmt).unwrap();
            assert_eq!(back.faces(), m.faces());
            for (a, b) in back.vertices().iter().zip(m.vertices()) {
                for k in 0..3 {
                    assert!((a[k] - b[k]).abs() <= 1e-9);
                }
            }
        }
    }

    #[test]
    fn load_from_disk_and_format_from_extension() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.ply");
        save_mesh(&primitives::tetrahedron(), &p, MeshFormat::from_path(&p).unwrap()).unwrap();
        let m = load_mesh(&p, MeshFormat::Ply).unwrap();
        assert_eq!(m.face_count(), 4);
        assert!(MeshFormat::from_path(Path::new("x.stl")).is_err());
    }
}
