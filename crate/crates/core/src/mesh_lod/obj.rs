use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, TriMesh};

/// Parse Wavefront OBJ text. Polygons are fan-triangulated; texture and
/// normal references in face tokens (`v/vt/vn`) are ignored, and `vn`
/// records are kept only when their count matches the vertex count.
pub fn parse_obj(text: &str) -> Result<TriMesh, MeshError> {
    let mut vertices = Vec::new();
    let mut normals = Vec::new();
    let mut triangles = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |reason: String| MeshError::Parse { line, reason };
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut tok = content.split_whitespace();
        match tok.next() {
            Some("v") => vertices.push(parse_vec3(&mut tok).map_err(err)?),
            Some("vn") => normals.push(parse_vec3(&mut tok).map_err(err)?),
            Some("f") => {
                let mut idx = Vec::new();
                for t in tok {
                    let head = t.split('/').next().unwrap_or("");
                    let v: i64 = head
                        .parse()
                        .map_err(|_| err(format!("bad face index {t:?}")))?;
                    let resolved = match v {
                        0 => return Err(err("face index 0".into())),
                        v if v > 0 => v - 1,
                        v => vertices.len() as i64 + v,
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(err(format!("face index {v} out of range")));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(err("face with fewer than 3 vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    let normals = (!normals.is_empty() && normals.len() == vertices.len()).then_some(normals);
    TriMesh::with_normals(vertices, triangles, normals)
}

fn parse_vec3<'a>(tok: &mut impl Iterator<Item = &'a str>) -> Result<[f64; 3], String> {
    let mut out = [0.0; 3];
    for c in &mut out {
        let t = tok.next().ok_or("expected three coordinates")?;
        *c = t.parse().map_err(|_| format!("bad number {t:?}"))?;
    }
    Ok(out)
}

pub fn read_obj(path: &Path) -> Result<TriMesh, MeshError> {
    parse_obj(&std::fs::read_to_string(path)?)
}

/// Serialize with freshly computed vertex normals when the mesh carries
/// normals; `v` and `vn` share indices.
pub fn to_obj_string(mesh: &TriMesh) -> String {
    let mut s = String::with_capacity(mesh.vertices().len() * 40 + mesh.face_count() * 24);
    for v in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    let normals = mesh.normals().map(|_| mesh.vertex_normals());
    if let Some(ns) = &normals {
        for n in ns {
            let _ = writeln!(s, "vn {} {} {}", n[0], n[1], n[2]);
        }
    }
    for t in mesh.triangles() {
        let [a, b, c] = t.map(|i| i + 1);
        if normals.is_some() {
            let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(s, "f {a} {b} {c}");
        }
    }
    s
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, to_obj_string(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn round_trip_is_exact() {
        let ico = synth::icosphere(2);
        let back = parse_obj(&to_obj_string(&ico)).unwrap();
        assert_eq!(back, ico);
    }

    #[test]
    fn quads_negative_indices_and_slashes() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1 -1/1\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
        assert!(m.normals().is_none());
    }

    #[test]
    fn normals_are_written_when_present() {
        let c = synth::cube();
        let with_n =
            TriMesh::with_normals(c.vertices().to_vec(), c.triangles().to_vec(), Some(vec![[0.0; 3]; 8])).unwrap();
        let text = to_obj_string(&with_n);
        assert_eq!(text.lines().filter(|l| l.starts_with("vn ")).count(), 8);
        let back = parse_obj(&text).unwrap();
        assert_eq!(back.normals().unwrap(), c.vertex_normals().as_slice());
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(
            parse_obj("v 0 0 0\nv 1 0\n"),
            Err(MeshError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_obj("v 0 0 0\nf 1 2 3\n"),
            Err(MeshError::Parse { line: 2, .. })
        ));
    }
}
