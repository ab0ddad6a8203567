//! Binary little-endian PLY with the usual splat property names.

use std::path::Path;

use super::{GaussianCloud, SplatError};

fn property_size(ty: &str) -> Option<usize> {
    Some(match ty {
        "char" | "uchar" | "int8" | "uint8" => 1,
        "short" | "ushort" | "int16" | "uint16" => 2,
        "int" | "uint" | "float" | "int32" | "uint32" | "float32" => 4,
        "double" | "float64" => 8,
        _ => return None,
    })
}

struct Header {
    count: usize,
    /// (name, byte offset, is f32)
    props: Vec<(String, usize, bool)>,
    stride: usize,
    body_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, SplatError> {
    let bad = |m: &str| SplatError::Ply(m.to_string());
    let end = bytes
        .windows(11)
        .position(|w| w == b"end_header\n")
        .ok_or_else(|| bad("missing end_header"))?;
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| bad("header is not text"))?;
    let mut lines = text.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(bad("missing ply magic"));
    }
    let mut count = None;
    let mut in_vertex = false;
    let mut seen_vertex = false;
    let mut props = Vec::new();
    let mut stride = 0;
    for line in lines {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["format", "binary_little_endian", _] => {}
            ["format", f, ..] => return Err(SplatError::Ply(format!("unsupported format {f}"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, n] => {
                in_vertex = *name == "vertex";
                if in_vertex {
                    if seen_vertex {
                        return Err(bad("duplicate vertex element"));
                    }
                    seen_vertex = true;
                    count = Some(n.parse::<usize>().map_err(|_| bad("bad vertex count"))?);
                } else if !seen_vertex {
                    return Err(bad("vertex element must come first"));
                }
            }
            ["property", "list", ..] if in_vertex => return Err(bad("list properties are not supported")),
            ["property", ty, name] if in_vertex => {
                let size = property_size(ty).ok_or_else(|| SplatError::Ply(format!("unknown type {ty}")))?;
                props.push((name.to_string(), stride, size == 4 && ty.starts_with("float")));
                stride += size;
            }
            ["property", ..] => {}
            _ => return Err(SplatError::Ply(format!("unexpected header line {line:?}"))),
        }
    }
    Ok(Header {
        count: count.ok_or_else(|| bad("no vertex element"))?,
        props,
        stride,
        body_start: end + 11,
    })
}

/// Parse a splat PLY. Rotations that are not already unit length are
/// normalized on load, since training tools commonly store them raw.
pub fn parse_ply(bytes: &[u8]) -> Result<GaussianCloud, SplatError> {
    let h = parse_header(bytes)?;
    let body = &bytes[h.body_start..];
    if body.len() < h.count * h.stride {
        return Err(SplatError::Ply(format!(
            "body has {} bytes, expected {}",
            body.len(),
            h.count * h.stride
        )));
    }
    let offset = |name: &str| -> Option<usize> {
        h.props.iter().find(|(n, _, f)| n == name && *f).map(|(_, o, _)| *o)
    };
    let need = |name: &str| offset(name).ok_or_else(|| SplatError::Ply(format!("missing float property {name}")));
    let n_rest = (0..).take_while(|k| offset(&format!("f_rest_{k}")).is_some()).count();
    let sh_degree = match n_rest {
        0 => 0u8,
        9 => 1,
        24 => 2,
        45 => 3,
        other => return Err(SplatError::Ply(format!("{other} f_rest properties match no SH degree"))),
    };
    let pos = [need("x")?, need("y")?, need("z")?];
    let scale = [need("scale_0")?, need("scale_1")?, need("scale_2")?];
    let rot = [need("rot_0")?, need("rot_1")?, need("rot_2")?, need("rot_3")?];
    let opacity = need("opacity")?;
    let mut sh_cols = vec![need("f_dc_0")?, need("f_dc_1")?, need("f_dc_2")?];
    for k in 0..n_rest {
        sh_cols.push(need(&format!("f_rest_{k}"))?);
    }
    let normal_cols = match (offset("nx"), offset("ny"), offset("nz")) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        _ => None,
    };

    let n = h.count;
    let mut positions = Vec::with_capacity(n);
    let mut log_scales = Vec::with_capacity(n);
    let mut rotations = Vec::with_capacity(n);
    let mut opacity_logits = Vec::with_capacity(n);
    let mut sh = Vec::with_capacity(n * sh_cols.len());
    let mut normals = normal_cols.map(|_| Vec::with_capacity(n));
    for i in 0..n {
        let row = &body[i * h.stride..(i + 1) * h.stride];
        let f = |o: usize| f32::from_le_bytes(row[o..o + 4].try_into().expect("4 bytes"));
        positions.push(pos.map(f));
        log_scales.push(scale.map(f));
        let q = rot.map(f);
        let len = q.iter().map(|v| v * v).sum::<f32>().sqrt();
        if !(len.is_finite() && len > 0.0) {
            return Err(SplatError::Ply(format!("splat {i} has a zero rotation")));
        }
        rotations.push(if (len - 1.0).abs() <= 1e-5 { q } else { q.map(|v| v / len) });
        opacity_logits.push(f(opacity));
        sh.extend(sh_cols.iter().map(|&o| f(o)));
        if let (Some(ns), Some(cols)) = (normals.as_mut(), normal_cols) {
            ns.push(cols.map(f));
        }
    }
    GaussianCloud::new(positions, log_scales, rotations, opacity_logits, sh_degree, sh, normals)
}

pub fn read_ply(path: &Path) -> Result<GaussianCloud, SplatError> {
    parse_ply(&std::fs::read(path)?)
}

/// Serialize as binary little-endian PLY; normals are written only when the
/// cloud carries them.
pub fn to_ply_bytes(cloud: &GaussianCloud) -> Vec<u8> {
    let rest = GaussianCloud::sh_width(cloud.sh_degree()) - 3;
    let mut header = format!("ply\nformat binary_little_endian 1.0\nelement vertex {}\n", cloud.len());
    let mut names: Vec<String> = vec!["x".into(), "y".into(), "z".into()];
    if cloud.normals().is_some() {
        names.extend(["nx", "ny", "nz"].map(String::from));
    }
    names.extend((0..3).map(|k| format!("f_dc_{k}")));
    names.extend((0..rest).map(|k| format!("f_rest_{k}")));
    names.push("opacity".into());
    names.extend((0..3).map(|k| format!("scale_{k}")));
    names.extend((0..4).map(|k| format!("rot_{k}")));
    for n in &names {
        header.push_str(&format!("property float {n}\n"));
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    out.reserve(cloud.len() * names.len() * 4);
    let mut put = |v: f32| out.extend_from_slice(&v.to_le_bytes());
    for i in 0..cloud.len() {
        cloud.positions()[i].into_iter().for_each(&mut put);
        if let Some(ns) = cloud.normals() {
            ns[i].into_iter().for_each(&mut put);
        }
        cloud.sh_row(i).iter().copied().for_each(&mut put);
        put(cloud.opacity_logits()[i]);
        cloud.log_scales()[i].into_iter().for_each(&mut put);
        cloud.rotations()[i].into_iter().for_each(&mut put);
    }
    out
}

pub fn write_ply(cloud: &GaussianCloud, path: &Path) -> Result<(), SplatError> {
    std::fs::write(path, to_ply_bytes(cloud))?;
    Ok(())
}
