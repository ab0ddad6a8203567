//! Mesh LoD chains by greedy quadric-error edge collapse.
//!
//! Each vertex accumulates the area-weighted quadric of its incident face
//! planes; open boundary edges add a heavily weighted quadric for the plane
//! through the edge perpendicular to its face, which pins the silhouette of
//! open meshes. Edges are collapsed cheapest first. The surviving vertex is
//! placed at whichever of the two endpoints or the midpoint has the smallest
//! error. Ties break on the lower `(vertex, vertex)` edge key, so results are
//! deterministic.
//!
//! A collapse is rejected when it would
//! - violate the link condition (creating non-manifold edges or pinching two
//!   boundary loops together),
//! - flip or zero out the normal of any surviving incident face.

mod decimate;
mod obj;
mod quadric;

pub use decimate::{decimate, decimate_with_report, lod_chain, DecimationReport};
pub use obj::{parse_obj, read_obj, to_obj_string, write_obj};

use std::collections::HashMap;

use thiserror::Error;

pub const DEFAULT_RATIOS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {index} but the mesh has {vertices} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        vertices: usize,
    },
    #[error("triangle {0} repeats a vertex")]
    DegenerateTriangle(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("normal count {normals} does not match vertex count {vertices}")]
    NormalCount { normals: usize, vertices: usize },
    #[error("decimation ratio {0} is outside (0, 1]")]
    RatioOutOfRange(f64),
    #[error("target of {target} faces is below the minimum of 4")]
    TargetTooSmall { target: usize },
    #[error("no legal collapse left at {faces} faces (target {target})")]
    Stalled { faces: usize, target: usize },
    #[error("no ratios given")]
    EmptyRatios,
    #[error("OBJ line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for MeshError {
    fn from(e: std::io::Error) -> Self {
        MeshError::Io(e.to_string())
    }
}

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<[f64; 3]>,
    triangles: Vec<[u32; 3]>,
    normals: Option<Vec<[f64; 3]>>,
}

impl TriMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        Self::with_normals(vertices, triangles, None)
    }

    pub fn with_normals(
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[u32; 3]>,
        normals: Option<Vec<[f64; 3]>>,
    ) -> Result<Self, MeshError> {
        for (i, v) in vertices.iter().enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(MeshError::NonFinite(i));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    triangle: t,
                    index,
                    vertices: vertices.len(),
                });
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateTriangle(t));
            }
        }
        if let Some(n) = &normals {
            if n.len() != vertices.len() {
                return Err(MeshError::NormalCount {
                    normals: n.len(),
                    vertices: vertices.len(),
                });
            }
        }
        Ok(Self {
            vertices,
            triangles,
            normals,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn normals(&self) -> Option<&[[f64; 3]]> {
        self.normals.as_deref()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<[f64; 3]> {
        let mut acc = vec![[0.0; 3]; self.vertices.len()];
        for t in &self.triangles {
            let n = face_cross(&self.vertices, t);
            for &i in t {
                for k in 0..3 {
                    acc[i as usize][k] += n[k];
                }
            }
        }
        acc.into_iter()
            .map(|n| {
                let l = norm(n);
                if l > 0.0 {
                    [n[0] / l, n[1] / l, n[2] / l]
                } else {
                    [0.0, 0.0, 1.0]
                }
            })
            .collect()
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Unnormalized face normal (twice the area).
pub(crate) fn face_cross(v: &[[f64; 3]], t: &[u32; 3]) -> [f64; 3] {
    let [a, b, c] = t.map(|i| v[i as usize]);
    cross(sub(b, a), sub(c, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshStats {
    pub vertices: usize,
    pub faces: usize,
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
}

pub(crate) fn edge_face_counts(triangles: &[[u32; 3]]) -> HashMap<(u32, u32), u32> {
    let mut edges = HashMap::with_capacity(triangles.len() * 3 / 2);
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    edges
}

pub fn mesh_stats(mesh: &TriMesh) -> MeshStats {
    let edges = edge_face_counts(&mesh.triangles);
    MeshStats {
        vertices: mesh.vertices.len(),
        faces: mesh.triangles.len(),
        boundary_edges: edges.values().filter(|&&c| c == 1).count(),
        non_manifold_edges: edges.values().filter(|&&c| c > 2).count(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn validation() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(matches!(
            TriMesh::new(v.clone(), vec![[0, 1, 3]]),
            Err(MeshError::IndexOutOfRange { index: 3, .. })
        ));
        assert_eq!(
            TriMesh::new(v.clone(), vec![[0, 1, 1]]),
            Err(MeshError::DegenerateTriangle(0))
        );
        assert!(TriMesh::new(vec![[f64::NAN, 0.0, 0.0]], vec![]).is_err());
        assert!(TriMesh::with_normals(v, vec![[0, 1, 2]], Some(vec![])).is_err());
    }

    #[test]
    fn stats_examples() {
        let s = mesh_stats(&synth::cube());
        assert_eq!((s.vertices, s.faces, s.boundary_edges, s.non_manifold_edges), (8, 12, 0, 0));

        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        let one = TriMesh::new(v[..3].to_vec(), vec![[0, 1, 2]]).unwrap();
        let s = mesh_stats(&one);
        assert_eq!((s.vertices, s.faces, s.boundary_edges, s.non_manifold_edges), (3, 1, 3, 0));

        let two = TriMesh::new(v.clone(), vec![[0, 1, 2], [1, 3, 2]]).unwrap();
        let s = mesh_stats(&two);
        assert_eq!((s.vertices, s.faces, s.boundary_edges, s.non_manifold_edges), (4, 2, 4, 0));

        // three faces on one edge
        let v5 = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]];
        let fan = TriMesh::new(v5, vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]]).unwrap();
        assert_eq!(mesh_stats(&fan).non_manifold_edges, 1);
    }

    #[test]
    fn cube_normals_point_outward() {
        let c = synth::cube();
        for (p, n) in c.vertices().iter().zip(c.vertex_normals()) {
            let out = sub(*p, [0.5, 0.5, 0.5]);
            assert!(dot(out, n) > 0.0);
        }
    }
}
