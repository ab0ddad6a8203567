use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::quadric::Quadric;
use super::{cross, dot, edge_face_counts, face_cross, norm, sub, MeshError, TriMesh};

/// Weight of the constraint planes placed along open boundary edges,
/// relative to the surface planes (both scale with squared edge length/area).
const BOUNDARY_WEIGHT: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecimationReport {
    pub collapses: usize,
    /// Sum of the quadric costs of every performed collapse.
    pub total_error: f64,
    pub target_faces: usize,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    a: u32,
    b: u32,
    pos: [f64; 3],
    stamp_a: u32,
    stamp_b: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // reversed: BinaryHeap pops the cheapest, then the lowest edge key
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.a.cmp(&self.a))
            .then_with(|| other.b.cmp(&self.b))
    }
}

struct Decimator {
    pos: Vec<[f64; 3]>,
    quadric: Vec<Quadric>,
    faces: Vec<[u32; 3]>,
    face_alive: Vec<bool>,
    vert_faces: Vec<Vec<u32>>,
    vert_alive: Vec<bool>,
    boundary_vert: Vec<bool>,
    stamp: Vec<u32>,
    heap: BinaryHeap<Candidate>,
    live_faces: usize,
}

impl Decimator {
    fn new(mesh: &TriMesh) -> Self {
        let pos = mesh.vertices().to_vec();
        let faces = mesh.triangles().to_vec();
        let nv = pos.len();
        let mut quadric = vec![Quadric::default(); nv];
        let mut vert_faces = vec![Vec::new(); nv];
        for (fi, t) in faces.iter().enumerate() {
            for &v in t {
                vert_faces[v as usize].push(fi as u32);
            }
            let c = face_cross(&pos, t);
            let len = norm(c);
            if len > 0.0 {
                let n = [c[0] / len, c[1] / len, c[2] / len];
                let d = -dot(n, pos[t[0] as usize]);
                let q = Quadric::from_plane(n, d, len / 2.0);
                for &v in t {
                    quadric[v as usize].add(&q);
                }
            }
        }

        let mut boundary_vert = vec![false; nv];
        let counts = edge_face_counts(&faces);
        for t in &faces {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if counts[&(a.min(b), a.max(b))] != 1 {
                    continue;
                }
                boundary_vert[a as usize] = true;
                boundary_vert[b as usize] = true;
                let e = sub(pos[b as usize], pos[a as usize]);
                let fnorm = face_cross(&pos, t);
                let c = cross(e, fnorm);
                let len = norm(c);
                if len > 0.0 {
                    let n = [c[0] / len, c[1] / len, c[2] / len];
                    let d = -dot(n, pos[a as usize]);
                    let q = Quadric::from_plane(n, d, BOUNDARY_WEIGHT * dot(e, e));
                    quadric[a as usize].add(&q);
                    quadric[b as usize].add(&q);
                }
            }
        }

        let live_faces = faces.len();
        let mut d = Self {
            pos,
            quadric,
            face_alive: vec![true; faces.len()],
            faces,
            vert_faces,
            vert_alive: vec![true; nv],
            boundary_vert,
            stamp: vec![0; nv],
            heap: BinaryHeap::new(),
            live_faces,
        };
        let mut keys: Vec<(u32, u32)> = counts.keys().copied().collect();
        keys.sort_unstable();
        for (a, b) in keys {
            d.push_edge(a, b);
        }
        d
    }

    fn push_edge(&mut self, a: u32, b: u32) {
        let (a, b) = (a.min(b), a.max(b));
        let q = self.quadric[a as usize].sum(&self.quadric[b as usize]);
        let (pa, pb) = (self.pos[a as usize], self.pos[b as usize]);
        let mid = [
            (pa[0] + pb[0]) / 2.0,
            (pa[1] + pb[1]) / 2.0,
            (pa[2] + pb[2]) / 2.0,
        ];
        let (mut best, mut cost) = (pa, q.error(pa));
        for p in [pb, mid] {
            let c = q.error(p);
            if c < cost {
                best = p;
                cost = c;
            }
        }
        self.heap.push(Candidate {
            cost,
            a,
            b,
            pos: best,
            stamp_a: self.stamp[a as usize],
            stamp_b: self.stamp[b as usize],
        });
    }

    fn live_faces_of(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.vert_faces[v as usize]
            .iter()
            .copied()
            .filter(|&f| self.face_alive[f as usize])
    }

    fn neighbors(&self, v: u32) -> Vec<u32> {
        let mut n: Vec<u32> = self
            .live_faces_of(v)
            .flat_map(|f| self.faces[f as usize])
            .filter(|&u| u != v)
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    fn is_legal(&self, a: u32, b: u32, p: [f64; 3]) -> bool {
        // faces on the edge and their opposite vertices
        let shared: Vec<u32> = self
            .live_faces_of(a)
            .filter(|&f| self.faces[f as usize].contains(&b))
            .collect();
        if shared.is_empty() || shared.len() > 2 {
            return false;
        }
        let is_boundary_edge = shared.len() == 1;
        if !is_boundary_edge && self.boundary_vert[a as usize] && self.boundary_vert[b as usize] {
            return false;
        }
        let mut opposite: Vec<u32> = shared
            .iter()
            .map(|&f| {
                *self.faces[f as usize]
                    .iter()
                    .find(|&&u| u != a && u != b)
                    .expect("triangle has a third vertex")
            })
            .collect();
        opposite.sort_unstable();
        let na = self.neighbors(a);
        let nb = self.neighbors(b);
        let common: Vec<u32> = na.iter().copied().filter(|u| nb.binary_search(u).is_ok()).collect();
        if common != opposite {
            return false;
        }

        for v in [a, b] {
            for f in self.live_faces_of(v) {
                let t = self.faces[f as usize];
                if t.contains(&a) && t.contains(&b) {
                    continue;
                }
                let before = face_cross(&self.pos, &t);
                let moved = t.map(|u| if u == a || u == b { p } else { self.pos[u as usize] });
                let after = cross(sub(moved[1], moved[0]), sub(moved[2], moved[0]));
                let (lb, la) = (norm(before), norm(after));
                if la <= 1e-12 * lb.max(f64::MIN_POSITIVE) || dot(before, after) <= 0.0 {
                    return false;
                }
            }
        }
        true
    }

    /// Merge `b` into `a` at position `p`.
    fn collapse(&mut self, a: u32, b: u32, p: [f64; 3]) {
        let (au, bu) = (a as usize, b as usize);
        self.pos[au] = p;
        let qb = self.quadric[bu];
        self.quadric[au].add(&qb);
        self.boundary_vert[au] |= self.boundary_vert[bu];
        let b_faces = std::mem::take(&mut self.vert_faces[bu]);
        for f in b_faces {
            if !self.face_alive[f as usize] {
                continue;
            }
            let t = &mut self.faces[f as usize];
            if t.contains(&a) {
                self.face_alive[f as usize] = false;
                self.live_faces -= 1;
            } else {
                for u in t.iter_mut() {
                    if *u == b {
                        *u = a;
                    }
                }
                self.vert_faces[au].push(f);
            }
        }
        self.vert_alive[bu] = false;
        let alive = &self.face_alive;
        self.vert_faces[au].retain(|&f| alive[f as usize]);
        self.vert_faces[au].sort_unstable();
        self.vert_faces[au].dedup();

        let ring = self.neighbors(a);
        self.stamp[au] += 1;
        for &n in &ring {
            self.stamp[n as usize] += 1;
        }
        let mut edges = Vec::new();
        for &n in &ring {
            edges.push((a, n));
            for m in self.neighbors(n) {
                edges.push((n.min(m), n.max(m)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        for (x, y) in edges {
            self.push_edge(x, y);
        }
    }

    fn run(&mut self, target: usize) -> Result<DecimationReport, MeshError> {
        let mut report = DecimationReport {
            collapses: 0,
            total_error: 0.0,
            target_faces: target,
        };
        while self.live_faces > target {
            let Some(c) = self.heap.pop() else {
                return Err(MeshError::Stalled {
                    faces: self.live_faces,
                    target,
                });
            };
            let (a, b) = (c.a as usize, c.b as usize);
            if !self.vert_alive[a]
                || !self.vert_alive[b]
                || self.stamp[a] != c.stamp_a
                || self.stamp[b] != c.stamp_b
            {
                continue;
            }
            if !self.is_legal(c.a, c.b, c.pos) {
                continue;
            }
            self.collapse(c.a, c.b, c.pos);
            report.collapses += 1;
            report.total_error += c.cost;
        }
        Ok(report)
    }

    fn into_mesh(self, with_normals: bool) -> TriMesh {
        let mut remap = vec![u32::MAX; self.pos.len()];
        let mut used = vec![false; self.pos.len()];
        for (t, alive) in self.faces.iter().zip(&self.face_alive) {
            if *alive {
                for &v in t {
                    used[v as usize] = true;
                }
            }
        }
        let mut vertices = Vec::new();
        for (i, u) in used.iter().enumerate() {
            if *u {
                remap[i] = vertices.len() as u32;
                vertices.push(self.pos[i]);
            }
        }
        let triangles: Vec<[u32; 3]> = self
            .faces
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, a)| **a)
            .map(|(t, _)| t.map(|v| remap[v as usize]))
            .collect();
        let mesh = TriMesh::new(vertices, triangles).expect("decimation keeps the mesh valid");
        if with_normals {
            let n = mesh.vertex_normals();
            TriMesh::with_normals(mesh.vertices, mesh.triangles, Some(n)).expect("normal count")
        } else {
            mesh
        }
    }
}

fn target_faces(faces: usize, ratio: f64) -> Result<usize, MeshError> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(MeshError::RatioOutOfRange(ratio));
    }
    Ok((ratio * faces as f64).ceil() as usize)
}

/// Decimate to at most `⌈ratio · faces⌉` faces, also reporting the collapse
/// count and accumulated quadric error.
pub fn decimate_with_report(mesh: &TriMesh, ratio: f64) -> Result<(TriMesh, DecimationReport), MeshError> {
    let target = target_faces(mesh.face_count(), ratio)?;
    if ratio == 1.0 {
        return Ok((
            mesh.clone(),
            DecimationReport {
                collapses: 0,
                total_error: 0.0,
                target_faces: target,
            },
        ));
    }
    if target < 4 {
        return Err(MeshError::TargetTooSmall { target });
    }
    let mut d = Decimator::new(mesh);
    let report = d.run(target)?;
    log::debug!(
        "decimated {} -> {} faces in {} collapses",
        mesh.face_count(),
        d.live_faces,
        report.collapses
    );
    Ok((d.into_mesh(mesh.normals().is_some()), report))
}

pub fn decimate(mesh: &TriMesh, ratio: f64) -> Result<TriMesh, MeshError> {
    decimate_with_report(mesh, ratio).map(|(m, _)| m)
}

/// Decimate the base mesh independently at every ratio.
pub fn lod_chain(mesh: &TriMesh, ratios: &[f64]) -> Result<Vec<TriMesh>, MeshError> {
    if ratios.is_empty() {
        return Err(MeshError::EmptyRatios);
    }
    for &r in ratios {
        target_faces(mesh.face_count(), r)?;
    }
    ratios.iter().map(|&r| decimate(mesh, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh_lod::mesh_stats;
    use crate::synth;

    /// Exhaustive validity check used as the oracle for every decimation test.
    fn assert_valid(m: &TriMesh) {
        let nv = m.vertices().len() as u32;
        for t in m.triangles() {
            assert!(t.iter().all(|&i| i < nv), "index out of range");
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2], "degenerate");
        }
        let mut seen = std::collections::HashSet::new();
        for t in m.triangles() {
            let mut k = *t;
            k.sort_unstable();
            assert!(seen.insert(k), "duplicate face {k:?}");
        }
    }

    #[test]
    fn ratio_one_is_identity() {
        let c = synth::cube();
        assert_eq!(decimate(&c, 1.0).unwrap(), c);
    }

    #[test]
    fn ratio_validation() {
        let c = synth::cube();
        assert_eq!(decimate(&c, 0.0), Err(MeshError::RatioOutOfRange(0.0)));
        assert_eq!(decimate(&c, 1.5), Err(MeshError::RatioOutOfRange(1.5)));
        assert!(matches!(decimate(&c, f64::NAN), Err(MeshError::RatioOutOfRange(_))));
        assert_eq!(decimate(&c, 0.25), Err(MeshError::TargetTooSmall { target: 3 }));
        assert_eq!(lod_chain(&c, &[]), Err(MeshError::EmptyRatios));
    }

    #[test]
    fn icosphere_half() {
        let ico = synth::icosphere(1);
        let out = decimate(&ico, 0.5).unwrap();
        assert_valid(&out);
        let f = out.face_count();
        assert!((38..=40).contains(&f), "{f} faces");
        let s = mesh_stats(&out);
        assert_eq!((s.boundary_edges, s.non_manifold_edges), (0, 0));
    }

    #[test]
    fn planar_grid_stays_planar() {
        let g = synth::grid(8, 8);
        let out = decimate(&g, 0.25).unwrap();
        assert_valid(&out);
        assert!((30..=32).contains(&out.face_count()), "{}", out.face_count());
        let dev = out.vertices().iter().map(|v| v[2].abs()).fold(0.0, f64::max);
        assert_eq!(dev, 0.0);
        // outline is preserved: corners survive
        for corner in [[0.0, 0.0, 0.0], [8.0, 0.0, 0.0], [0.0, 8.0, 0.0], [8.0, 8.0, 0.0]] {
            assert!(out.vertices().contains(&corner));
        }
    }

    #[test]
    fn torus_chain_counts_and_topology() {
        let t = synth::torus(50, 50, 2.0, 0.7);
        let chain = lod_chain(&t, &crate::mesh_lod::DEFAULT_RATIOS).unwrap();
        let expected = [5000usize, 2500, 1250, 625];
        let mut last = usize::MAX;
        for (m, e) in chain.iter().zip(expected) {
            assert_valid(m);
            let f = m.face_count();
            assert!(f <= e && f + 2 >= e, "{f} vs {e}");
            assert!(f <= last);
            last = f;
            let s = mesh_stats(m);
            assert_eq!((s.boundary_edges, s.non_manifold_edges), (0, 0));
            // Euler characteristic of a torus
            let edges = edge_face_counts(m.triangles()).len() as i64;
            assert_eq!(s.vertices as i64 - edges + s.faces as i64, 0);
        }
    }

    #[test]
    fn error_grows_with_more_collapses() {
        let ico = synth::icosphere(3);
        let mut prev = (0usize, -1.0f64);
        let mut prev_faces = usize::MAX;
        for r in [0.9, 0.7, 0.5, 0.3, 0.1] {
            let (m, rep) = decimate_with_report(&ico, r).unwrap();
            assert!(rep.collapses >= prev.0);
            assert!(rep.total_error >= prev.1);
            assert!(m.face_count() <= prev_faces);
            prev = (rep.collapses, rep.total_error);
            prev_faces = m.face_count();
        }
    }

    #[test]
    fn deterministic() {
        let t = synth::torus(20, 12, 2.0, 0.5);
        assert_eq!(decimate(&t, 0.3).unwrap(), decimate(&t, 0.3).unwrap());
    }

    #[test]
    fn normals_are_recomputed() {
        let ico = synth::icosphere(2);
        let with_n = TriMesh::with_normals(
            ico.vertices().to_vec(),
            ico.triangles().to_vec(),
            Some(ico.vertex_normals()),
        )
        .unwrap();
        let out = decimate(&with_n, 0.5).unwrap();
        assert_eq!(out.normals().unwrap().len(), out.vertices().len());
    }
}
