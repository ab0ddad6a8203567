//! Procedural stand-ins for production assets: a walking sprite sequence,
//! closed and open triangle meshes, random splat clouds and simulated
//! forced-choice study responses.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::imaging::{ImageRgba, Rect};
use crate::mesh_lod::TriMesh;
use crate::policy::{Band, PolicyTable};
use crate::splat_lod::GaussianCloud;
use crate::study_stats::{Mode, TrialRecord, REPRESENTATION_LEVELS};

/// A mirror-symmetric stick figure whose legs and arms swing through one
/// stride cycle.
///
/// The union of the per-frame alpha boxes is exactly `body` (frame 0 is at
/// full stride). `body` must have an even width so the figure mirrors about a
/// pixel boundary, and must fit inside the `width × height` frame.
pub fn walker_sequence(frames: usize, width: u32, height: u32, body: Rect) -> Vec<ImageRgba> {
    assert!(body.width() % 2 == 0, "body width must be even");
    assert!(body.x1 <= width && body.y1 <= height);
    assert!(body.height() >= 16 && body.width() >= 8);
    (0..frames)
        .map(|t| {
            let phase = (PI * t as f64 / frames.max(1) as f64).cos().abs();
            walker_frame(width, height, body, phase, t as f64 / frames.max(1) as f64)
        })
        .collect()
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

fn walker_frame(width: u32, height: u32, body: Rect, stride: f64, cycle: f64) -> ImageRgba {
    let mut img = ImageRgba::new(width, height).expect("non-empty frame");
    let cx = (body.x0 + body.x1) as f64 / 2.0;
    let (x0, y0, y1) = (body.x0 as f64, body.y0 as f64, body.y1 as f64);
    let h = y1 - y0;
    let half_w = cx - x0;

    let head_c = (cx, y0 + 0.1 * h);
    let head_r = 0.1 * h;
    let hip = (cx, y0 + 0.58 * h);
    let shoulder = (cx, y0 + 0.27 * h);
    let foot_w = (0.08 * half_w).max(1.0);
    let foot_h = (0.04 * h).max(1.0);
    // outer foot edge reaches the body edge at full stride
    let reach = (half_w - 2.0 * foot_w) * stride;
    let foot_c = (cx - reach - foot_w, y1 - foot_h / 2.0);
    let limb_r = (0.035 * h).max(1.0);
    let hand = (
        cx - (0.15 * half_w + 0.45 * half_w * stride),
        y0 + 0.5 * h - 0.05 * h * stride,
    );

    // render the left half and mirror it
    let mid = (body.x0 + body.x1) / 2;
    for y in body.y0..body.y1 {
        for x in body.x0..mid {
            let p = (x as f64 + 0.5, y as f64 + 0.5);
            let shade = |base: [f64; 3]| -> [u8; 4] {
                let k = 0.75 + 0.25 * ((p.1 - y0) / h);
                let w = 0.9 + 0.1 * (2.0 * PI * cycle).sin();
                [
                    (base[0] * k * w).round() as u8,
                    (base[1] * k).round() as u8,
                    (base[2] * k).round() as u8,
                    255,
                ]
            };
            let in_head = ((p.0 - head_c.0).powi(2) + (p.1 - head_c.1).powi(2)).sqrt() < head_r;
            let in_torso = (p.0 - cx).abs() < 0.1 * h && p.1 >= y0 + 0.2 * h && p.1 < y0 + 0.62 * h;
            let in_leg = seg_dist(p, hip, (foot_c.0, foot_c.1 - foot_h)) < limb_r;
            let in_foot = (p.0 - foot_c.0).abs() < foot_w && p.1 >= y1 - foot_h && p.1 < y1;
            let in_arm = seg_dist(p, shoulder, hand) < 0.8 * limb_r;
            let px = if in_head {
                Some(shade([230.0, 190.0, 160.0]))
            } else if in_foot {
                Some(shade([60.0, 40.0, 30.0]))
            } else if in_leg {
                Some(shade([40.0, 60.0, 140.0]))
            } else if in_arm {
                Some(shade([200.0, 70.0, 60.0]))
            } else if in_torso {
                Some(shade([180.0, 40.0, 40.0]))
            } else {
                None
            };
            if let Some(px) = px {
                img.put(x, y, px);
                img.put(2 * mid - 1 - x, y, px);
            }
        }
    }
    img
}

/// Axis-aligned unit cube, 8 vertices and 12 outward-facing triangles.
pub fn cube() -> TriMesh {
    let v = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
    ];
    let t = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [2, 3, 7],
        [2, 7, 6],
        [1, 2, 6],
        [1, 6, 5],
        [0, 4, 7],
        [0, 7, 3],
    ];
    TriMesh::new(v, t).expect("valid cube")
}

/// Unit icosphere; `20 · 4^subdivisions` faces.
pub fn icosphere(subdivisions: u32) -> TriMesh {
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ];
    let mut tris: Vec<[u32; 3]> = vec![
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
    let normalize = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    for v in verts.iter_mut() {
        *v = normalize(*v);
    }
    for _ in 0..subdivisions {
        let mut mids = std::collections::HashMap::new();
        let mut next = Vec::with_capacity(tris.len() * 4);
        let mut mid = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
            *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (pa, pb) = (verts[a as usize], verts[b as usize]);
                verts.push(normalize([
                    (pa[0] + pb[0]) / 2.0,
                    (pa[1] + pb[1]) / 2.0,
                    (pa[2] + pb[2]) / 2.0,
                ]));
                verts.len() as u32 - 1
            })
        };
        for [a, b, c] in tris {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    TriMesh::new(verts, tris).expect("valid icosphere")
}

/// Closed torus with `2 · major · minor` faces.
pub fn torus(major: u32, minor: u32, big_r: f64, small_r: f64) -> TriMesh {
    assert!(major >= 3 && minor >= 3);
    let mut verts = Vec::with_capacity((major * minor) as usize);
    for i in 0..major {
        let u = 2.0 * PI * i as f64 / major as f64;
        for j in 0..minor {
            let v = 2.0 * PI * j as f64 / minor as f64;
            let r = big_r + small_r * v.cos();
            verts.push([r * u.cos(), r * u.sin(), small_r * v.sin()]);
        }
    }
    let id = |i: u32, j: u32| (i % major) * minor + (j % minor);
    let mut tris = Vec::with_capacity((2 * major * minor) as usize);
    for i in 0..major {
        for j in 0..minor {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    TriMesh::new(verts, tris).expect("valid torus")
}

/// Planar grid in `z = 0` with `2 · nx · ny` faces.
pub fn grid(nx: u32, ny: u32) -> TriMesh {
    let mut verts = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            verts.push([i as f64, j as f64, 0.0]);
        }
    }
    let id = |i: u32, j: u32| j * (nx + 1) + i;
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            tris.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    TriMesh::new(verts, tris).expect("valid grid")
}

/// Random splat cloud. Opacity logits are spread so that a few percent of
/// splats fall under the usual 0.01 prune threshold.
pub fn random_cloud(n: usize, sh_degree: u8, seed: u64) -> GaussianCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = GaussianCloud::sh_width(sh_degree);
    let mut positions = Vec::with_capacity(n);
    let mut log_scales = Vec::with_capacity(n);
    let mut rotations = Vec::with_capacity(n);
    let mut opacity_logits = Vec::with_capacity(n);
    let mut sh = Vec::with_capacity(n * width);
    for _ in 0..n {
        positions.push([
            rng.gen_range(-1.0f32..1.0),
            rng.gen_range(-1.0f32..1.0),
            rng.gen_range(0.0f32..2.0),
        ]);
        log_scales.push([
            rng.gen_range(-6.0f32..-2.0),
            rng.gen_range(-6.0f32..-2.0),
            rng.gen_range(-6.0f32..-2.0),
        ]);
        let q: [f32; 4] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let norm = q.iter().map(|v| v * v).sum::<f32>().sqrt();
        rotations.push(if norm < 1e-3 {
            [1.0, 0.0, 0.0, 0.0]
        } else {
            q.map(|v| v / norm)
        });
        opacity_logits.push(rng.gen_range(-6.0f32..6.0));
        for _ in 0..width {
            sh.push(rng.gen_range(-0.5f32..0.5));
        }
    }
    GaussianCloud::new(positions, log_scales, rotations, opacity_logits, sh_degree, sh, None)
        .expect("valid random cloud")
}

/// Simulated four-way forced-choice responses for every subject, mode,
/// distance, LoD and repetition.
///
/// Choice probabilities mix the default policy scores for the cell with the
/// uniform chance level (weight `1 − signal`), so every representation keeps
/// a non-zero probability. Both modes share the same probabilities.
pub fn study_trials(subjects: usize, repetitions: u32, signal: f64, seed: u64) -> Vec<TrialRecord> {
    let policy = PolicyTable::default_table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in 0..subjects {
        for mode in [Mode::Image, Mode::Video] {
            for band in Band::ALL {
                for lod in 0..4u8 {
                    let probs: Vec<f64> = REPRESENTATION_LEVELS
                        .iter()
                        .map(|&r| signal * policy.score(band, lod, r) + (1.0 - signal) * 0.25)
                        .collect();
                    for repetition in 0..repetitions {
                        let mut u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
                        let mut k = 0;
                        while k + 1 < probs.len() && u >= probs[k] {
                            u -= probs[k];
                            k += 1;
                        }
                        out.push(TrialRecord {
                            subject: format!("S{:02}", s + 1),
                            mode,
                            distance: band,
                            lod,
                            chosen: REPRESENTATION_LEVELS[k],
                            repetition,
                        });
                    }
                }
            }
        }
    }
    out
}
