//! Fidelity scoring of candidate renders against a reference render.
//!
//! Both images are composited over black before scoring. PSNR is taken over
//! the three color channels jointly; SSIM runs on Rec.601 luma with an 11×11
//! Gaussian window (σ = 1.5) over the valid region only. LPIPS needs a
//! pretrained network and is therefore never computed here: per-frame scores
//! are ingested from an external file and attached to the report.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imaging::{composite_over, ImageRgba};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("image dimensions differ: {a:?} vs {b:?}")]
    DimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("image {width}x{height} is smaller than the {window}x{window} SSIM window")]
    SmallerThanWindow { width: u32, height: u32, window: usize },
    #[error("candidate has {candidate} frames but reference has {reference}")]
    FrameCountMismatch { candidate: usize, reference: usize },
    #[error("LPIPS scores do not cover frames 0..{frames} exactly once ({scores} scores given)")]
    LpipsMismatch { frames: usize, scores: usize },
    #[error("malformed quality table line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Peak signal-to-noise ratio, or the sentinel for bit-identical inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Db(f64),
    Identical,
}

impl Psnr {
    pub fn db(self) -> Option<f64> {
        match self {
            Psnr::Db(v) => Some(v),
            Psnr::Identical => None,
        }
    }

    /// Value used for ordering, with the sentinel treated as +∞.
    pub fn as_f64(self) -> f64 {
        self.db().unwrap_or(f64::INFINITY)
    }
}

impl std::fmt::Display for Psnr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Psnr::Db(v) => write!(f, "{v:.4}"),
            Psnr::Identical => f.write_str("inf"),
        }
    }
}

fn check_dims(a: &ImageRgba, b: &ImageRgba) -> Result<(), MetricsError> {
    if a.dimensions() != b.dimensions() {
        return Err(MetricsError::DimensionMismatch {
            a: a.dimensions(),
            b: b.dimensions(),
        });
    }
    Ok(())
}

pub fn mse(a: &ImageRgba, b: &ImageRgba) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let a = composite_over(a, [0, 0, 0]);
    let b = composite_over(b, [0, 0, 0]);
    let sse: u64 = a
        .as_raw()
        .chunks_exact(4)
        .zip(b.as_raw().chunks_exact(4))
        .map(|(p, q)| {
            (0..3)
                .map(|c| {
                    let d = p[c] as i64 - q[c] as i64;
                    (d * d) as u64
                })
                .sum::<u64>()
        })
        .sum();
    let n = a.width() as f64 * a.height() as f64 * 3.0;
    Ok(sse as f64 / n)
}

pub fn psnr(a: &ImageRgba, b: &ImageRgba) -> Result<Psnr, MetricsError> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(Psnr::Identical);
    }
    Ok(Psnr::Db(10.0 * (255.0f64 * 255.0 / m).log10()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            peak: 255.0,
        }
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size as f64 - 1.0) / 2.0;
    let k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

fn luma(img: &ImageRgba) -> Vec<f64> {
    composite_over(img, [0, 0, 0])
        .as_raw()
        .chunks_exact(4)
        .map(|p| 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64)
        .collect()
}

/// Valid-region separable filtering: output is `(w-k+1) × (h-k+1)`.
fn filter_valid(plane: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let ow = w + 1 - n;
    let oh = h + 1 - n;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k
                .iter()
                .enumerate()
                .map(|(i, kv)| kv * tmp[(y + i) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean structural similarity over all window positions.
pub fn ssim(a: &ImageRgba, b: &ImageRgba, params: &SsimParams) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let (w, h) = (a.width() as usize, a.height() as usize);
    if w < params.window || h < params.window {
        return Err(MetricsError::SmallerThanWindow {
            width: a.width(),
            height: a.height(),
            window: params.window,
        });
    }
    let x = luma(a);
    let y = luma(b);
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
    let k = gaussian_kernel(params.window, params.sigma);
    let [mx, my, sxx, syy, sxy] =
        [&x, &y, &xx, &yy, &xy].map(|p| filter_valid(p, w, h, &k));

    let c1 = (params.k1 * params.peak).powi(2);
    let c2 = (params.k2 * params.peak).powi(2);
    let n = mx.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2))
                / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub frame_index: usize,
    pub psnr: Psnr,
    pub ssim: f64,
    pub lpips: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub per_frame: Vec<FrameMetrics>,
    /// Mean over frames with finite PSNR; `None` when every frame is identical.
    pub mean_psnr: Option<f64>,
    pub mean_ssim: f64,
    pub mean_lpips: Option<f64>,
    /// Frames whose PSNR is the identical-image sentinel.
    pub identical_frames: Vec<usize>,
}

fn mean(it: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

/// Score candidate frames against reference frames pairwise.
///
/// `external_lpips` holds `(frame_index, score)` pairs and must name every
/// frame exactly once.
pub fn compare_sequences(
    candidate: &[ImageRgba],
    reference: &[ImageRgba],
    external_lpips: Option<&[(usize, f64)]>,
    params: &SsimParams,
) -> Result<MetricReport, MetricsError> {
    if candidate.len() != reference.len() {
        return Err(MetricsError::FrameCountMismatch {
            candidate: candidate.len(),
            reference: reference.len(),
        });
    }
    let n = candidate.len();
    let lpips = match external_lpips {
        None => None,
        Some(scores) => {
            let mut by_frame = vec![None; n];
            for &(i, s) in scores {
                match by_frame.get_mut(i) {
                    Some(slot @ None) => *slot = Some(s),
                    _ => {
                        return Err(MetricsError::LpipsMismatch {
                            frames: n,
                            scores: scores.len(),
                        })
                    }
                }
            }
            if scores.len() != n {
                return Err(MetricsError::LpipsMismatch {
                    frames: n,
                    scores: scores.len(),
                });
            }
            Some(by_frame)
        }
    };

    let per_frame = candidate
        .par_iter()
        .zip(reference.par_iter())
        .enumerate()
        .map(|(i, (c, r))| {
            Ok(FrameMetrics {
                frame_index: i,
                psnr: psnr(c, r)?,
                ssim: ssim(c, r, params)?,
                lpips: lpips.as_ref().and_then(|l| l[i]),
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;

    Ok(MetricReport {
        mean_psnr: mean(per_frame.iter().filter_map(|f| f.psnr.db())),
        mean_ssim: mean(per_frame.iter().map(|f| f.ssim)).unwrap_or(f64::NAN),
        mean_lpips: lpips
            .is_some()
            .then(|| mean(per_frame.iter().filter_map(|f| f.lpips)))
            .flatten(),
        identical_frames: per_frame
            .iter()
            .filter(|f| f.psnr == Psnr::Identical)
            .map(|f| f.frame_index)
            .collect(),
        per_frame,
    })
}

impl MetricReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame_index,psnr_db,ssim,lpips\n");
        for f in &self.per_frame {
            let lp = f.lpips.map(|v| format!("{v}")).unwrap_or_default();
            let _ = writeln!(s, "{},{},{:.9},{}", f.frame_index, f.psnr, f.ssim, lp);
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6}  {:>10}  {:>10}  {:>8}", "frame", "PSNR(dB)", "SSIM", "LPIPS");
        for f in &self.per_frame {
            let lp = f.lpips.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:>6}  {:>10}  {:>10.6}  {:>8}",
                f.frame_index,
                f.psnr.to_string(),
                f.ssim,
                lp
            );
        }
        let mp = self
            .mean_psnr
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "inf".into());
        let ml = self
            .mean_lpips
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:>6}  {:>10}  {:>10.6}  {:>8}", "mean", mp, self.mean_ssim, ml);
        if !self.identical_frames.is_empty() {
            let _ = writeln!(
                s,
                "identical frames (excluded from PSNR mean): {:?}",
                self.identical_frames
            );
        }
        s
    }

    pub fn scores(&self) -> QualityScores {
        QualityScores {
            psnr_db: self.mean_psnr.unwrap_or(f64::INFINITY),
            ssim: self.mean_ssim,
            lpips: self.mean_lpips,
        }
    }
}

/// Summary fidelity of one asset against the reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityScores {
    pub psnr_db: f64,
    pub ssim: f64,
    pub lpips: Option<f64>,
}

impl QualityScores {
    /// True when `self` agrees more closely with the reference than `other`
    /// on every available metric: higher PSNR, higher SSIM, lower LPIPS.
    pub fn closer_than(&self, other: &QualityScores) -> bool {
        let lp = match (self.lpips, other.lpips) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        };
        self.psnr_db > other.psnr_db && self.ssim > other.ssim && lp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Psnr,
    Ssim,
    Lpips,
}

/// A row of an externally produced per-asset quality table.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityRow {
    pub representation: String,
    pub lod: u8,
    pub scores: QualityScores,
}

/// Sort rows best-first on one metric (descending PSNR/SSIM, ascending LPIPS).
/// Rows without an LPIPS score sort last under `Metric::Lpips`.
pub fn rank_rows(rows: &[QualityRow], metric: Metric) -> Vec<&QualityRow> {
    let mut out: Vec<&QualityRow> = rows.iter().collect();
    out.sort_by(|a, b| {
        let (a, b) = (&a.scores, &b.scores);
        match metric {
            Metric::Psnr => b.psnr_db.total_cmp(&a.psnr_db),
            Metric::Ssim => b.ssim.total_cmp(&a.ssim),
            Metric::Lpips => a
                .lpips
                .unwrap_or(f64::INFINITY)
                .total_cmp(&b.lpips.unwrap_or(f64::INFINITY)),
        }
    });
    out
}

/// Parse `representation,lod,psnr,ssim,lpips` rows (header required; LPIPS
/// may be empty). LoD accepts `0` or `L0`.
pub fn parse_quality_table(text: &str) -> Result<Vec<QualityRow>, MetricsError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| MetricsError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(err("expected 5 fields"));
        }
        let lod = f[1]
            .trim_start_matches(['L', 'l'])
            .parse()
            .map_err(|_| err("bad lod"))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad number"));
        rows.push(QualityRow {
            representation: f[0].to_string(),
            lod,
            scores: QualityScores {
                psnr_db: num(f[2])?,
                ssim: num(f[3])?,
                lpips: if f[4].is_empty() { None } else { Some(num(f[4])?) },
            },
        });
    }
    Ok(rows)
}

/// Parse `frame_index,lpips` rows; a non-numeric first line is taken as a
/// header.
pub fn parse_lpips_scores(text: &str) -> Result<Vec<(usize, f64)>, MetricsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| MetricsError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (a, b) = line.split_once(',').ok_or_else(|| err("expected frame_index,lpips"))?;
        match (a.trim().parse::<usize>(), b.trim().parse::<f64>()) {
            (Ok(f), Ok(s)) => out.push((f, s)),
            _ if i == 0 => {}
            _ => return Err(err("bad frame index or score")),
        }
    }
    Ok(out)
}

/// Reported evaluation-view quality of the reference asset set.
pub const REFERENCE_QUALITY_TABLE: &str = include_str!("../data/evaluation_view_quality.csv");

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn solid(w: u32, h: u32, px: [u8; 4]) -> ImageRgba {
        ImageRgba::filled(w, h, px).unwrap()
    }

    #[test]
    fn psnr_identical_is_sentinel() {
        let a = solid(4, 4, [1, 2, 3, 255]);
        assert_eq!(psnr(&a, &a).unwrap(), Psnr::Identical);
    }

    #[test]
    fn psnr_uniform_offset_16() {
        let a = solid(4, 4, [100, 50, 20, 255]);
        let b = solid(4, 4, [116, 66, 36, 255]);
        let expected = 10.0 * (255.0f64 * 255.0 / 256.0).log10();
        let got = psnr(&a, &b).unwrap().db().unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 24.0484).abs() < 1e-4);
    }

    #[test]
    fn psnr_single_channel_full_range() {
        let a = solid(1, 1, [0, 0, 0, 255]);
        let b = solid(1, 1, [255, 0, 0, 255]);
        let got = psnr(&a, &b).unwrap().db().unwrap();
        assert!((got - 10.0 * 3f64.log10()).abs() < 1e-12);
        assert!((got - 4.7712).abs() < 1e-4);
    }

    #[test]
    fn psnr_dimension_mismatch() {
        let a = solid(2, 2, [0; 4]);
        let b = solid(2, 3, [0; 4]);
        assert!(matches!(
            psnr(&a, &b),
            Err(MetricsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ssim_constant_images() {
        let p = SsimParams::default();
        let a = solid(16, 16, [0, 0, 0, 255]);
        let b = solid(16, 16, [255, 255, 255, 255]);
        let c1 = (0.01f64 * 255.0).powi(2);
        let expect = c1 / (255.0 * 255.0 + c1);
        let got = ssim(&a, &b, &p).unwrap();
        assert!((got - expect).abs() < 1e-8, "{got} vs {expect}");
        assert!((got - 9.9990e-5).abs() < 1e-8);
        for v in [0u8, 77, 255] {
            let c = solid(12, 12, [v, v, v, 255]);
            assert_eq!(ssim(&c, &c, &p).unwrap(), 1.0);
        }
    }

    #[test]
    fn ssim_rejects_small_images() {
        let a = solid(10, 20, [0; 4]);
        assert!(matches!(
            ssim(&a, &a, &SsimParams::default()),
            Err(MetricsError::SmallerThanWindow { .. })
        ));
    }

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(11, 1.5);
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..11 {
            assert_eq!(k[i], k[10 - i]);
        }
    }

    #[test]
    fn sequence_means_and_sentinels() {
        // frames with MSE m give PSNR 10·log10(255²/m); choose m for 20 and 30 dB
        // indirectly by checking the mean equals the mean of per-frame values.
        let r = vec![solid(12, 12, [0, 0, 0, 255]); 3];
        let c = vec![
            solid(12, 12, [10, 10, 10, 255]),
            solid(12, 12, [40, 40, 40, 255]),
            solid(12, 12, [0, 0, 0, 255]),
        ];
        let rep = compare_sequences(&c, &r, None, &SsimParams::default()).unwrap();
        let p0 = rep.per_frame[0].psnr.db().unwrap();
        let p1 = rep.per_frame[1].psnr.db().unwrap();
        assert!((rep.mean_psnr.unwrap() - (p0 + p1) / 2.0).abs() < 1e-12);
        assert_eq!(rep.identical_frames, vec![2]);
        assert_eq!(rep.mean_lpips, None);
    }

    #[test]
    fn arithmetic_mean_of_psnr() {
        assert_eq!(mean([20.0, 30.0].into_iter()), Some(25.0));
    }

    #[test]
    fn identical_sequence() {
        let frames = vec![solid(11, 11, [9, 8, 7, 255]); 60];
        let rep = compare_sequences(&frames, &frames, None, &SsimParams::default()).unwrap();
        assert!(rep.per_frame.iter().all(|f| f.ssim == 1.0));
        assert!(rep.per_frame.iter().all(|f| f.psnr == Psnr::Identical));
        assert_eq!(rep.mean_psnr, None);
        assert_eq!(rep.identical_frames.len(), 60);
    }

    #[test]
    fn lpips_attachment_and_errors() {
        let f = vec![solid(11, 11, [0; 4]); 2];
        let p = SsimParams::default();
        let rep = compare_sequences(&f, &f, Some(&[(1, 0.2), (0, 0.1)]), &p).unwrap();
        assert_eq!(rep.per_frame[0].lpips, Some(0.1));
        assert!((rep.mean_lpips.unwrap() - 0.15).abs() < 1e-15);
        assert!(matches!(
            compare_sequences(&f, &f, Some(&[(0, 0.1)]), &p),
            Err(MetricsError::LpipsMismatch { .. })
        ));
        assert!(matches!(
            compare_sequences(&f, &f, Some(&[(0, 0.1), (0, 0.2)]), &p),
            Err(MetricsError::LpipsMismatch { .. })
        ));
        assert!(matches!(
            compare_sequences(&f[..1], &f, None, &p),
            Err(MetricsError::FrameCountMismatch { .. })
        ));
    }

    #[test]
    fn lpips_score_file() {
        let s = parse_lpips_scores("frame_index,lpips\n0,0.12\n1, 0.3\n").unwrap();
        assert_eq!(s, vec![(0, 0.12), (1, 0.3)]);
        assert!(matches!(parse_lpips_scores("0,0.1\nx,y\n"), Err(MetricsError::Parse { line: 2, .. })));
    }

    #[test]
    fn reference_table_ordering() {
        let rows = parse_quality_table(REFERENCE_QUALITY_TABLE).unwrap();
        assert_eq!(rows.len(), 12);
        let find = |rep: &str, lod| {
            rows.iter()
                .find(|r| r.representation == rep && r.lod == lod)
                .unwrap()
        };
        let n0 = find("nerf", 0);
        let n3 = find("nerf", 3);
        assert_eq!(n0.scores.psnr_db, 36.18);
        assert!(n0.scores.closer_than(&n3.scores));
        assert!(!n3.scores.closer_than(&n0.scores));
        let by_lpips = rank_rows(&rows, Metric::Lpips);
        assert_eq!(by_lpips[0].representation, "impostor");
        let by_psnr = rank_rows(&rows, Metric::Psnr);
        assert_eq!(
            (by_psnr[0].representation.as_str(), by_psnr[0].lod),
            ("gaussian", 0)
        );
    }

    fn noisy(seed: u64) -> ImageRgba {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let data = (0..16 * 14 * 4)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 56) as u8
            })
            .collect();
        ImageRgba::from_raw(16, 14, data).unwrap()
    }

    proptest! {
        #[test]
        fn ssim_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>()) {
            let p = SsimParams::default();
            let (a, b) = (noisy(s1), noisy(s2));
            let ab = ssim(&a, &b, &p).unwrap();
            let ba = ssim(&b, &a, &p).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert!((ssim(&a, &a, &p).unwrap() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn psnr_decreases_with_error(base in 0u8..100, d1 in 1u8..50, extra in 1u8..50) {
            let r = solid(4, 4, [base, base, base, 255]);
            let near = solid(4, 4, [base + d1, base, base, 255]);
            let far = solid(4, 4, [base + d1 + extra, base, base, 255]);
            prop_assert!(psnr(&r, &near).unwrap().as_f64() > psnr(&r, &far).unwrap().as_f64());
        }
    }
}
