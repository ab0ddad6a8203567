//! Gaussian splat LoD: opacity pruning, importance-ranked count caps and
//! analytic size estimates.
//!
//! Every reduction returns a subset of the input splats with untouched
//! attribute values, in their original order.

mod ply;

pub use ply::{parse_ply, read_ply, to_ply_bytes, write_ply};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_CAPS: [usize; 4] = [120_000, 30_000, 7_500, 1_900];
pub const DEFAULT_ALPHA_MIN: f64 = 0.01;

#[derive(Debug, Error, PartialEq)]
pub enum SplatError {
    #[error("{field} has {got} entries, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("rotation of splat {index} has norm {norm}, expected 1")]
    NonUnitRotation { index: usize, norm: f32 },
    #[error("SH degree {0} is outside 0..=3")]
    ShDegree(u8),
    #[error("alpha_min {0} is outside [0, 1)")]
    AlphaOutOfRange(f64),
    #[error("no caps given")]
    EmptyCaps,
    #[error("caps must be non-increasing, got {0:?}")]
    CapsIncreasing(Vec<usize>),
    #[error("malformed PLY: {0}")]
    Ply(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SplatError {
    fn from(e: std::io::Error) -> Self {
        SplatError::Io(e.to_string())
    }
}

/// Columnar splat set. Row `i` of `sh_coeffs` holds `sh_width(sh_degree)`
/// values: the three DC terms followed by the higher bands in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCloud {
    positions: Vec<[f32; 3]>,
    log_scales: Vec<[f32; 3]>,
    rotations: Vec<[f32; 4]>,
    opacity_logits: Vec<f32>,
    sh_degree: u8,
    sh_coeffs: Vec<f32>,
    normals: Option<Vec<[f32; 3]>>,
}

impl GaussianCloud {
    /// Coefficients per splat for a given SH degree.
    pub fn sh_width(sh_degree: u8) -> usize {
        let b = sh_degree as usize + 1;
        3 * b * b
    }

    pub fn new(
        positions: Vec<[f32; 3]>,
        log_scales: Vec<[f32; 3]>,
        rotations: Vec<[f32; 4]>,
        opacity_logits: Vec<f32>,
        sh_degree: u8,
        sh_coeffs: Vec<f32>,
        normals: Option<Vec<[f32; 3]>>,
    ) -> Result<Self, SplatError> {
        if sh_degree > 3 {
            return Err(SplatError::ShDegree(sh_degree));
        }
        let n = positions.len();
        let check = |field, expected, got| {
            if got == expected {
                Ok(())
            } else {
                Err(SplatError::LengthMismatch { field, expected, got })
            }
        };
        check("log_scales", n, log_scales.len())?;
        check("rotations", n, rotations.len())?;
        check("opacity_logits", n, opacity_logits.len())?;
        check("sh_coeffs", n * Self::sh_width(sh_degree), sh_coeffs.len())?;
        if let Some(nr) = &normals {
            check("normals", n, nr.len())?;
        }
        for (index, q) in rotations.iter().enumerate() {
            let norm = q.iter().map(|v| v * v).sum::<f32>().sqrt();
            if !((norm - 1.0).abs() <= 1e-4) {
                return Err(SplatError::NonUnitRotation { index, norm });
            }
        }
        Ok(Self {
            positions,
            log_scales,
            rotations,
            opacity_logits,
            sh_degree,
            sh_coeffs,
            normals,
        })
    }

    pub fn empty(sh_degree: u8) -> Self {
        Self::new(vec![], vec![], vec![], vec![], sh_degree.min(3), vec![], None).expect("empty cloud")
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f32; 3]] {
        &self.positions
    }

    pub fn log_scales(&self) -> &[[f32; 3]] {
        &self.log_scales
    }

    pub fn rotations(&self) -> &[[f32; 4]] {
        &self.rotations
    }

    pub fn opacity_logits(&self) -> &[f32] {
        &self.opacity_logits
    }

    pub fn sh_degree(&self) -> u8 {
        self.sh_degree
    }

    pub fn sh_coeffs(&self) -> &[f32] {
        &self.sh_coeffs
    }

    pub fn normals(&self) -> Option<&[[f32; 3]]> {
        self.normals.as_deref()
    }

    pub fn sh_row(&self, i: usize) -> &[f32] {
        let w = Self::sh_width(self.sh_degree);
        &self.sh_coeffs[i * w..(i + 1) * w]
    }

    /// Opacity α = sigmoid(logit) of splat `i`.
    pub fn opacity(&self, i: usize) -> f64 {
        sigmoid(self.opacity_logits[i] as f64)
    }

    /// New cloud holding the splats at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let w = Self::sh_width(self.sh_degree);
        let mut sh = Vec::with_capacity(indices.len() * w);
        for &i in indices {
            sh.extend_from_slice(&self.sh_coeffs[i * w..(i + 1) * w]);
        }
        Self {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            log_scales: indices.iter().map(|&i| self.log_scales[i]).collect(),
            rotations: indices.iter().map(|&i| self.rotations[i]).collect(),
            opacity_logits: indices.iter().map(|&i| self.opacity_logits[i]).collect(),
            sh_degree: self.sh_degree,
            sh_coeffs: sh,
            normals: self
                .normals
                .as_ref()
                .map(|n| indices.iter().map(|&i| n[i]).collect()),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Ranking rule for [`cap_count`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Importance {
    /// α
    #[default]
    Opacity,
    /// α · exp(s₀ + s₁ + s₂), proportional to the ellipsoid volume.
    OpacityVolume,
}

impl std::str::FromStr for Importance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "opacity" => Ok(Importance::Opacity),
            "opacity-volume" | "opacity_volume" | "opacity*volume" => Ok(Importance::OpacityVolume),
            other => Err(format!("unknown importance {other:?}; use opacity or opacity-volume")),
        }
    }
}

impl Importance {
    pub fn score(self, cloud: &GaussianCloud, i: usize) -> f64 {
        let a = cloud.opacity(i);
        match self {
            Importance::Opacity => a,
            Importance::OpacityVolume => {
                let s = cloud.log_scales[i];
                a * (s[0] as f64 + s[1] as f64 + s[2] as f64).exp()
            }
        }
    }
}

/// Keep splats with α ≥ `alpha_min`.
pub fn prune_opacity(cloud: &GaussianCloud, alpha_min: f64) -> Result<GaussianCloud, SplatError> {
    if !(0.0..1.0).contains(&alpha_min) {
        return Err(SplatError::AlphaOutOfRange(alpha_min));
    }
    let keep: Vec<usize> = (0..cloud.len()).filter(|&i| cloud.opacity(i) >= alpha_min).collect();
    Ok(cloud.select(&keep))
}

/// Indices of the `n_max` most important splats, ascending.
pub fn top_indices(cloud: &GaussianCloud, n_max: usize, importance: Importance) -> Vec<usize> {
    let n = cloud.len();
    if n <= n_max {
        return (0..n).collect();
    }
    let score: Vec<f64> = (0..n).map(|i| importance.score(cloud, i)).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    let order = |a: &usize, b: &usize| score[*b].total_cmp(&score[*a]).then(a.cmp(b));
    if n_max > 0 {
        idx.select_nth_unstable_by(n_max - 1, order);
    }
    idx.truncate(n_max);
    idx.sort_unstable();
    idx
}

pub fn cap_count(cloud: &GaussianCloud, n_max: usize, importance: Importance) -> GaussianCloud {
    if cloud.len() <= n_max {
        return cloud.clone();
    }
    cloud.select(&top_indices(cloud, n_max, importance))
}

/// Prune once, then cap the pruned base at every level.
pub fn lod_chain(
    cloud: &GaussianCloud,
    caps: &[usize],
    alpha_min: f64,
    importance: Importance,
) -> Result<Vec<GaussianCloud>, SplatError> {
    if caps.is_empty() {
        return Err(SplatError::EmptyCaps);
    }
    if caps.windows(2).any(|w| w[1] > w[0]) {
        return Err(SplatError::CapsIncreasing(caps.to_vec()));
    }
    let pruned = prune_opacity(cloud, alpha_min)?;
    log::debug!("opacity prune kept {} of {} splats", pruned.len(), cloud.len());
    Ok(caps.iter().map(|&c| cap_count(&pruned, c, importance)).collect())
}

/// Analytic payload size in bytes: `n` splats of f32 position, scale,
/// rotation, opacity and SH color. Normals and container headers are not
/// counted.
pub fn estimate_size(n: usize, sh_degree: u8) -> u64 {
    let floats = 3 + 3 + 4 + 1 + GaussianCloud::sh_width(sh_degree) as u64;
    n as u64 * 4 * floats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::random_cloud;
    use proptest::prelude::*;

    fn logit(a: f64) -> f32 {
        (a / (1.0 - a)).ln() as f32
    }

    fn with_opacities(alphas: &[f64]) -> GaussianCloud {
        let n = alphas.len();
        GaussianCloud::new(
            (0..n).map(|i| [i as f32, 0.0, 0.0]).collect(),
            vec![[0.0; 3]; n],
            vec![[1.0, 0.0, 0.0, 0.0]; n],
            alphas.iter().map(|&a| logit(a)).collect(),
            0,
            (0..n * 3).map(|i| i as f32).collect(),
            None,
        )
        .unwrap()
    }

    fn ids(c: &GaussianCloud) -> Vec<usize> {
        c.positions().iter().map(|p| p[0] as usize).collect()
    }

    #[test]
    fn validation() {
        let bad = GaussianCloud::new(vec![[0.0; 3]], vec![[0.0; 3]], vec![[2.0, 0.0, 0.0, 0.0]], vec![0.0], 0, vec![0.0; 3], None);
        assert!(matches!(bad, Err(SplatError::NonUnitRotation { index: 0, .. })));
        let bad = GaussianCloud::new(vec![[0.0; 3]], vec![[0.0; 3]], vec![[1.0, 0.0, 0.0, 0.0]], vec![0.0], 1, vec![0.0; 3], None);
        assert!(matches!(bad, Err(SplatError::LengthMismatch { field: "sh_coeffs", expected: 12, got: 3 })));
        assert_eq!(GaussianCloud::new(vec![], vec![], vec![], vec![], 4, vec![], None), Err(SplatError::ShDegree(4)));
        assert_eq!(GaussianCloud::sh_width(2), 27);
    }

    #[test]
    fn prune_examples() {
        let c = with_opacities(&[0.9, 0.5, 0.02, 0.009]);
        assert_eq!(prune_opacity(&c, 0.0).unwrap(), c);
        let p = prune_opacity(&c, 0.01).unwrap();
        assert_eq!(ids(&p), vec![0, 1, 2]);
        assert_eq!(p.sh_row(2), c.sh_row(2));
        let e = GaussianCloud::empty(2);
        assert_eq!(prune_opacity(&e, 0.01).unwrap(), e);
        assert_eq!(prune_opacity(&c, 1.0), Err(SplatError::AlphaOutOfRange(1.0)));
    }

    #[test]
    fn cap_examples() {
        let c = with_opacities(&[0.9, 0.5, 0.02, 0.009]);
        assert_eq!(ids(&cap_count(&c, 2, Importance::Opacity)), vec![0, 1]);
        assert!(cap_count(&c, 0, Importance::Opacity).is_empty());
        let five = with_opacities(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(cap_count(&five, 5, Importance::Opacity), five);
        // ties resolve to the lower index, output keeps input order
        let tied = with_opacities(&[0.3, 0.7, 0.3, 0.3, 0.7]);
        assert_eq!(ids(&cap_count(&tied, 3, Importance::Opacity)), vec![0, 1, 4]);
    }

    #[test]
    fn volume_importance_prefers_large_splats() {
        let mut c = with_opacities(&[0.5, 0.4]);
        c.log_scales[1] = [1.0, 1.0, 1.0];
        assert_eq!(ids(&cap_count(&c, 1, Importance::Opacity)), vec![0]);
        assert_eq!(ids(&cap_count(&c, 1, Importance::OpacityVolume)), vec![1]);
        assert_eq!("opacity-volume".parse::<Importance>(), Ok(Importance::OpacityVolume));
    }

    #[test]
    fn chain_validation_and_nesting() {
        let c = random_cloud(3000, 1, 11);
        assert_eq!(lod_chain(&c, &[], 0.01, Importance::Opacity), Err(SplatError::EmptyCaps));
        assert!(matches!(lod_chain(&c, &[10, 20], 0.01, Importance::Opacity), Err(SplatError::CapsIncreasing(_))));
        let id = lod_chain(&c, &[3000], 0.0, Importance::Opacity).unwrap();
        assert_eq!(id, vec![c.clone()]);
        let chain = lod_chain(&c, &[2000, 800, 800, 50], 0.01, Importance::OpacityVolume).unwrap();
        let key = |x: &GaussianCloud| x.positions().iter().map(|p| p.map(f32::to_bits)).collect::<std::collections::HashSet<_>>();
        for w in chain.windows(2) {
            assert!(key(&w[1]).is_subset(&key(&w[0])));
            assert!(w[1].len() <= w[0].len());
        }
    }

    #[test]
    fn size_estimates() {
        assert_eq!(estimate_size(0, 2), 0);
        assert_eq!(estimate_size(120_000, 2), 18_240_000);
        assert_eq!(estimate_size(1_900, 2), 288_800);
        assert_eq!(estimate_size(1, 0), 4 * 14);
    }

    proptest! {
        #[test]
        fn cap_matches_full_sort(n in 0usize..400, cap in 0usize..450, seed in 0u64..1000, vol in any::<bool>()) {
            let c = random_cloud(n, 0, seed);
            let imp = if vol { Importance::OpacityVolume } else { Importance::Opacity };
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| imp.score(&c, b).partial_cmp(&imp.score(&c, a)).unwrap().then(a.cmp(&b)));
            order.truncate(cap);
            order.sort();
            prop_assert_eq!(cap_count(&c, cap, imp), c.select(&order));
        }
    }
}
