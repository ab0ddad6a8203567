//! Perception-driven representation and LoD scheduling under a memory
//! budget, with Table-5-style footprint accounting.
//!
//! An agent's screen footprint picks a distance band; the band picks a LoD
//! through a [`LodRule`]; the [`PolicyTable`] cell for `(band, lod)` lists
//! how often viewers confuse each representation with the reference mesh.
//! Entries scoring at least `tau` count as indistinguishable, and the
//! cheapest of those wins.
//!
//! Assets are shared between instances, so memory is the sum over distinct
//! `(representation, lod)` pairs in use.

mod bytes;

pub use bytes::{format_bytes, parse_bytes};

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_POLICY_TOML: &str = include_str!("../../data/default_policy.toml");
pub const DEFAULT_CATALOG_TOML: &str = include_str!("../../data/default_catalog.toml");
pub const DEFAULT_TAU: f64 = 0.25;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("footprint ratio {0} must be positive and finite")]
    BadFootprint(f64),
    #[error("policy has no entry for ({band}, L{lod})")]
    MissingPolicy { band: Band, lod: u8 },
    #[error("catalog has no size for {rep} L{lod}")]
    MissingCatalog { rep: Representation, lod: u8 },
    #[error("no agents to schedule")]
    NoAgents,
    #[error("duplicate agent id {0:?}")]
    DuplicateAgent(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),
    #[error("agents file line {line}: {reason}")]
    Agents { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PolicyError {
    fn from(e: std::io::Error) -> Self {
        PolicyError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Mesh,
    Impostor,
    Nerf,
    Gaussian,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::Mesh,
        Representation::Impostor,
        Representation::Nerf,
        Representation::Gaussian,
    ];

    /// One-letter code used in study data: M, I, N, G.
    pub fn code(self) -> char {
        match self {
            Representation::Mesh => 'M',
            Representation::Impostor => 'I',
            Representation::Nerf => 'N',
            Representation::Gaussian => 'G',
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Representation::Mesh => "mesh",
            Representation::Impostor => "impostor",
            Representation::Nerf => "nerf",
            Representation::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Representation::Mesh => "Mesh",
            Representation::Impostor => "Impostor",
            Representation::Nerf => "NeRF",
            Representation::Gaussian => "3DGS",
        })
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m" | "mesh" => Ok(Representation::Mesh),
            "i" | "impostor" => Ok(Representation::Impostor),
            "n" | "nerf" => Ok(Representation::Nerf),
            "g" | "gaussian" | "3dgs" | "gaussians" => Ok(Representation::Gaussian),
            _ => Err(format!("unknown representation {s:?}")),
        }
    }
}

/// Viewing distance band, nearest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    D0,
    D1,
    D2,
    D3,
    D4,
}

impl Band {
    pub const ALL: [Band; 5] = [Band::D0, Band::D1, Band::D2, Band::D3, Band::D4];

    /// Screen-footprint ratio the band is centred on.
    pub fn anchor(self) -> f64 {
        [1.0, 0.8, 0.6, 0.4, 0.2][self.index()]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Band> {
        Band::ALL.get(i).copied()
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!("D{}", self.index()))
    }
}

impl FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        t.strip_prefix(['D', 'd'])
            .and_then(|d| d.parse::<usize>().ok())
            .and_then(Band::from_index)
            .ok_or_else(|| format!("unknown distance band {s:?}"))
    }
}

/// Nearest-anchor banding: boundaries at 0.9, 0.7, 0.5 and 0.3.
pub fn band_of(footprint_ratio: f64) -> Result<Band, PolicyError> {
    if !(footprint_ratio > 0.0 && footprint_ratio.is_finite()) {
        return Err(PolicyError::BadFootprint(footprint_ratio));
    }
    Ok(match footprint_ratio {
        r if r >= 0.9 => Band::D0,
        r if r >= 0.7 => Band::D1,
        r if r >= 0.5 => Band::D2,
        r if r >= 0.3 => Band::D3,
        _ => Band::D4,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    cells: BTreeMap<(Band, u8), Vec<(Representation, f64)>>,
    tau: f64,
}

#[derive(Deserialize)]
struct PolicyFile {
    #[serde(default = "default_tau")]
    tau: f64,
    #[serde(default)]
    cell: Vec<CellFile>,
}

#[derive(Deserialize)]
struct CellFile {
    band: String,
    lod: u8,
    scores: Vec<ScoreFile>,
}

#[derive(Deserialize)]
struct ScoreFile {
    rep: String,
    score: f64,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl PolicyTable {
    pub fn new(
        cells: BTreeMap<(Band, u8), Vec<(Representation, f64)>>,
        tau: f64,
    ) -> Result<Self, PolicyError> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(PolicyError::InvalidPolicy(format!("tau {tau} outside [0, 1]")));
        }
        for ((band, lod), entries) in &cells {
            if entries.is_empty() {
                return Err(PolicyError::InvalidPolicy(format!("({band}, L{lod}) has no entries")));
            }
            let mut seen = HashSet::new();
            for (rep, s) in entries {
                if !(0.0..=1.0).contains(s) {
                    return Err(PolicyError::InvalidPolicy(format!("score {s} for {rep} outside [0, 1]")));
                }
                if !seen.insert(*rep) {
                    return Err(PolicyError::InvalidPolicy(format!("{rep} listed twice in ({band}, L{lod})")));
                }
            }
        }
        Ok(Self { cells, tau })
    }

    pub fn from_toml(text: &str) -> Result<Self, PolicyError> {
        let f: PolicyFile = toml::from_str(text).map_err(|e| PolicyError::InvalidPolicy(e.to_string()))?;
        let mut cells = BTreeMap::new();
        for c in f.cell {
            let band: Band = c.band.parse().map_err(PolicyError::InvalidPolicy)?;
            let entries = c
                .scores
                .into_iter()
                .map(|s| Ok((s.rep.parse().map_err(PolicyError::InvalidPolicy)?, s.score)))
                .collect::<Result<Vec<_>, PolicyError>>()?;
            if cells.insert((band, c.lod), entries).is_some() {
                return Err(PolicyError::InvalidPolicy(format!("({band}, L{}) given twice", c.lod)));
            }
        }
        Self::new(cells, f.tau)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn default_table() -> Self {
        Self::from_toml(DEFAULT_POLICY_TOML).expect("bundled policy parses")
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self, PolicyError> {
        self.tau = tau;
        Self::new(self.cells, self.tau)
    }

    pub fn entries(&self, band: Band, lod: u8) -> Result<&[(Representation, f64)], PolicyError> {
        self.cells
            .get(&(band, lod))
            .map(Vec::as_slice)
            .ok_or(PolicyError::MissingPolicy { band, lod })
    }

    /// Score of `rep` in a cell; 0 when the cell or entry is absent.
    pub fn score(&self, band: Band, lod: u8, rep: Representation) -> f64 {
        self.cells
            .get(&(band, lod))
            .and_then(|e| e.iter().find(|(r, _)| *r == rep))
            .map_or(0.0, |(_, s)| *s)
    }
}

pub type AssetKey = (Representation, u8);

/// On-disk bytes per `(representation, lod)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssetCatalog {
    sizes: BTreeMap<AssetKey, u64>,
}

impl AssetCatalog {
    pub fn new(sizes: BTreeMap<AssetKey, u64>) -> Result<Self, PolicyError> {
        if let Some(((rep, lod), _)) = sizes.iter().find(|(_, &b)| b == 0) {
            return Err(PolicyError::InvalidCatalog(format!("{rep} L{lod} has zero size")));
        }
        Ok(Self { sizes })
    }

    /// Tables keyed by representation, entries `L<n> = "<size>"` or a plain
    /// integer byte count.
    pub fn from_toml(text: &str) -> Result<Self, PolicyError> {
        let bad = |m: String| PolicyError::InvalidCatalog(m);
        let table: toml::Table = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        let mut sizes = BTreeMap::new();
        for (rep_name, levels) in table {
            let rep: Representation = rep_name.parse().map_err(bad)?;
            let levels = levels
                .as_table()
                .ok_or_else(|| bad(format!("{rep_name} must be a table")))?;
            for (lod_name, v) in levels {
                let lod: u8 = lod_name
                    .strip_prefix(['L', 'l'])
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| bad(format!("bad LoD key {lod_name:?}")))?;
                let b = match v {
                    toml::Value::String(s) => parse_bytes(s).map_err(bad)?,
                    toml::Value::Integer(i) if *i > 0 => *i as u64,
                    other => return Err(bad(format!("bad size {other}"))),
                };
                sizes.insert((rep, lod), b);
            }
        }
        Self::new(sizes)
    }

    pub fn load(path: &Path) -> Result<Self, PolicyError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn default_catalog() -> Self {
        Self::from_toml(DEFAULT_CATALOG_TOML).expect("bundled catalog parses")
    }

    pub fn size(&self, rep: Representation, lod: u8) -> Result<u64, PolicyError> {
        self.sizes
            .get(&(rep, lod))
            .copied()
            .ok_or(PolicyError::MissingCatalog { rep, lod })
    }

    pub fn assets(&self) -> impl Iterator<Item = (AssetKey, u64)> + '_ {
        self.sizes.iter().map(|(k, v)| (*k, *v))
    }

    /// Sort key giving every asset a strict position: size, then key.
    fn rank(&self, key: AssetKey) -> (u64, AssetKey) {
        (self.sizes[&key], key)
    }
}

/// Pick the cheapest entry scoring at least `tau`; when none does, the
/// highest-scoring one. Ties fall to the earlier entry.
pub fn select(
    band: Band,
    lod: u8,
    policy: &PolicyTable,
    catalog: &AssetCatalog,
) -> Result<AssetKey, PolicyError> {
    let entries = policy.entries(band, lod)?;
    let mut best: Option<(u64, Representation)> = None;
    for &(rep, score) in entries {
        if score >= policy.tau {
            let size = catalog.size(rep, lod)?;
            if best.map_or(true, |(b, _)| size < b) {
                best = Some((size, rep));
            }
        }
    }
    if let Some((_, rep)) = best {
        return Ok((rep, lod));
    }
    let mut top = entries[0];
    for &e in &entries[1..] {
        if e.1 > top.1 {
            top = e;
        }
    }
    Ok((top.0, lod))
}

/// Band to requested LoD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LodRule {
    pub by_band: [u8; 5],
}

impl Default for LodRule {
    fn default() -> Self {
        Self { by_band: [0, 1, 2, 3, 3] }
    }
}

impl LodRule {
    pub fn lod_for(&self, band: Band) -> u8 {
        self.by_band[band.index()]
    }

    pub fn lod_of(&self, footprint_ratio: f64) -> Result<u8, PolicyError> {
        band_of(footprint_ratio).map(|b| self.lod_for(b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentView {
    pub id: String,
    pub footprint_ratio: f64,
}

impl AgentView {
    pub fn new(id: impl Into<String>, footprint_ratio: f64) -> Self {
        Self {
            id: id.into(),
            footprint_ratio,
        }
    }
}

/// Parse `id,footprint_ratio` lines; a header line and `#` comments are
/// skipped.
pub fn parse_agents(text: &str) -> Result<Vec<AgentView>, PolicyError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: String| PolicyError::Agents { line: i + 1, reason };
        let (id, ratio) = line
            .split_once(',')
            .ok_or_else(|| err("expected id,footprint_ratio".into()))?;
        let ratio = ratio.trim();
        match ratio.parse::<f64>() {
            Ok(r) => out.push(AgentView::new(id.trim(), r)),
            Err(_) if out.is_empty() && i == 0 => {}
            Err(_) => return Err(err(format!("bad footprint ratio {ratio:?}"))),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MemoryReport {
    /// Distinct-asset bytes per representation.
    pub per_representation: BTreeMap<Representation, u64>,
    /// Each `(representation, lod)` counted once.
    pub distinct_total: u64,
    /// Every instance counted.
    pub per_instance_total: u64,
    /// Instance count per distinct asset.
    pub instances: BTreeMap<String, usize>,
}

pub fn memory_report(assignment: &[AssetKey], catalog: &AssetCatalog) -> Result<MemoryReport, PolicyError> {
    let mut r = MemoryReport::default();
    let mut counts: BTreeMap<AssetKey, usize> = BTreeMap::new();
    for &k in assignment {
        *counts.entry(k).or_default() += 1;
    }
    for (&(rep, lod), &n) in &counts {
        let size = catalog.size(rep, lod)?;
        *r.per_representation.entry(rep).or_default() += size;
        r.distinct_total += size;
        r.per_instance_total += size * n as u64;
        r.instances.insert(format!("{} L{lod}", rep.key()), n);
    }
    Ok(r)
}

impl MemoryReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (rep, b) in &self.per_representation {
            s.push_str(&format!("{rep:<10} {:>12} B  ({})\n", b, format_bytes(*b)));
        }
        s.push_str(&format!(
            "distinct   {:>12} B  ({})\ninstances  {:>12} B  ({})\n",
            self.distinct_total,
            format_bytes(self.distinct_total),
            self.per_instance_total,
            format_bytes(self.per_instance_total)
        ));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentAssignment {
    pub id: String,
    pub footprint_ratio: f64,
    pub band: Band,
    pub requested_lod: u8,
    pub representation: Representation,
    pub lod: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// In input order.
    pub assignments: Vec<AgentAssignment>,
    pub report: MemoryReport,
    /// Still above budget after every agent reached the cheapest asset.
    pub overflow: bool,
}

impl Schedule {
    pub fn keys(&self) -> Vec<AssetKey> {
        self.assignments.iter().map(|a| (a.representation, a.lod)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,footprint_ratio,band,requested_lod,representation,lod\n");
        for a in &self.assignments {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                a.id,
                a.footprint_ratio,
                a.band,
                a.requested_lod,
                a.representation.key(),
                a.lod
            ));
        }
        s
    }
}

fn distinct_total(keys: &[AssetKey], catalog: &AssetCatalog) -> u64 {
    keys.iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|&(r, l)| catalog.sizes[&(r, l)])
        .sum()
}

/// Next rung below `current` for an agent in `band`: the largest strictly
/// cheaper asset the policy accepts there, else the best-scoring cheaper
/// one.
fn step_down(current: AssetKey, band: Band, policy: &PolicyTable, catalog: &AssetCatalog) -> Option<AssetKey> {
    let here = catalog.rank(current);
    let cheaper: Vec<AssetKey> = catalog
        .assets()
        .map(|(k, _)| k)
        .filter(|&k| catalog.rank(k) < here)
        .collect();
    let score = |k: AssetKey| policy.score(band, k.1, k.0);
    let qualifying = cheaper.iter().copied().filter(|&k| score(k) >= policy.tau);
    if let Some(k) = qualifying.max_by_key(|&k| catalog.rank(k)) {
        return Some(k);
    }
    cheaper
        .into_iter()
        .max_by(|&a, &b| score(a).total_cmp(&score(b)).then(catalog.rank(a).cmp(&catalog.rank(b))))
}

/// Assign every agent via banding, the LoD rule and [`select`]; then, while
/// the distinct-asset total exceeds `budget`, walk agents from the farthest
/// (smallest footprint, then id) down their ladders of cheaper assets.
///
/// Every ladder ends at the single cheapest catalog asset, so `overflow`
/// is only reported when no assignment at all fits the budget.
pub fn schedule_crowd(
    agents: &[AgentView],
    policy: &PolicyTable,
    catalog: &AssetCatalog,
    lod_rule: &LodRule,
    budget: Option<u64>,
) -> Result<Schedule, PolicyError> {
    if agents.is_empty() {
        return Err(PolicyError::NoAgents);
    }
    let mut ids = HashSet::new();
    for a in agents {
        if !ids.insert(a.id.as_str()) {
            return Err(PolicyError::DuplicateAgent(a.id.clone()));
        }
    }
    let mut assignments = agents
        .iter()
        .map(|a| {
            let band = band_of(a.footprint_ratio)?;
            let lod = lod_rule.lod_for(band);
            let (rep, asset_lod) = select(band, lod, policy, catalog)?;
            Ok(AgentAssignment {
                id: a.id.clone(),
                footprint_ratio: a.footprint_ratio,
                band,
                requested_lod: lod,
                representation: rep,
                lod: asset_lod,
            })
        })
        .collect::<Result<Vec<_>, PolicyError>>()?;

    let mut overflow = false;
    if let Some(budget) = budget {
        let mut keys: Vec<AssetKey> = assignments.iter().map(|a| (a.representation, a.lod)).collect();
        let mut order: Vec<usize> = (0..agents.len()).collect();
        order.sort_by(|&a, &b| {
            agents[a]
                .footprint_ratio
                .total_cmp(&agents[b].footprint_ratio)
                .then_with(|| agents[a].id.cmp(&agents[b].id))
        });
        let mut total = distinct_total(&keys, catalog);
        'relief: for &i in &order {
            while total > budget {
                match step_down(keys[i], assignments[i].band, policy, catalog) {
                    Some(k) => {
                        keys[i] = k;
                        total = distinct_total(&keys, catalog);
                    }
                    None => continue 'relief,
                }
            }
            break;
        }
        overflow = total > budget;
        for (a, (rep, lod)) in assignments.iter_mut().zip(keys) {
            a.representation = rep;
            a.lod = lod;
        }
        if overflow {
            log::warn!("budget of {budget} B cannot be met; distinct total is {total} B");
        }
    }
    let keys: Vec<AssetKey> = assignments.iter().map(|a| (a.representation, a.lod)).collect();
    let report = memory_report(&keys, catalog)?;
    Ok(Schedule {
        assignments,
        report,
        overflow,
    })
}
