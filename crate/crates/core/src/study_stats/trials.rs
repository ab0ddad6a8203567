//! Forced-choice trial records, per-cell selection proportions and the
//! datasets the ANOVA and GLM are fitted to.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::design::{full_factorial, Dataset, Factor, Term};
use super::StatsError;
use crate::policy::{Band, Representation};

/// Study factors in the order used for terms: subject fixed effect first,
/// then the four-way factorial.
pub const FACTOR_NAMES: [&str; 5] = ["Subject", "Representation", "Distance", "LoD", "Mode"];

/// Representation levels in study order (G, I, M, N).
pub const REPRESENTATION_LEVELS: [Representation; 4] = [
    Representation::Gaussian,
    Representation::Impostor,
    Representation::Mesh,
    Representation::Nerf,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Mode {
    Image,
    Video,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Image => "Image",
            Mode::Video => "Video",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "image" => Ok(Mode::Image),
            "video" => Ok(Mode::Video),
            _ => Err(format!("unknown mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub subject: String,
    pub mode: Mode,
    pub distance: Band,
    pub lod: u8,
    pub chosen: Representation,
    pub repetition: u32,
}

type CellKey = (String, Mode, Band, u8);

impl TrialRecord {
    fn cell(&self) -> CellKey {
        (self.subject.clone(), self.mode, self.distance, self.lod)
    }
}

fn parse_lod(s: &str) -> Result<u8, String> {
    let t = s.trim();
    let d = t.strip_prefix(['L', 'l']).unwrap_or(t);
    match d.parse::<u8>() {
        Ok(l) if l <= 3 => Ok(l),
        _ => Err(format!("unknown LoD {s:?}")),
    }
}

/// Parse the comma-separated trial file with header
/// `subject,mode,distance,lod,chosen,repetition` (columns in any order).
pub fn parse_trials(text: &str) -> Result<Vec<TrialRecord>, StatsError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(StatsError::Empty)?;
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_ascii_lowercase()).collect();
    let idx = |name: &str| {
        cols.iter().position(|c| c == name).ok_or_else(|| StatsError::Trials {
            line: 1,
            reason: format!("missing column {name}"),
        })
    };
    let [subject, mode, distance, lod, chosen, repetition] =
        ["subject", "mode", "distance", "lod", "chosen", "repetition"].map(idx);
    let (subject, mode, distance, lod, chosen, repetition) = (subject?, mode?, distance?, lod?, chosen?, repetition?);

    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in lines {
        let err = |reason: String| StatsError::Trials { line: i + 1, reason };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != cols.len() {
            return Err(err(format!("expected {} fields, found {}", cols.len(), f.len())));
        }
        let rec = TrialRecord {
            subject: f[subject].to_string(),
            mode: f[mode].parse().map_err(err)?,
            distance: f[distance].parse().map_err(err)?,
            lod: parse_lod(f[lod]).map_err(err)?,
            chosen: f[chosen].parse().map_err(err)?,
            repetition: f[repetition]
                .parse()
                .map_err(|_| err(format!("bad repetition {:?}", f[repetition])))?,
        };
        let key = (rec.cell(), rec.repetition);
        if !seen.insert(key) {
            return Err(err("duplicate (subject, mode, distance, lod, repetition)".into()));
        }
        out.push(rec);
    }
    if out.is_empty() {
        return Err(StatsError::Empty);
    }
    Ok(out)
}

pub fn trials_to_csv(trials: &[TrialRecord]) -> String {
    let mut s = String::from("subject,mode,distance,lod,chosen,repetition\n");
    for t in trials {
        s.push_str(&format!(
            "{},{},{},L{},{},{}\n",
            t.subject,
            t.mode,
            t.distance,
            t.lod,
            t.chosen.code(),
            t.repetition
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionRow {
    pub subject: String,
    pub mode: Mode,
    pub distance: Band,
    pub lod: u8,
    pub representation: Representation,
    pub chosen: u32,
    pub repetitions: u32,
    pub proportion: f64,
}

/// Share of repetitions choosing each representation, for every observed
/// subject × condition cell. Each cell yields one row per representation,
/// in G, I, M, N order.
pub fn selection_proportions(trials: &[TrialRecord]) -> Vec<ProportionRow> {
    let mut cells: BTreeMap<CellKey, [u32; 4]> = BTreeMap::new();
    for t in trials {
        let k = REPRESENTATION_LEVELS.iter().position(|&r| r == t.chosen).expect("representation");
        cells.entry(t.cell()).or_default()[k] += 1;
    }
    let mut out = Vec::with_capacity(cells.len() * 4);
    for ((subject, mode, distance, lod), counts) in cells {
        let total: u32 = counts.iter().sum();
        for (k, rep) in REPRESENTATION_LEVELS.iter().enumerate() {
            out.push(ProportionRow {
                subject: subject.clone(),
                mode,
                distance,
                lod,
                representation: *rep,
                chosen: counts[k],
                repetitions: total,
                proportion: counts[k] as f64 / total as f64,
            });
        }
    }
    out
}

pub fn proportions_to_csv(rows: &[ProportionRow]) -> String {
    let mut s = String::from("subject,mode,distance,lod,representation,chosen,repetitions,proportion\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},L{},{},{},{},{}\n",
            r.subject,
            r.mode,
            r.distance,
            r.lod,
            r.representation.code(),
            r.chosen,
            r.repetitions,
            r.proportion
        ));
    }
    s
}

/// Proportions as a dataset with factors in [`FACTOR_NAMES`] order, plus
/// the per-row success and trial counts for the binomial GLM.
pub fn study_dataset(rows: &[ProportionRow]) -> Result<(Dataset, Vec<f64>, Vec<f64>), StatsError> {
    if rows.is_empty() {
        return Err(StatsError::Empty);
    }
    let subject = Factor::from_labels(FACTOR_NAMES[0], &rows.iter().map(|r| r.subject.as_str()).collect::<Vec<_>>());
    let fixed = |name: &str, levels: Vec<String>, code: &dyn Fn(&ProportionRow) -> usize| {
        Factor::new(name, levels, rows.iter().map(code).collect())
    };
    let rep = fixed(
        FACTOR_NAMES[1],
        REPRESENTATION_LEVELS.iter().map(|r| r.code().to_string()).collect(),
        &|r| REPRESENTATION_LEVELS.iter().position(|&x| x == r.representation).expect("rep"),
    )?;
    let dist = fixed(
        FACTOR_NAMES[2],
        Band::ALL.iter().map(|b| b.to_string()).collect(),
        &|r| r.distance.index(),
    )?;
    let lod = fixed(FACTOR_NAMES[3], (0..4).map(|l| format!("L{l}")).collect(), &|r| r.lod as usize)?;
    let mode = fixed(
        FACTOR_NAMES[4],
        vec!["Image".into(), "Video".into()],
        &|r| r.mode as usize,
    )?;
    let data = Dataset::new(
        rows.iter().map(|r| r.proportion).collect(),
        vec![subject, rep, dist, lod, mode],
    )?;
    let successes = rows.iter().map(|r| r.chosen as f64).collect();
    let trials = rows.iter().map(|r| r.repetitions as f64).collect();
    Ok((data, successes, trials))
}

/// Subject fixed effect plus the full Representation × Distance × LoD ×
/// Mode factorial, with factors numbered as in [`study_dataset`].
pub fn study_terms() -> Vec<Term> {
    let mut terms = vec![Term::new(vec![0])];
    terms.extend(full_factorial(&[1, 2, 3, 4]));
    terms
}
