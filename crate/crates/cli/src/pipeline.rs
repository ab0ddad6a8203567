//! One-shot asset bake driven by a TOML file.
//!
//! ```toml
//! output = "out"
//! verbose = 1
//!
//! [impostor]
//! frames = "frames"
//! sizes = [128, 64, 32, 16]
//!
//! [mesh]
//! input = "character.obj"
//! ratios = [1.0, 0.5, 0.25, 0.125]
//!
//! [splats]
//! input = "character.ply"
//! caps = [4000, 1000, 250, 64]
//!
//! [nerf]
//! lods = [0, 1, 2, 3]
//!
//! [schedule]
//! agents = "agents.csv"
//! budget = "64MB"
//! ```
//!
//! Relative paths resolve against the directory holding the file. Every
//! section is optional. The output directory receives one subdirectory per
//! generator, `manifest.json` and `footprint.txt`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crowd_lod::impostor::{DEFAULT_COLS, DEFAULT_ROWS};
use crowd_lod::policy::{format_bytes, LodRule};
use crowd_lod::splat_lod::{Importance, DEFAULT_ALPHA_MIN};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{self, Emitted, ImpostorArgs, ScheduleArgs, SplatArgs};
use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub output: PathBuf,
    #[serde(default)]
    pub verbose: u8,
    pub impostor: Option<ImpostorSection>,
    pub mesh: Option<MeshSection>,
    pub splats: Option<SplatSection>,
    pub nerf: Option<NerfSection>,
    pub schedule: Option<ScheduleSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpostorSection {
    pub frames: PathBuf,
    pub sizes: Vec<u32>,
    #[serde(default = "default_cols")]
    pub cols: u32,
    #[serde(default = "default_rows")]
    pub rows: u32,
    #[serde(default)]
    pub alpha_threshold: u8,
    #[serde(default)]
    pub margin: u32,
}

fn default_cols() -> u32 {
    DEFAULT_COLS
}

fn default_rows() -> u32 {
    DEFAULT_ROWS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub input: PathBuf,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplatSection {
    pub input: PathBuf,
    pub caps: Vec<usize>,
    #[serde(default = "default_alpha_min")]
    pub alpha_min: f64,
    #[serde(default)]
    pub importance: Importance,
}

fn default_alpha_min() -> f64 {
    DEFAULT_ALPHA_MIN
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NerfSection {
    pub lods: Vec<u8>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub agents: PathBuf,
    pub policy: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub budget: Option<String>,
    pub lod_rule: Option<[u8; 5]>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        commands::require(path)?;
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            reason: e.message().to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve(base);
        cfg.validate().map_err(|reason| CliError::Config {
            path: path.to_path_buf(),
            reason,
        })?;
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        if let Some(s) = &mut self.impostor {
            fix(&mut s.frames);
        }
        if let Some(s) = &mut self.mesh {
            fix(&mut s.input);
        }
        if let Some(s) = &mut self.splats {
            fix(&mut s.input);
        }
        if let Some(s) = &mut self.schedule {
            fix(&mut s.agents);
            s.policy.as_mut().map(fix);
            s.catalog.as_mut().map(fix);
        }
    }

    fn validate(&self) -> Result<(), String> {
        let nonempty = |name: &str, n: usize| {
            if n == 0 {
                Err(format!("{name} must not be empty"))
            } else {
                Ok(())
            }
        };
        if let Some(s) = &self.impostor {
            nonempty("impostor.sizes", s.sizes.len())?;
        }
        if let Some(s) = &self.mesh {
            nonempty("mesh.ratios", s.ratios.len())?;
        }
        if let Some(s) = &self.splats {
            nonempty("splats.caps", s.caps.len())?;
        }
        if let Some(s) = &self.nerf {
            nonempty("nerf.lods", s.lods.len())?;
        }
        Ok(())
    }

    /// Every input path the configuration names.
    pub fn inputs(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = Vec::new();
        if let Some(s) = &self.impostor {
            v.push(&s.frames);
        }
        if let Some(s) = &self.mesh {
            v.push(&s.input);
        }
        if let Some(s) = &self.splats {
            v.push(&s.input);
        }
        if let Some(s) = &self.schedule {
            v.push(&s.agents);
            v.extend(s.policy.as_deref());
            v.extend(s.catalog.as_deref());
        }
        v
    }
}

/// Verbosity named in a pipeline file, or 0 when it cannot be read.
pub fn config_verbosity(path: &Path) -> u8 {
    fs::read_to_string(path)
        .ok()
        .and_then(|t| toml::from_str::<PipelineConfig>(&t).ok())
        .map_or(0, |c| c.verbose)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub kind: String,
    pub lod: u8,
    /// Relative to the manifest.
    pub path: String,
    pub bytes: u64,
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub assets: Vec<ManifestEntry>,
}

fn entry(e: Emitted, root: &Path) -> Result<ManifestEntry, CliError> {
    let bytes = fs::metadata(&e.path).map_err(CliError::io(&e.path))?.len();
    let rel = e.path.strip_prefix(root).unwrap_or(&e.path);
    let path = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/");
    Ok(ManifestEntry {
        kind: e.kind.to_string(),
        lod: e.lod,
        path,
        bytes,
        params: e.params,
    })
}

/// Per-kind, per-LoD byte totals laid out like an asset footprint table.
pub fn footprint_report(manifest: &Manifest) -> String {
    const ROWS: [(&str, &[&str]); 4] = [
        ("Mesh", &["mesh"]),
        ("Impostor", &["impostor", "impostor-metadata"]),
        ("NeRF config", &["nerf-config"]),
        ("3DGS", &["splats"]),
    ];
    let mut totals: BTreeMap<(&str, u8), u64> = BTreeMap::new();
    let mut max_lod = 0;
    for a in &manifest.assets {
        if let Some((row, _)) = ROWS.iter().find(|(_, kinds)| kinds.contains(&a.kind.as_str())) {
            *totals.entry((row, a.lod)).or_default() += a.bytes;
            max_lod = max_lod.max(a.lod);
        }
    }
    let mut s = format!("{:<12}", "");
    for l in 0..=max_lod {
        let _ = write!(s, " {:>12}", format!("L{l}"));
    }
    s.push('\n');
    for (row, _) in ROWS {
        if !totals.keys().any(|(r, _)| *r == row) {
            continue;
        }
        let _ = write!(s, "{row:<12}");
        for l in 0..=max_lod {
            let cell = totals.get(&(row, l)).map_or("-".to_string(), |&b| format_bytes(b));
            let _ = write!(s, " {cell:>12}");
        }
        s.push('\n');
    }
    s
}

pub fn run(config_path: &Path, out_override: Option<&Path>) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::load(config_path)?;
    if let Some(out) = out_override {
        cfg.output = out.to_path_buf();
    }
    for input in cfg.inputs() {
        commands::require(input)?;
    }
    let root = cfg.output.clone();
    fs::create_dir_all(&root).map_err(CliError::io(&root))?;

    let mut emitted: Vec<Emitted> = Vec::new();
    if let Some(s) = &cfg.impostor {
        log::info!("baking impostors");
        let args = ImpostorArgs {
            sizes: s.sizes.clone(),
            cols: s.cols,
            rows: s.rows,
            alpha_threshold: s.alpha_threshold,
            margin: s.margin,
        };
        emitted.extend(commands::bake_impostors(&s.frames, &args, &root.join("impostor"))?);
    }
    if let Some(s) = &cfg.mesh {
        log::info!("decimating mesh");
        emitted.extend(commands::decimate_mesh(&s.input, &s.ratios, &root.join("mesh"))?);
    }
    if let Some(s) = &cfg.splats {
        log::info!("pruning splats");
        let args = SplatArgs {
            caps: s.caps.clone(),
            alpha_min: s.alpha_min,
            importance: s.importance,
        };
        emitted.extend(commands::prune_splats(&s.input, &args, &root.join("splats"))?);
    }
    if let Some(s) = &cfg.nerf {
        log::info!("emitting radiance-field configs");
        for &lod in &s.lods {
            let path = root.join("nerf").join(format!("nerf_L{lod}.json"));
            emitted.push(commands::emit_nerf(lod, &path)?);
        }
    }
    if let Some(s) = &cfg.schedule {
        log::info!("scheduling agents");
        let args = ScheduleArgs {
            agents: &s.agents,
            policy: s.policy.as_deref(),
            catalog: s.catalog.as_deref(),
            budget: s.budget.as_deref(),
            lod_rule: s.lod_rule.map(|by_band| LodRule { by_band }).unwrap_or_default(),
        };
        let (csv, report) = commands::schedule(&args)?;
        for (name, text) in [("schedule.csv", csv), ("schedule.txt", report)] {
            let path = root.join("schedule").join(name);
            fs::create_dir_all(path.parent().expect("has parent")).map_err(CliError::io(&root))?;
            fs::write(&path, text).map_err(CliError::io(&path))?;
            emitted.push(Emitted {
                kind: "schedule",
                lod: 0,
                path,
                params: Value::Null,
            });
        }
    }

    let manifest = Manifest {
        assets: emitted
            .into_iter()
            .map(|e| entry(e, &root))
            .collect::<Result<_, _>>()?,
    };
    let manifest_path = root.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")
        .map_err(CliError::io(&manifest_path))?;
    let footprint = footprint_report(&manifest);
    let footprint_path = root.join("footprint.txt");
    fs::write(&footprint_path, &footprint).map_err(CliError::io(&footprint_path))?;
    print!("{footprint}");
    println!("manifest: {}", manifest_path.display());
    Ok(())
}
