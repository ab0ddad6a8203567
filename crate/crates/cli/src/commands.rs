use std::fs;
use std::path::{Path, PathBuf};

use crowd_lod::imaging::load_png_sequence;
use crowd_lod::impostor::{bake_lod_chain, save_atlas, BakeOptions, StabilizeOptions};
use crowd_lod::mesh_lod::{decimate_with_report, mesh_stats, read_obj, write_obj};
use crowd_lod::metrics::{compare_sequences, parse_lpips_scores, SsimParams};
use crowd_lod::nerf_config::{emit_config, hash_capacity, preset};
use crowd_lod::policy::{
    parse_agents, parse_bytes, schedule_crowd, AssetCatalog, LodRule, PolicyTable,
};
use crowd_lod::splat_lod::{estimate_size, lod_chain, read_ply, write_ply, Importance};
use crowd_lod::study_stats::{analyze, lr_rows_to_csv, lr_rows_to_text, parse_trials, proportions_to_csv};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::{pipeline, Command};

/// One file written by a generator.
#[derive(Debug, Clone)]
pub struct Emitted {
    pub kind: &'static str,
    pub lod: u8,
    pub path: PathBuf,
    pub params: Value,
}

pub fn require(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.to_path_buf()))
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(path, contents).map_err(CliError::io(path))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    require(path)?;
    fs::read_to_string(path).map_err(CliError::io(path))
}

pub struct ImpostorArgs {
    pub sizes: Vec<u32>,
    pub cols: u32,
    pub rows: u32,
    pub alpha_threshold: u8,
    pub margin: u32,
}

pub fn bake_impostors(frames_dir: &Path, args: &ImpostorArgs, out: &Path) -> Result<Vec<Emitted>, CliError> {
    require(frames_dir)?;
    let frames = load_png_sequence(frames_dir)?;
    log::info!("loaded {} frames from {}", frames.len(), frames_dir.display());
    let opts = BakeOptions {
        cols: args.cols,
        rows: args.rows,
        stabilize: StabilizeOptions {
            alpha_threshold: args.alpha_threshold,
            margin: args.margin,
        },
    };
    let atlases = bake_lod_chain(&frames, &args.sizes, &opts)?;
    let mut emitted = Vec::new();
    for atlas in &atlases {
        let (png, meta) = save_atlas(atlas, out, &format!("impostor_L{}", atlas.lod_level))?;
        let st = atlas.stabilization.expect("baked atlases carry stabilization");
        let params = json!({
            "tile_size": atlas.tile_size,
            "cols": atlas.cols,
            "rows": atlas.rows,
            "frame_count": atlas.frame_count,
            "width": atlas.image.width(),
            "height": atlas.image.height(),
            "global_scale": st.global_scale,
        });
        emitted.push(Emitted { kind: "impostor", lod: atlas.lod_level, path: png, params });
        emitted.push(Emitted {
            kind: "impostor-metadata",
            lod: atlas.lod_level,
            path: meta,
            params: json!({}),
        });
    }
    Ok(emitted)
}

pub fn decimate_mesh(input: &Path, ratios: &[f64], out: &Path) -> Result<Vec<Emitted>, CliError> {
    require(input)?;
    if ratios.is_empty() {
        return Err(CliError::Usage("at least one ratio is required".into()));
    }
    let mesh = read_obj(input)?;
    create_dir(out)?;
    let mut emitted = Vec::new();
    for (lod, &ratio) in ratios.iter().enumerate() {
        let (m, report) = decimate_with_report(&mesh, ratio)?;
        let stats = mesh_stats(&m);
        log::info!("LoD {lod}: ratio {ratio} -> {} faces", m.face_count());
        let path = out.join(format!("mesh_L{lod}.obj"));
        write_obj(&m, &path)?;
        emitted.push(Emitted {
            kind: "mesh",
            lod: lod as u8,
            path,
            params: json!({
                "ratio": ratio,
                "faces": m.face_count(),
                "vertices": m.vertices().len(),
                "collapses": report.collapses,
                "quadric_error": report.total_error,
                "boundary_edges": stats.boundary_edges,
            }),
        });
    }
    Ok(emitted)
}

pub struct SplatArgs {
    pub caps: Vec<usize>,
    pub alpha_min: f64,
    pub importance: Importance,
}

pub fn prune_splats(input: &Path, args: &SplatArgs, out: &Path) -> Result<Vec<Emitted>, CliError> {
    require(input)?;
    let cloud = read_ply(input)?;
    log::info!("loaded {} splats of SH degree {}", cloud.len(), cloud.sh_degree());
    let chain = lod_chain(&cloud, &args.caps, args.alpha_min, args.importance)?;
    create_dir(out)?;
    let mut emitted = Vec::new();
    for (lod, (level, &cap)) in chain.iter().zip(&args.caps).enumerate() {
        let path = out.join(format!("splats_L{lod}.ply"));
        write_ply(level, &path)?;
        emitted.push(Emitted {
            kind: "splats",
            lod: lod as u8,
            path,
            params: json!({
                "cap": cap,
                "count": level.len(),
                "sh_degree": level.sh_degree(),
                "alpha_min": args.alpha_min,
                "importance": args.importance,
                "estimated_bytes": estimate_size(level.len(), level.sh_degree()),
            }),
        });
    }
    Ok(emitted)
}

pub fn emit_nerf(lod: u8, path: &Path) -> Result<Emitted, CliError> {
    let p = preset(lod)?;
    write(path, emit_config(&p))?;
    Ok(Emitted {
        kind: "nerf-config",
        lod,
        path: path.to_path_buf(),
        params: json!({
            "log2_hashmap_size": p.log2_hashmap_size,
            "hash_capacity": hash_capacity(&p),
            "density_neurons": p.density_neurons,
            "sh_degree": p.sh_degree,
            "rgb_neurons": p.rgb_neurons,
            "rgb_layers": p.rgb_layers,
        }),
    })
}

pub struct ScheduleArgs<'a> {
    pub agents: &'a Path,
    pub policy: Option<&'a Path>,
    pub catalog: Option<&'a Path>,
    pub budget: Option<&'a str>,
    pub lod_rule: LodRule,
}

/// Returns the schedule CSV and the memory report text.
pub fn schedule(args: &ScheduleArgs) -> Result<(String, String), CliError> {
    let agents = parse_agents(&read_text(args.agents)?)?;
    let policy = match args.policy {
        Some(p) => {
            require(p)?;
            PolicyTable::load(p)?
        }
        None => PolicyTable::default_table(),
    };
    let catalog = match args.catalog {
        Some(p) => {
            require(p)?;
            AssetCatalog::load(p)?
        }
        None => AssetCatalog::default_catalog(),
    };
    let budget = match args.budget {
        None => None,
        Some(s) if s.eq_ignore_ascii_case("unlimited") => None,
        Some(s) => Some(parse_bytes(s).map_err(|e| CliError::Usage(e.to_string()))?),
    };
    let sched = schedule_crowd(&agents, &policy, &catalog, &args.lod_rule, budget)?;
    let mut report = sched.report.to_text();
    if let Some(b) = budget {
        report.push_str(&format!("budget     {b:>12} B\n"));
    }
    if sched.overflow {
        log::warn!("no assignment fits the budget; every agent was reduced to the cheapest asset");
        report.push_str("overflow: budget exceeded with every agent on the cheapest asset\n");
    }
    Ok((sched.to_csv(), report))
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::BakeImpostor { frames, sizes, cols, rows, alpha_threshold, margin, out } => {
            let args = ImpostorArgs { sizes, cols, rows, alpha_threshold, margin };
            for e in bake_impostors(&frames, &args, &out)? {
                println!("{}", e.path.display());
            }
        }
        Command::Decimate { input, ratios, out } => {
            for e in decimate_mesh(&input, &ratios, &out)? {
                println!("{}\t{} faces", e.path.display(), e.params["faces"]);
            }
        }
        Command::PruneSplats { input, caps, alpha_min, importance, out } => {
            let args = SplatArgs { caps, alpha_min, importance };
            for e in prune_splats(&input, &args, &out)? {
                println!("{}\t{} splats", e.path.display(), e.params["count"]);
            }
        }
        Command::EmitNerfConfig { lod, out } => match out {
            Some(path) => {
                emit_nerf(lod, &path)?;
            }
            None => print!("{}", emit_config(&preset(lod)?)),
        },
        Command::Metrics { candidate, reference, lpips, out } => {
            require(&candidate)?;
            require(&reference)?;
            let lpips = lpips.map(|p| read_text(&p)).transpose()?;
            let lpips = lpips.map(|t| parse_lpips_scores(&t)).transpose()?;
            let cand = load_png_sequence(&candidate)?;
            let refs = load_png_sequence(&reference)?;
            let report = compare_sequences(&cand, &refs, lpips.as_deref(), &SsimParams::default())?;
            write(&out.join("metrics.csv"), report.to_csv())?;
            write(&out.join("metrics.txt"), report.to_text())?;
            print!("{}", report.to_text());
        }
        Command::Schedule { agents, policy, catalog, budget, lod_rule, out } => {
            let by_band: [u8; 5] = lod_rule
                .try_into()
                .map_err(|_| CliError::Usage("--lod-rule needs five values".into()))?;
            if by_band.iter().any(|&l| l > 3) {
                return Err(CliError::Usage("--lod-rule values must be 0..=3".into()));
            }
            let args = ScheduleArgs {
                agents: &agents,
                policy: policy.as_deref(),
                catalog: catalog.as_deref(),
                budget: budget.as_deref(),
                lod_rule: LodRule { by_band },
            };
            let (csv, report) = schedule(&args)?;
            write(&out, csv)?;
            print!("{report}");
        }
        Command::Analyze { trials, out } => {
            let trials = parse_trials(&read_text(&trials)?)?;
            let a = analyze(&trials)?;
            write(&out.join("proportions.csv"), proportions_to_csv(&a.proportions))?;
            write(&out.join("anova.csv"), a.anova.to_csv())?;
            write(&out.join("anova.txt"), a.anova.to_text())?;
            print!("{}", a.anova.to_text());
            match a.lr {
                Ok(rows) => {
                    write(&out.join("lr_tests.csv"), lr_rows_to_csv(&rows))?;
                    write(&out.join("lr_tests.txt"), lr_rows_to_text(&rows))?;
                    print!("\n{}", lr_rows_to_text(&rows));
                }
                Err(e) => {
                    write(&out.join("lr_tests.txt"), format!("logit GLM not fitted: {e}\n"))?;
                    return Err(e.into());
                }
            }
        }
        Command::Pipeline { config, out } => pipeline::run(&config, out.as_deref())?,
    }
    Ok(())
}
