//! `crowd-lod`: bake level-of-detail assets, score them, schedule crowds and
//! analyze perceptual study data.

mod commands;
mod error;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Parser, Subcommand};
use crowd_lod::splat_lod::Importance;

use crate::error::CliError;

/// Thread count for data-parallel stages. Unset means one per core.
pub const THREADS_ENV: &str = "CROWD_LOD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "crowd-lod", version, about = "Level-of-detail asset pipeline for crowd rendering")]
pub struct Cli {
    /// Increase log detail (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bake a frame sequence into one stabilized sprite atlas per tile size.
    BakeImpostor {
        /// Directory of PNG frames, ordered by the number in each file name.
        #[arg(long)]
        frames: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = crowd_lod::impostor::DEFAULT_TILE_SIZES)]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = crowd_lod::impostor::DEFAULT_COLS)]
        cols: u32,
        #[arg(long, default_value_t = crowd_lod::impostor::DEFAULT_ROWS)]
        rows: u32,
        /// Pixels with alpha above this value count as content.
        #[arg(long, default_value_t = 0)]
        alpha_threshold: u8,
        /// Transparent border kept inside each tile, in tile pixels.
        #[arg(long, default_value_t = 0)]
        margin: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decimate an OBJ mesh to a chain of face-count ratios.
    Decimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.125])]
        ratios: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Prune a Gaussian splat PLY and cap it to a chain of splat counts.
    PruneSplats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = crowd_lod::splat_lod::DEFAULT_CAPS)]
        caps: Vec<usize>,
        #[arg(long, default_value_t = crowd_lod::splat_lod::DEFAULT_ALPHA_MIN)]
        alpha_min: f64,
        /// Ranking used by the caps: `opacity` or `opacity-volume`.
        #[arg(long, default_value = "opacity")]
        importance: Importance,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the trainer configuration for one radiance-field preset.
    EmitNerfConfig {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
        lod: u8,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score candidate frames against reference frames with PSNR and SSIM.
    Metrics {
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Externally computed `frame_index,lpips` scores to attach.
        #[arg(long)]
        lpips: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Choose a representation and LoD for every agent under a memory budget.
    Schedule {
        /// Comma-separated `id,footprint_ratio` rows.
        #[arg(long)]
        agents: PathBuf,
        /// Policy table; the built-in table when omitted.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Asset catalog; the built-in catalog when omitted.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Distinct-asset budget such as `64MB` or `48MiB`; unlimited when omitted.
        #[arg(long)]
        budget: Option<String>,
        /// Requested LoD for bands D0..D4.
        #[arg(long, value_delimiter = ',', num_args = 5, default_values_t = [0u8, 1, 2, 3, 3])]
        lod_rule: Vec<u8>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Selection proportions, Type II ANOVA and LR tests for trial data.
    Analyze {
        #[arg(long)]
        trials: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every asset generator from one TOML configuration and write a manifest.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding the configuration's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let verbose = match &cli.command {
        Command::Pipeline { config, .. } => cli.verbose.max(pipeline::config_verbosity(config)),
        _ => cli.verbose,
    };
    init_logging(verbose);
    match init_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crowd-lod: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
