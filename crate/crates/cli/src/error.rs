use std::path::PathBuf;

use crowd_lod::imaging::ImagingError;
use crowd_lod::impostor::ImpostorError;
use crowd_lod::mesh_lod::MeshError;
use crowd_lod::metrics::MetricsError;
use crowd_lod::nerf_config::NerfConfigError;
use crowd_lod::policy::PolicyError;
use crowd_lod::splat_lod::SplatError;
use crowd_lod::study_stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input not found: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("{0}")]
    Usage(String),
    #[error("config {}: {reason}", path.display())]
    Config { path: PathBuf, reason: String },
    #[error(transparent)]
    Imaging(#[from] ImagingError),
    #[error(transparent)]
    Impostor(#[from] ImpostorError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Splat(#[from] SplatError),
    #[error(transparent)]
    Nerf(#[from] NerfConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad invocations and absent inputs, 1 for everything that
    /// failed while doing the work.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingInput(_) | CliError::Usage(_) | CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
