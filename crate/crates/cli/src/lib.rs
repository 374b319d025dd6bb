//! Config-driven experiment runner for inverse-QFT array thinning.
//!
//! Three experiments are supported: `validate` recovers a known layout,
//! `noise` sweeps input SNR over a known layout, and `assess` thins a
//! Dolph-Chebyshev reference across sidelobe levels and thresholds.

use std::path::PathBuf;

use qthin_core::metrics::MetricsError;
use qthin_core::pattern::PatternError;
use qthin_core::reference::ReferenceError;
use qthin_core::thinning::ThinningError;
use thiserror::Error;

pub mod config;
pub mod run;
pub mod speedup;

pub use config::ExperimentConfig;
pub use run::{run, run_assess, run_noise, run_validate, RunOutcome};
pub use speedup::{report_speedup, SpeedupReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Output(#[from] qthin_core::io::IoError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Thinning(#[from] ThinningError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
