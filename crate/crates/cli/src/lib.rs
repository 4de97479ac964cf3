//! Experiment harness for the hybrid LiFi/WiFi association simulator:
//! config loading, solver comparison runs, sweeps, and CSV/checkpoint IO.

pub mod checkpoint;
pub mod config_file;
pub mod runner;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config_file::{load_config, parse_config};
pub use runner::{
    config_hash, export_run, resolve_output_dir, run_comparison, run_sweep, train_sppo,
    ComparisonRow, RunRecord, SweepAxis, SweepPoint, TrainedPolicy,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{what}: {source}")]
    Io {
        what: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config error: {detail}")]
    ConfigParse { detail: String },
    #[error(transparent)]
    ConfigInvalid(#[from] liwa_core::ConfigError),
    #[error(transparent)]
    Env(#[from] liwa_core::EnvError),
    #[error(transparent)]
    Rl(#[from] liwa_core::rl::RlError),
    #[error("checkpoint error: {detail}")]
    Checkpoint { detail: String },
    #[error("csv error writing {what}: {detail}")]
    Csv { what: String, detail: String },
    #[error("invalid argument: {detail}")]
    InvalidArgument { detail: String },
    #[error("internal error: {detail}")]
    Internal { detail: String },
}

impl CliError {
    /// Short machine-readable error category for the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::ConfigParse { .. } => "config_parse",
            CliError::ConfigInvalid(_) => "config_invalid",
            CliError::Env(_) => "environment",
            CliError::Rl(_) => "training",
            CliError::Checkpoint { .. } => "checkpoint",
            CliError::Csv { .. } => "csv",
            CliError::InvalidArgument { .. } => "invalid_argument",
            CliError::Internal { .. } => "internal",
        }
    }
}
