#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for `dislab`: reads a TOML configuration, runs one
//! experiment and writes delimiter-separated tables, SVG plots, a JSON summary
//! and a `manifest.json` with SHA-256 digests of everything produced.

pub mod config;
pub mod experiments;
pub mod output;
pub mod svg;

use std::path::{Path, PathBuf};

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{run, Outcome};
pub use output::{Manifest, OutputDir};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] dislab::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit code: 2 for configuration errors, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Loads `path`, applies overrides and runs `experiment` on a dedicated thread pool.
pub fn run_file(experiment: Experiment, path: &Path, overrides: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(t) = overrides.threads {
        cfg.threads = Some(t);
    }
    let out = overrides
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
    run_config(experiment, &cfg, &out)
}

pub fn run_config(experiment: Experiment, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    pool.install(|| run(experiment, cfg, out))
}
