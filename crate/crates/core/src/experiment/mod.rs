//! Experiment orchestration: configuration, seeded replications, CSV output.

pub mod config;
pub mod output;
pub mod runner;

use std::path::PathBuf;

pub use config::{ExperimentConfig, Mode};
pub use runner::{execute, Outcome, Results};

use crate::error::Result;
use crate::par::with_jobs;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Replaces the configured base seed.
    pub seed: Option<u64>,
    /// Worker threads for replications; `None` uses the default pool.
    pub jobs: Option<usize>,
}

/// Validates, runs and writes all outputs. Nothing is written if the
/// configuration is invalid.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<Outcome> {
    let mut config = config.clone();
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    config.validate()?;
    let outcome = with_jobs(opts.jobs, || execute(&config))??;
    output::write_outcome(&opts.out_dir, &outcome)?;
    Ok(outcome)
}
