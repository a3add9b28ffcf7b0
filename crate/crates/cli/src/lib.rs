//! Experiment driver: configs in, canonical JSON reports and manifests out.

pub mod canonical;
pub mod commands;
pub mod config;
pub mod error;
pub mod fixtures;
pub mod generate;
pub mod output;

pub use commands::{execute, Outcome};
pub use config::{Command, ExperimentConfig, Format, SpecSource};
pub use error::{CliError, Result};

/// Runs a config end to end and writes its outputs.
pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let outcome = execute(cfg)?;
    output::emit(cfg, &outcome)?;
    match outcome.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}
