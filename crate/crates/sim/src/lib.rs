//! Command-line harness for the hybrid gate simulator: configuration files,
//! CSV output and parallel parameter sweeps on top of `hybridgate-core`.

pub mod commands;
pub mod config;
pub mod csv;

use std::path::PathBuf;

pub use commands::Command;
pub use config::{ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] hybridgate_core::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 0 success, 2 configuration, 3 numerical failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Output { .. } | CliError::Pool(_) => 1,
        }
    }
}

/// Runs `command` on a pool of `jobs` workers and returns the rendered CSV.
pub fn run(command: Command, config: &RunConfig, jobs: Option<usize>) -> Result<String, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let table = pool.install(|| commands::execute(command, config))?;
    Ok(table.render())
}
