//! Driver for the `nvfem` binary: configuration, experiment commands and
//! text output.

pub mod app;
pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

pub use config::{Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] nvfem_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    /// The run finished but at least one solve did not converge.
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::NotConverged => 2,
        }
    }
}

/// Result of a completed command: its status and the table to show the user.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub outcome: Outcome,
    pub text: String,
    /// Solver failures that did not abort the run.
    pub warnings: Vec<String>,
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        Command::Converge => commands::cmd_converge(cfg),
        Command::Sweep => commands::cmd_sweep(cfg),
        Command::SolveLinear => commands::cmd_solve_linear(cfg),
        Command::MeshInfo => commands::cmd_mesh_info(cfg),
    }
}
