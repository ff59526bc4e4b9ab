//! Command-line front end for `diageff`.
//!
//! Every command prints a [`RunRecord`]: the command name, its full
//! effective configuration (including seeds and the parsed inputs), the
//! command output and the tool version. Running the same command on the same
//! inputs prints the same bytes.

pub mod commands;
pub mod input;

use serde::Serialize;
use serde_json::Value;

pub use commands::{run, Cli, Command};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub command: String,
    pub config: Value,
    pub outputs: Value,
    pub version: String,
}

pub fn version() -> String {
    format!("diageff {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] diageff::Error),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write output: {0}")]
    Write(std::io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 input error, 3 budget or convergence, 4 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        use diageff::Error as E;
        match self {
            CliError::Core(E::Budget(_) | E::Convergence(_)) => 3,
            CliError::Core(E::Internal(_)) => 4,
            _ => 2,
        }
    }
}
