//! Command-line plumbing for the `forlap` binary: configuration checking,
//! CSV ingestion, differencing, the command runners and report writers.
//!
//! Everything the binary does is reachable from [`run`], so integration
//! tests drive the library directly.

pub mod config;
pub mod ingest;
pub mod preprocess;
pub mod report;
pub mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Command, RunConfig};
pub use ingest::{ingest_csv, ColumnSelector};
pub use preprocess::{difference, undifference, Differenced};
pub use report::signed_sqrt;
pub use run::{replay, run, Outcome};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "FORLAP_OUTPUT_DIR";

/// Exit status for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit status for an I/O or other unexpected failure.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for invalid configuration or input data.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a numerical stage failed.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("{path}: {detail}")]
    Input { path: PathBuf, detail: String },

    #[error(transparent)]
    Core(#[from] forlap::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Serialize(String),
}

impl CliError {
    pub fn config(problem: impl Into<String>) -> Self {
        CliError::Config(vec![problem.into()])
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => EXIT_CONFIG,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Serialize(_) => EXIT_FAILURE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
