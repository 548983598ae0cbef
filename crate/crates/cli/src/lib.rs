//! IO companion to `spikesim-core`: topology parsing, binary tensor and
//! spike-train formats, model/config JSON, trace CSV and the run
//! orchestration behind the `spikesim` binary.

pub mod formats;
pub mod runner;
pub mod topology;

use std::path::PathBuf;

/// Process exit codes: 0 ok, 2 usage, 3 file/format, 4 verification.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Topology(#[from] topology::TopologyError),
    #[error("{0}")]
    Core(#[from] spikesim_core::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. }
            | CliError::Format(_)
            | CliError::Topology(_)
            | CliError::Core(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
