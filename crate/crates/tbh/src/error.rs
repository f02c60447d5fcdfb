use std::path::PathBuf;

use crate::eigensolve::SolverError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const INTEGRITY: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] tbh_core::Error),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}: checksum mismatch (expected {expected}, found {found})")]
    Checksum {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model(_) | Self::Config(_) | Self::Json { .. } => exit::CONFIG,
            Self::Solver(_) => exit::SOLVER,
            Self::Checksum { .. } | Self::Format { .. } => exit::INTEGRITY,
            Self::Io { .. } => exit::CONFIG,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
