use std::path::PathBuf;

use aidkit::protocol::{AuditError, ProtocolError, StationError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{0}")]
    Usage(String),
    #[error("missing artifact {}", .0.display())]
    Missing(PathBuf),
    #[error("{}: {reason}", path.display())]
    Corrupt { path: PathBuf, reason: String },
    #[error("{}: format version {found}, this build reads version {expected}", path.display())]
    Version {
        path: PathBuf,
        found: u8,
        expected: u8,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Station(#[from] StationError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl SimError {
    pub fn corrupt(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        SimError::Corrupt {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    /// Process exit status, one per failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Usage(_) => 2,
            SimError::Missing(_) => 3,
            SimError::Corrupt { .. } | SimError::Version { .. } => 4,
            SimError::Verification(_) => 5,
            _ => 1,
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
