use std::path::PathBuf;

use dlab_core::regime::RegimeError;
use thiserror::Error;

/// Process exit codes of the `dlab` binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// I/O and serialisation failures.
    pub const FAILURE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const NON_FINITE: i32 = 3;
    pub const ACCEPTANCE: i32 = 4;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}, key '{key}': {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },
    #[error("regime: {0}")]
    Regime(#[from] RegimeError),
    #[error(transparent)]
    Core(#[from] dlab_core::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("run failed ({source}); partial manifest at {}", manifest.display())]
    RunFailed {
        manifest: PathBuf,
        source: dlab_core::Error,
    },
    #[error("{suite}: acceptance check failed")]
    CheckFailed { suite: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(dlab_core::Error::NonFinite { .. })
            | HarnessError::RunFailed {
                source: dlab_core::Error::NonFinite { .. },
                ..
            } => exit::NON_FINITE,
            HarnessError::CheckFailed { .. } => exit::ACCEPTANCE,
            HarnessError::Io(_) | HarnessError::Json(_) | HarnessError::Csv(_) => exit::FAILURE,
            _ => exit::VALIDATION,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
