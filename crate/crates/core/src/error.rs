use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator and the analysis passes.
#[derive(Debug, Error)]
pub enum NsvError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "capacity exceeded: requested {requested}, but the truncation only retains {available}"
    )]
    Capacity { requested: usize, available: usize },

    #[error("numerical divergence at t = {t}: {reason}")]
    Divergence { t: f64, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Machine-readable failure category, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    NumericalDivergence,
    Capacity,
    Io,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::NumericalDivergence => "numerical-divergence",
            ErrorCategory::Capacity => "capacity",
            ErrorCategory::Io => "io",
        }
    }

    /// 0 is reserved for success; capacity problems are reported as configuration failures.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config | ErrorCategory::Capacity => 1,
            ErrorCategory::NumericalDivergence => 2,
            ErrorCategory::Io => 3,
        }
    }
}

impl NsvError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            NsvError::InvalidInput(_) | NsvError::Unsupported(_) | NsvError::Config(_) => {
                ErrorCategory::Config
            }
            NsvError::Capacity { .. } => ErrorCategory::Capacity,
            NsvError::Divergence { .. } => ErrorCategory::NumericalDivergence,
            NsvError::Io { .. } => ErrorCategory::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NsvError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, NsvError>;
