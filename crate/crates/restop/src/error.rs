//! Error types shared across the crate.

use thiserror::Error;

/// Anything that can go wrong while configuring or running an experiment.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input: malformed config, invalid parameter combination,
    /// unknown keys, missing files. Maps to process exit code 2.
    #[error("config: {0}")]
    Config(String),

    /// Numerical failure during a run: non-finite values, failed
    /// factorization, degenerate regression. Maps to process exit code 3.
    #[error("numerical: {0}")]
    Numerical(String),

    /// Estimated working-set size exceeds the configured cap.
    #[error("memory: {0}")]
    Memory(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Process exit code for the CLI: 2 for usage/config problems,
    /// 3 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numerical(_) | Error::Memory(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
