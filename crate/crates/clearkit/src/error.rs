//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration: malformed device file, out-of-range setting, unknown key.
    #[error("configuration error: {0}")]
    Config(String),
    /// A function was called with an argument outside its domain.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A numerical procedure failed to produce a usable result
    /// (ill-conditioned solve, non-convergent fit, unstable integration).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Not enough usable data points for a fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 for configuration/usage problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) | Error::Io(_) | Error::Json(_) => 2,
            Error::Numerical(_) | Error::InsufficientData(_) => 3,
        }
    }
}
