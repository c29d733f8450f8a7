//! Error types shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An iterative scheme failed to reach its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The fibering map has no critical point (coupling integral B <= 0).
    #[error("no maximizer: {0}")]
    NoMaximizer(String),

    /// State/parameter dimensions disagree or fields live on different grids.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A component has (numerically) zero mass where a positive mass is required.
    #[error("degenerate component {index}: mass below 1e-14")]
    DegenerateComponent { index: usize },

    /// Subset enumeration is capped at K = 20.
    #[error("K = {k} too large for subset enumeration (max {max})")]
    TooLargeK { k: usize, max: usize },

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable process exit code per error class (used by the CLI).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse(_) => 2,
            Error::InvalidParameter(_) => 3,
            Error::NoConvergence(_) => 4,
            Error::NoMaximizer(_) => 5,
            Error::DegenerateComponent { .. } => 6,
            Error::ShapeMismatch(_) => 7,
            Error::TooLargeK { .. } => 8,
            Error::Io(_) => 9,
        }
    }
}
