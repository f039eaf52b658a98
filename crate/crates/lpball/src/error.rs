use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative special-function evaluation failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// The operation is defined but not supported at these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An exponent fit had fewer than two admissible grid points.
    /// Carries the per-point table so callers can report what was excluded.
    #[error("insufficient data for exponent fit: {admissible} admissible of {} points", table.len())]
    InsufficientData {
        admissible: usize,
        table: Vec<crate::estimator::FitPoint>,
    },

    /// A configuration file or flag set failed validation.
    #[error("config error ({location}): {message}")]
    Config { location: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
