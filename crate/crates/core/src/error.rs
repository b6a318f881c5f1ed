use thiserror::Error;

/// Errors produced by the basis, samplers, models and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A subsampling estimate exceeded its dominating rate.
    #[error(
        "bound violation for coordinate {coordinate} at clock {clock}: \
         estimated rate {estimate} exceeds bound {bound}"
    )]
    BoundViolation {
        coordinate: usize,
        clock: f64,
        estimate: f64,
        bound: f64,
    },

    /// A statistic is undefined because the input has zero variance.
    #[error("chain has zero variance")]
    ZeroVariance,

    /// The forward-simulation oracle never hit the target ball.
    #[error("no path accepted after {attempts} attempts (acceptance rate 0)")]
    NoAcceptance { attempts: usize },

    /// MALA encountered a non-finite energy or gradient.
    #[error("non-finite energy or gradient at iteration {0}")]
    NonFinite(usize),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(message: impl Into<String>) -> Result<T> {
    Err(Error::Domain(message.into()))
}
