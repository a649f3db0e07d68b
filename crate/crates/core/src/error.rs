//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Problem dimensions violate `1 <= q <= n`, `p >= 1`.
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    /// A scalar argument is outside the domain of the formula it feeds.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    /// Exhaustive enumeration would exceed the configured hypothesis cap.
    #[error("combinatorial budget exceeded: {count} hypotheses, cap is {cap}")]
    BudgetExceeded { count: u128, cap: u128 },

    /// The log-determinant of a Monte Carlo trial was not finite.
    #[error("non-finite log-determinant in trial {trial}")]
    NonFiniteDeterminant { trial: u64 },

    #[error("quadrature did not reach tolerance {requested:e}: achieved error estimate {achieved:e}")]
    Quadrature { requested: f64, achieved: f64 },

    /// Bisection endpoints do not bracket the target.
    #[error("target {target} bits not bracketed on [{lo_db} dB, {hi_db} dB]: values {f_lo} .. {f_hi} bits")]
    NonBracketing {
        target: f64,
        lo_db: f64,
        hi_db: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable tag, used for the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDims(_) => "invalid_dims",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NonFiniteDeterminant { .. } => "non_finite_determinant",
            Error::Quadrature { .. } => "quadrature",
            Error::NonBracketing { .. } => "non_bracketing",
            Error::Io { .. } => "io",
        }
    }
}
