use thiserror::Error;

use crate::pd::GramReport;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function being evaluated.
    #[error("domain error: {0}")]
    Domain(String),
    /// A structural parameter (degree, dimension, exponent) is out of range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Arguments that are individually valid but do not fit together,
    /// e.g. a complex-sphere index used with a real-sphere pair.
    #[error("usage error: {0}")]
    Usage(String),
    /// An iterative numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numeric(String),
    /// An exact integer result does not fit in 64 bits.
    #[error("overflow: {0}")]
    Overflow(String),
    /// Data that contradicts itself, e.g. a truncated expansion whose mass
    /// exceeds the total mass.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),
    /// A covariance matrix could not be factored even after jitter. The
    /// report carries the minimum eigenvalue and the tolerance it missed.
    #[error("indefinite covariance: minimum eigenvalue {:e} below -{:e}", report.min_eigenvalue, report.tolerance)]
    Indefinite { report: Box<GramReport> },
    #[error("serialization error: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serialization(err.to_string())
    }
}
