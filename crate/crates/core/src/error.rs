use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("symmetric eigendecomposition failed: {0}")]
    Eigen(String),
    #[error("point lies on the boundary of the regularizer domain")]
    BoundaryPoint,
    #[error("state not initialized: {0}")]
    Uninitialized(&'static str),
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("payoff {value} outside [{low}, {high}]")]
    PayoffOutOfRange { value: f64, low: f64, high: f64 },
    #[error("chosen arm {0} had zero probability")]
    ZeroProbability(usize),
    #[error("exploration radius {delta} must be below the inradius {inradius}")]
    ExplorationTooLarge { delta: f64, inradius: f64 },
    #[error("rounds out of order: expected {expected}, got {actual}")]
    OutOfOrder { expected: usize, actual: usize },
    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),
    #[error("missing feedback: {0}")]
    MissingFeedback(&'static str),
    #[error("ledger: {0}")]
    Ledger(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

pub(crate) fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
