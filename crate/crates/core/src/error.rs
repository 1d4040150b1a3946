use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observed covariance block is singular (smallest eigenvalue {min_eigenvalue:e})")]
    SingularObservation { min_eigenvalue: f64 },

    #[error("matrix is numerically singular (|eigenvalue| = {min_abs_eigenvalue:e})")]
    NearSingular { min_abs_eigenvalue: f64 },

    #[error("bordered quadratic form vanishes (cusp locus, |b^T A^-1 b| = {value:e})")]
    CuspLike { value: f64 },

    #[error("degenerate draws exceeded budget: {discarded} of {draws}")]
    DiscardBudgetExceeded { discarded: u64, draws: u64 },

    #[error("covariance is not positive semidefinite (eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric is not positive definite at ({x}, {y})")]
    DegenerateMetric { x: f64, y: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
