use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "penalty {lambda} outside the validity range of the bias bound (requires lambda < {limit})"
    )]
    PenaltyOutOfRange { lambda: f64, limit: f64 },

    #[error("gradient not finite at outer iteration {outer_k}, inner step {inner_n}")]
    NonFiniteGradient { outer_k: u64, inner_n: u64 },

    #[error("iterate diverged: |x| = {norm:.3e} at outer iteration {outer_k}, inner step {inner_n}")]
    NumericBlowup { outer_k: u64, inner_n: u64, norm: f64 },

    /// Dykstra ran out of sweeps. Carries the last iterate so callers can
    /// inspect how far the projection got.
    #[error("projection did not converge after {iterations} sweeps (max violation {violation:.3e})")]
    ProjectionDidNotConverge {
        iterations: usize,
        violation: f64,
        last: Vec<f64>,
    },

    #[error("iteration count overflows a 64-bit signed integer")]
    IterationOverflow,

    #[error("nonpositive value in a log-domain fit")]
    NonPositiveValue,

    #[error("not enough data: {0}")]
    NotEnoughData(String),

    #[error("rejection sampler acceptance rate below {rate:.2e}; use a tighter bounding box")]
    RejectionRateTooLow { rate: f64 },

    #[error("config error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
