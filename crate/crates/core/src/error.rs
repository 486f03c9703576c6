use thiserror::Error;

/// Errors raised by the line-graph inference routines.
#[derive(Debug, Error)]
pub enum RlgError {
    #[error("invalid vertex pair ({i}, {j}) for n = {n}")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("dense materialization refused: order {order} exceeds guard {guard}")]
    SizeGuard { order: usize, guard: usize },

    #[error("rank deficiency: {0}")]
    RankDeficient(String),

    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("intractable parameters: {0}")]
    Intractable(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl RlgError {
    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            RlgError::RankDeficient(_) | RlgError::NoConvergence { .. } | RlgError::Intractable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, RlgError>;
