use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Variants split into two families, see [`Error::is_numerical`]: input
/// validation problems, and numerical failures on otherwise valid input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("negative weight {w} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, w: f64 },

    #[error("vertex index {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },

    #[error("importance q[{index}] = {q} is below the floor q_min = {q_min}")]
    ImportanceBelowFloor { index: usize, q: f64, q_min: f64 },

    #[error("q_min must be positive, got {0}")]
    NonPositiveFloor(f64),

    #[error("expected {expected} importances, got {got}")]
    ImportanceLength { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),

    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("diagonal entry {index} must be positive, got {value}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),

    #[error("edge cost h = {h} for ({i}, {j}) is not positive; covariance is degenerate")]
    DegenerateEdgeCost { i: usize, j: usize, h: f64 },

    #[error("importance vector entry {index} must be positive, got {value}")]
    NonPositiveImportance { index: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("operation requires joint mode")]
    RequiresJointMode,

    #[error("matrix is not positive definite (pivot {pivot} at step {step})")]
    NotPositiveDefinite { step: usize, pivot: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (singular or indefinite matrices),
    /// false for rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
