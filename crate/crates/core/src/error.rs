use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric positive semidefinite: {0}")]
    NotPositiveSemidefinite(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("covariance is undefined (precision matrix is singular)")]
    UndefinedCovariance,

    #[error("index set is empty")]
    EmptyIndexSet,

    #[error("invalid index set: {0}")]
    InvalidIndices(String),

    #[error("possibility values are not normalized: {0}")]
    NotNormalized(String),

    #[error("mode lies on the grid boundary at flat index {0}")]
    BoundaryMode(usize),

    #[error("non-finite log-possibility next to the mode")]
    NonFiniteLog,

    #[error("observation is impossible under the prior support")]
    ImpossibleObservation,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration did not converge after {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("objective returned a non-finite value at {at}")]
    NonFiniteObjective { at: f64 },

    #[error("unlabeled pool is empty")]
    EmptyPool,
}

pub type Result<T> = std::result::Result<T, Error>;
