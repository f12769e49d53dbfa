use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("missing derivative callback for multi-index {0:?}")]
    MissingDerivative(Vec<usize>),

    #[error("missing coefficient matrix for multi-index {0:?}")]
    MissingCoefficient(Vec<usize>),

    #[error("coefficient is not symmetric at x = {x:?}: off-diagonal {upper} vs {lower}")]
    NonSymmetricCoefficient { x: Vec<f64>, upper: f64, lower: f64 },

    #[error("solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    SolverNotConverged { residual: f64, iterations: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("collocation solve failed at node {node}: {source}")]
    NodeFailure {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("not enough admissible points for a rate fit ({got} < 3)")]
    TooFewPoints { got: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
