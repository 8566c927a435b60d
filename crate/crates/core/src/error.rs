use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation too small: column {column} leaks {leakage:.3e} of its norm at dim {dim}; use a larger dimension")]
    Truncation { dim: usize, column: usize, leakage: f64 },

    #[error("quadrature did not converge up to order {order} (last change {change:.3e})")]
    Quadrature { order: usize, change: f64 },

    #[error("did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Option<Vec<f64>>,
    },

    #[error("phonon truncation cap {cap} reached; {leakage:.3e} of the mass sits in the top state")]
    TruncationCap { cap: usize, leakage: f64 },

    #[error("criterion fails already at zero added noise: no depth")]
    NoDepth,

    #[error("uninformative point: Fisher information is zero")]
    Uninformative,

    #[error("Fisher sum truncated at {trunc}: tail {tail:.3e} exceeds 1e-6 of F = {fisher:.3e}")]
    FisherTail { trunc: usize, tail: f64, fisher: f64 },

    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),

    #[error("grid too coarse: {0}")]
    GridResolution(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
