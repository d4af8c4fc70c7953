use thiserror::Error;

use crate::C64;

/// Failure modes shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input or configuration; maps to a usage error on the command line.
    #[error("configuration error: {0}")]
    Config(String),
    /// A documented resource cap (generator budget, expansion size) was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A caller broke a precondition of the operation.
    #[error("contract violation: {0}")]
    Contract(String),
    /// Evaluation hit a genuine pole of the formula.
    #[error("pole: {0}")]
    Pole(String),
    /// Successive quadrature orders disagreed beyond tolerance.
    #[error("no convergence in {context}: coarse {coarse}, fine {fine}")]
    NonConvergence {
        context: String,
        coarse: C64,
        fine: C64,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
