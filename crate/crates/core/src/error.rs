use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum PcrError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("no eigengap at k = {k} (relative gap {gap:e})")]
    GapIsZero { k: usize, gap: f64 },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("factorization did not converge: {0}")]
    Convergence(String),

    #[error("iterative solver stopped after {iterations} iterations without reaching tolerance (ratio {ratio:e})")]
    NotConverged { iterations: usize, ratio: f64 },

    #[error("prerequisite not met: {0}")]
    Prerequisite(String),

    #[error("trial {index} failed: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<PcrError>,
    },
}

pub type Result<T> = std::result::Result<T, PcrError>;

pub(crate) fn dim_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PcrError::Dimension(msg.into()))
}

pub(crate) fn param_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(PcrError::InvalidParameter(msg.into()))
}
