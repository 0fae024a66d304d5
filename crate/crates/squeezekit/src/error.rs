//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(&'static str),

    #[error("mode index {mode_index} out of range 1..={num_modes}")]
    ModeIndexOutOfRange { mode_index: usize, num_modes: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("state is not normalized (norm = {norm})")]
    Unnormalized { norm: f64 },

    #[error("|alpha| = {alpha_abs} violates the normalizability bound |alpha| < 1")]
    NonNormalizable { alpha_abs: f64 },

    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),

    #[error("window {window} too large; must be at most {limit}")]
    WindowTooLarge { window: usize, limit: usize },

    #[error("matrix is not Hermitian (defect = {defect:.3e})")]
    NonHermitian { defect: f64 },

    #[error("operator is not square ({nrows}x{ncols})")]
    NonSquare { nrows: usize, ncols: usize },

    #[error("invalid keep set: {0}")]
    InvalidKeepSet(&'static str),

    #[error("constraint matrix would have {rows} rows, exceeding the budget of {budget}")]
    MemoryBudget { rows: usize, budget: usize },

    #[error("cutoff list must be strictly ascending with at least {min} entries")]
    InvalidCutoffList { min: usize },

    #[error("SVD did not converge")]
    SvdFailed,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
