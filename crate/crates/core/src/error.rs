use thiserror::Error;

/// Errors produced by the operator algebra and the solvers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected_h}x{expected_w}, got {got_h}x{got_w}")]
    DimensionMismatch {
        expected_h: usize,
        expected_w: usize,
        got_h: usize,
        got_w: usize,
    },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// The spectral image update hit a zero denominator; the update has no
    /// unique solution at that frequency.
    #[error("ill-posed image update: {0}")]
    IllPosed(String),

    /// Iterates left the finite range, which indicates a bad penalty weight.
    #[error("solver diverged (non-finite iterate at inner iteration {iter}); rho = {rho} is likely unstable")]
    Divergence { iter: usize, rho: f64 },

    /// The observation carries no usable gradient signal.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("instance too large for the reference solver: {got} pixels exceeds the {cap} pixel cap")]
    OracleSizeCap { got: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
