use thiserror::Error;

/// Errors raised by the linear-algebra, preconditioner, simulator and FEM layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("singular matrix: sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e}")]
    Singular { sigma_min: f64, sigma_max: f64 },

    #[error("matrix of dimension {dim} exceeds the dense reference cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("degenerate pipeline: {0}")]
    Degenerate(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
