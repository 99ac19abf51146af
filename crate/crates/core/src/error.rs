use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis dimension {dim} exceeds capacity {cap}")]
    Capacity { dim: u128, cap: usize },

    #[error("mode index {index} out of range for {d} modes")]
    ModeIndex { index: usize, d: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("sector mismatch: {0}")]
    Sector(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate Gram matrix (smallest eigenvalue {min_eig:e})")]
    Degenerate { min_eig: f64 },

    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("Krylov propagation did not converge: {0}")]
    Krylov(String),

    #[error("bound violated: {0}")]
    Bound(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("exact regime: {0}")]
    ExactRegime(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
