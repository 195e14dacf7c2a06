use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum GsqgError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("singular kernel evaluation: {0}")]
    Singularity(String),

    /// Adaptive quadrature ran out of subdivisions before reaching the
    /// requested tolerance. The partial result and its error estimate are
    /// carried so callers can decide whether to accept them.
    #[error("quadrature did not converge: partial value {partial:?}, err_est {err_est}")]
    Convergence { partial: (f64, f64), err_est: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, GsqgError>;
