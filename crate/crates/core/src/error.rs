use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    /// Incompatible dimensions, orders, frames or indices.
    #[error("structural error: {0}")]
    Structural(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("singular constant term (condition estimate {cond:.3e})")]
    Singular { cond: f64 },
    #[error("trajectory left the trust radius at t = {time:.6}")]
    TrustRadius { time: f64 },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;

pub(crate) fn structural(msg: impl Into<String>) -> GeomError {
    GeomError::Structural(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> GeomError {
    GeomError::Precondition(msg.into())
}
