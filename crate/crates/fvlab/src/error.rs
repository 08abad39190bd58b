use thiserror::Error;

#[derive(Debug, Error)]
pub enum FvError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error in `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("numerics inconclusive: {0}")]
    Undetermined(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("event cap of {cap} exceeded at t={time}")]
    EventCap { cap: usize, time: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FvError>;
