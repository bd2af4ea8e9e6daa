use thiserror::Error;
use tfim_core::ModelError;

#[derive(Debug, Error)]
pub enum SseError {
    #[error("invalid QMC setup: {0}")]
    InvalidSetup(String),
    #[error("operator-string cutoff would exceed {0} slots")]
    CutoffOverflow(usize),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, SseError>;
