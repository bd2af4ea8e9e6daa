use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("Pfaffian needs an even dimension, got {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric")]
    NotAntisymmetric,
    #[error("invalid chain parameters: {0}")]
    InvalidInput(String),
    #[error("singular value decomposition failed: {0}")]
    Svd(String),
}

pub type Result<T> = std::result::Result<T, ChainError>;
