use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("system of {n} spins exceeds the limit of {max} for this operation")]
    TooLarge { n: usize, max: usize },
    #[error("operator is not compatible with the symmetry group: {0}")]
    Symmetry(String),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
