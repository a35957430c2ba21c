use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("singular pairing matrix (smallest singular value {0:e})")]
    SingularPairing(f64),

    #[error("kernel is missing block ({0}, {1})")]
    MissingBlock(String, String),

    #[error("not a morphism: {0}")]
    NotMorphism(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
