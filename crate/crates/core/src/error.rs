use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported reference: {0}")]
    UnsupportedReference(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("Jordan-Wigner mapping error: {0}")]
    Mapping(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid ansatz program: {0}")]
    Program(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
