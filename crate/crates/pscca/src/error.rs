use thiserror::Error;

/// Errors surfaced by the model, sampler, and harness operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular or non-positive-definite matrix: {0}")]
    Singular(String),

    #[error("sampler diagnostic: {0}")]
    Diagnostic(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
