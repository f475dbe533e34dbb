//! Crate-wide error type.

/// Alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes or widths that do not line up (vector lengths, matrix dims).
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An argument outside its documented domain (bad index, bad enum, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Text that could not be parsed, with a location when one is known.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A rejected experiment configuration, naming the violated constraint.
    #[error("config error: {0}")]
    Config(String),

    /// Training produced a non-finite loss or a broken kernel.
    #[error("training diverged: {0}")]
    Divergence(String),

    /// A referenced file (checkpoint, dataset, report) is absent.
    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
