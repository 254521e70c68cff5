use thiserror::Error;

/// Errors produced while loading graphs or evaluating indices.
#[derive(Debug, Error)]
pub enum Error {
    /// A record in an input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The input (or the result of preprocessing it) contains no usable graph.
    #[error("empty graph: {0}")]
    EmptyGraph(String),

    /// An operation was called outside its domain (bad arguments, unknown
    /// nodes, degenerate splits, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}
