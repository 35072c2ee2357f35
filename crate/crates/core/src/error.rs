//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("total dimension {0} exceeds cap {1}")]
    DimensionCap(usize, usize),

    #[error("non-finite parameter: {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("component {0} collapsed (no responsibility mass)")]
    SingularComponent(usize),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("bad dataset file: {0}")]
    BadDataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
