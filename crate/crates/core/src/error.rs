use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid stratified counts: {0}")]
    InvalidCounts(String),

    #[error("invalid pattern support: {0}")]
    InvalidSupport(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "threshold grid exhausted after {n_steps} steps (mu = {mu}); \
         increase n_steps or mu"
    )]
    GridExhausted { mu: f64, n_steps: usize },

    #[error("{what} too large for brute force: {value} exceeds limit {limit}")]
    BruteForceTooLarge {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("interval [{tau}, {tau}+{ell}) out of bounds for sequence length {len}")]
    IntervalOutOfBounds { tau: usize, ell: usize, len: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("infeasible joint distribution: cell {cell:03b} has probability {probability}")]
    InfeasibleDistribution { cell: u8, probability: f64 },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("category {0} empty (covariate values must be contiguous from 0)")]
    EmptyCategory(usize),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
