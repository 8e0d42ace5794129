//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shapes of inputs do not line up (selector length, group dimension, ...).
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A quadratic form came out non-positive; constant or rank-deficient
    /// data cannot enter the log statistics. `group` is 1-based.
    #[error("degenerate data in group {group}: {detail}")]
    Degenerate { group: usize, detail: String },

    /// A matrix expected to be positive definite failed its factorization.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A parse failure in an input file; `line` is 1-based.
    #[error("{path}: line {line}: {detail}")]
    Parse {
        path: String,
        line: usize,
        detail: String,
    },

    /// A Monte Carlo scenario description is inconsistent.
    #[error("invalid scenario: {0}")]
    Scenario(String),

    /// An error raised inside a Monte Carlo replication, tagged with its index.
    #[error("replication {rep}: {source}")]
    Replication {
        rep: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn in_replication(self, rep: u64) -> Error {
        Error::Replication {
            rep,
            source: Box::new(self),
        }
    }
}
