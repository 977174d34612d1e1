use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed valuation: {0}")]
    MalformedSpec(String),

    #[error("wrong valuation variant: expected {expected}, found {found}")]
    WrongVariant {
        expected: &'static str,
        found: &'static str,
    },

    #[error("valuation class {class} required: {detail}")]
    WrongClass { class: &'static str, detail: String },

    #[error("invalid instance (bidder {bidder}{}): {reason}", support.map(|k| format!(", support entry {k}")).unwrap_or_default())]
    InvalidInstance {
        bidder: usize,
        support: Option<usize>,
        reason: String,
    },

    #[error("invalid instance: {0}")]
    InvalidShape(String),

    #[error("infeasible allocation: {0}")]
    Infeasible(String),

    #[error("capacity exceeded for {what}: {size} > {limit}")]
    Capacity {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("score generator not aligned with instance: {0}")]
    Alignment(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn capacity(what: &'static str, size: u128, limit: u128) -> Self {
        Error::Capacity { what, size, limit }
    }

    /// True for errors caused by an enumeration exceeding its size cap.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    /// True for errors caused by invalid input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io { .. } | Error::Capacity { .. } | Error::Csv(_)
        )
    }
}
