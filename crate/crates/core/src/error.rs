use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("level truncation did not terminate below the hard cap of {cap} levels")]
    Truncation { cap: usize },

    #[error("cannot reduce an empty sample set")]
    EmptySamples,

    #[error("aggregate recursion did not converge after {iterations} iterations (last change {last_delta:e})")]
    NotConverged { iterations: usize, last_delta: f64 },

    #[error("malformed file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidConfig(_))
    }
}
