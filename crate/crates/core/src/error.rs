use std::path::PathBuf;

use crate::model::Species;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid value for `{name}`: {reason}")]
    Validation { name: String, reason: String },

    #[error("shape mismatch: expected {expected} cells, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("field {field} is not strictly positive at cell {cell} (value {value:e})")]
    NotPositive {
        field: String,
        cell: usize,
        value: f64,
    },

    #[error(
        "positivity failure: {species} would turn negative at cell {cell} even with dt = {dt:e}"
    )]
    PositivityFailure {
        species: Species,
        cell: usize,
        dt: f64,
    },

    #[error("integration stopped at t = {last_good_t}: {source}")]
    Integration {
        last_good_t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("malformed snapshot {path}: {reason}")]
    Snapshot { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
