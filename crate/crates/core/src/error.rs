use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or schema-violating input. `field` names the offending entry.
    #[error("input error at {field}: {message}")]
    Input { field: String, message: String },

    #[error("geometry error: {message}")]
    Geometry { message: String },

    #[error("no path: {message}")]
    NoPath { message: String },

    #[error("invalid state: {0}")]
    State(String),

    #[error("value iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("no instance of '{0}' in the world")]
    NoInstance(String),

    #[error("simulation contract violation: {0}")]
    SimContract(String),

    #[error("inspect target unreachable: no free cell within {epsilon} m of ({x:.2}, {y:.2})")]
    InspectUnreachable { x: f64, y: f64, epsilon: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn input(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Input {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn geometry(message: impl Into<String>) -> Self {
        Error::Geometry {
            message: message.into(),
        }
    }

    pub fn no_path(message: impl Into<String>) -> Self {
        Error::NoPath {
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a JSON parse failure with its line/column context.
    pub(crate) fn json(path: &std::path::Path, err: serde_json::Error) -> Self {
        Error::input(
            format!("{}:{}:{}", path.display(), err.line(), err.column()),
            err.to_string(),
        )
    }

    /// True for errors caused by bad user input (CLI exit code 2).
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Input { .. } | Error::Geometry { .. } | Error::Io { .. })
    }
}
