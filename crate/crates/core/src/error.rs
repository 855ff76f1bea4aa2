use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Geometry that violates a structural invariant (too few vertices,
    /// self-intersection, zero area, non-finite coordinates).
    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("point ({x}, {y}) lies outside the map bounds")]
    OutOfBounds { x: f64, y: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("{which} endpoint ({x}, {y}) cannot be connected to the roadmap")]
    UnreachableEndpoint { which: &'static str, x: f64, y: f64 },

    #[error("no path to goal: start component contains {component_size} of {node_count} nodes")]
    NoPath {
        component_size: usize,
        node_count: usize,
    },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("warm start is not finite at {0}")]
    WarmStartInvalid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input (files, parameters) rather than
    /// by the planner failing on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedInput(_)
                | Error::OutOfBounds { .. }
                | Error::Parameter(_)
                | Error::Config(_)
                | Error::Parse { .. }
                | Error::Io { .. }
        )
    }
}
