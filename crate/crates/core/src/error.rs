use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("invalid graph: missing self-loop at vertex {vertex}")]
    MissingSelfLoop { vertex: usize },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("capacity exceeded: {what} supports at most {limit} vertices, got {got}; {hint}")]
    Capacity {
        what: &'static str,
        limit: usize,
        got: usize,
        hint: &'static str,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error at line {line}: {msg}")]
    Data { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// bad input data, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::Capacity { .. } => 2,
            Error::Data { .. } | Error::Io { .. } | Error::Graph(_) | Error::MissingSelfLoop { .. } => 3,
            _ => 1,
        }
    }
}
