use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pair ({u}, {v}) for a graph on {n} nodes")]
    InvalidPair { u: usize, v: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "matrix is not positive semidefinite (eigenvalue {eigenvalue:e}, largest {largest:e})"
    )]
    NotPsd { eigenvalue: f64, largest: f64 },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("sampled constraint set is empty")]
    EmptySample,

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("measurements are infeasible: {0}")]
    Infeasible(String),

    #[error("measurement graph is disconnected; node {node} is unreachable from node 0 ({component_size} nodes in its component)")]
    Incompletable { node: usize, component_size: usize },

    #[error("measurements are not consistent with a tree: {0}")]
    NotATree(String),

    #[error("restart probability 1 carries no information about the graph")]
    NoInformation,

    #[error("personalized PageRank matrix is inconsistent with an undirected graph: {0}")]
    InconsistentPpr(String),

    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: &std::path::Path, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
