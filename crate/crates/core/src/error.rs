use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("line {line}: duplicate edge between {u} and {v}")]
    DuplicateEdge { line: usize, u: String, v: String },
    #[error("line {line}: self-loop on {node}")]
    SelfLoop { line: usize, node: String },
    #[error("line {line}: weight must be positive and finite, got {weight}")]
    NonPositiveWeight { line: usize, weight: f64 },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node id {0} out of range")]
    NodeOutOfRange(usize),
    #[error("at least {required} observers are required, got {got}")]
    TooFewObservers { required: usize, got: usize },
    #[error("duplicate observer {0}")]
    DuplicateObserver(usize),
    #[error("invalid budget k={k} for a graph with {n} nodes")]
    InvalidBudget { k: usize, n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("all distance vectors coincide; the resolution gap is undefined")]
    NoResolutionGap,
    #[error("enumeration of {combinations} subsets exceeds the cap of {cap}")]
    CapExceeded { combinations: u128, cap: u128 },
    #[error("prior sums to {0}, expected 1")]
    PriorNotNormalized(f64),
    #[error("no rows to write")]
    EmptyRows,
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
