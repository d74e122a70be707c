use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scale matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("no observations")]
    EmptyObservations,

    #[error("weighted t estimate needs at least 2 observations, got {0}; use two_node_estimate")]
    TooFewObservations(usize),

    #[error("all observation weights are zero")]
    ZeroTotalWeight,

    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("graph is disconnected: components {0:?}")]
    Disconnected(Vec<Vec<usize>>),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("feature vector length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("infeasible scene: {0}")]
    InfeasibleScene(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NotPositiveDefinite => "not_positive_definite",
            Error::EmptyObservations => "empty_observations",
            Error::TooFewObservations(_) => "too_few_observations",
            Error::ZeroTotalWeight => "zero_total_weight",
            Error::IsolatedNode(_) => "isolated_node",
            Error::UnknownNode(_) => "unknown_node",
            Error::Disconnected(_) => "disconnected_graph",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InfeasibleScene(_) => "infeasible_scene",
            Error::Trial { source, .. } => source.kind(),
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
