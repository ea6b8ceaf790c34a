use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ReachError>;

#[derive(Debug, Error)]
pub enum ReachError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at point {point}")]
    NonFinite { point: usize },

    #[error("point cloud has {found} points, at least {required} required")]
    TooFewPoints { found: usize, required: usize },

    #[error("empty point set")]
    Empty,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent pair: graph distance {graph} is shorter than chord {chord}")]
    InconsistentPair { chord: f64, graph: f64 },

    #[error("root finding did not converge within {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("degenerate neighborhood at point {point}: covariance rank below {dim}")]
    DegenerateNeighborhood { point: usize, dim: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error("model `{model}` has no {what}")]
    MissingOracle { model: String, what: &'static str },

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ReachError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ReachError::Io { path: path.into(), source }
    }
}
