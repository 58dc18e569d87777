use std::io;

use thiserror::Error;

/// Errors produced by the engine, its loaders and writers.
#[derive(Debug, Error)]
pub enum KnnError {
    /// A parameter combination violates a documented constraint.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// The dataset itself is malformed (shape or non-finite values).
    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("vectors have different dimensions ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    /// A coordinate lies outside the domain of the selected distance function.
    #[error("vector {vector} coordinate {coord} has value {value}, outside the domain of {metric}")]
    Domain {
        metric: String,
        vector: usize,
        coord: usize,
        value: f32,
    },

    #[error("{metric} produced a non-finite distance between vectors {x} and {y}")]
    NonFiniteDistance { metric: String, x: usize, y: usize },

    #[error("distance function {0} is not symmetric")]
    Asymmetric(String),

    #[error("unknown distance function {0:?}")]
    UnknownDistance(String),

    /// Two lanes both produced a candidate for the same (row, index) pair.
    #[error("schedule violation: row {row} received neighbor {index} from more than one lane")]
    DuplicateNeighbor { row: usize, index: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl KnnError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        KnnError::Config(msg.into())
    }
}

pub type Result<T, E = KnnError> = std::result::Result<T, E>;
