//! Error type shared by all pruning operations.

use crate::tensor::DType;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PruneError {
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),

    #[error("dtype mismatch: {0} vs {1}")]
    DtypeMismatch(DType, DType),

    #[error("invalid shape {0:?}: need at least one dimension, all extents >= 1")]
    InvalidShape(Vec<usize>),

    #[error("data length {got} does not match shape product {expected}")]
    DataLength { expected: usize, got: usize },

    #[error("dimension {dim} out of range for {ndim}-dimensional tensor")]
    DimOutOfRange { dim: isize, ndim: usize },

    #[error("channel {channel} out of range for extent {extent}")]
    ChannelOutOfRange { channel: usize, extent: usize },

    #[error("flat index {index} out of range for {len} elements")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("norm order must be a positive real or infinity, got {0}")]
    InvalidNormOrder(f64),

    #[error("fraction {0} outside [0, 1]")]
    FractionOutOfRange(f64),

    #[error("count {requested} exceeds the {available} unpruned candidates")]
    CountExceedsCandidates { requested: usize, available: usize },

    #[error("mask contains non-binary value {value} at flat index {index}")]
    NonBinaryMask { index: usize, value: f64 },

    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),

    #[error("parameter {0:?} is not reparametrized by pruning")]
    NotPruned(String),

    #[error("name {0:?} already exists in the store")]
    NameTaken(String),

    #[error("cannot reparametrize {name:?}: the store already holds a tensor named {taken:?}")]
    ReparamCollision { name: String, taken: String },

    #[error("method targets tensor {method:?} but the container governs {container:?}")]
    TensorNameMismatch { container: String, method: String },

    #[error("the container does not know how to combine masks for pruning type {0:?}")]
    UnsupportedPruningType(String),

    #[error("method {method} resurrected already-pruned entries (mask not monotone)")]
    NonMonotonicMask { method: String },

    #[error("global pruning needs at least one target parameter")]
    NoTargets,
}
