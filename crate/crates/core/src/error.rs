use alloc::string::String;

use crate::scale::Scale;

pub type Result<T, E = CoarseError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoarseError {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("point {point} out of range for space of {len} points")]
    UnknownPoint { point: usize, len: usize },
    #[error("block {block} out of range ({count} blocks)")]
    UnknownBlock { block: usize, count: usize },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("map is not measurable: source block {block} is split across target blocks")]
    NotMeasurable { block: usize },
    #[error("map is not total: {0}")]
    InvalidMap(String),
    #[error("dimension vector has {got} entries, space has {expected} blocks")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain of rank {kappa} is empty")]
    EmptyDomain { kappa: usize },
    #[error("invalid approximation parameters: {0}")]
    InvalidParams(String),
    #[error("precondition failed: {side} subordination is {scale}")]
    Precondition { side: &'static str, scale: Scale },
    #[error("operator is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("operator is numerically singular (condition {condition:e})")]
    Singular { condition: f64 },
    #[error("module has no image under the functor")]
    MissingObject,
    #[error("conflicting images for the same source module")]
    ConflictingImage,
    #[error("empty schedule")]
    EmptySchedule,
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}
