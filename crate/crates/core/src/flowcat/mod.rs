//! Classical graded flow categories with their Morse complex, synthetic
//! embedding dimensions, and the desuspended cellular CJS complex.

mod category;
mod dims;
pub mod format;

use thiserror::Error;

pub use category::{DSquaredViolation, GradedFlowCategory};
pub use dims::{
    cell_dimension, cjs_cellular_complex, desuspension, synthesize_embedding_dimensions, EmbeddingDimensions,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowCatError {
    #[error("duplicate point name {0:?}")]
    DuplicateName(String),
    #[error("no point with index {0}")]
    UnknownIndex(usize),
    #[error("count {from} -> {to} goes against the point order")]
    NotOrdered { from: String, to: String },
    #[error("count {from} -> {to} spans grading gap {gap}, expected 1")]
    GradingGap { from: String, to: String, gap: i64 },
    #[error("d² ≠ 0 at {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "))]
    DSquared(Vec<DSquaredViolation>),
    #[error("count {count} for {from} -> {to} is incompatible with {cardinality} flow lines")]
    Cardinality {
        from: String,
        to: String,
        count: i64,
        cardinality: u64,
    },
    #[error("stabilization constant {0} is below 2")]
    Stabilization(i64),
    #[error("invalid embedding dimensions: {0}")]
    Dimensions(String),
    #[error("cell of {point} lands in degree {degree}, grading is {grading}")]
    CellDimension { point: String, degree: i64, grading: i64 },
}
