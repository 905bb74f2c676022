//! Exact integer homological algebra: matrices over `Z`, Smith normal form,
//! chain complexes, homology with torsion, chain maps and mapping cones.
//!
//! Everything here is exact; no floating point is used.

mod complex;
mod cone;
pub mod format;
mod homology;
mod matrix;
mod snf;

use thiserror::Error;

pub use complex::{verify_complex, ChainComplex, DegreeViolation};
pub use cone::{mapping_cone, verify_les_exactness, ChainMap, LesDegree, LesReport};
pub use homology::{homology, normalize_torsion, HomologyGroup, HomologySummary};
pub use matrix::IntegerMatrix;
pub use snf::{smith_normal_form, SmithDecomposition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("shape mismatch in degree {degree}: {detail}")]
    Shape { degree: i64, detail: String },
    #[error("d² ≠ 0: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotAComplex(Vec<DegreeViolation>),
    #[error("map does not commute with differentials in source degrees {0:?}")]
    NotAChainMap(Vec<i64>),
    #[error("mapping cone needs a degree -1 map, got degree {0}")]
    WrongShift(i64),
}
