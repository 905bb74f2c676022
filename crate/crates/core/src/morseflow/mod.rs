//! Numerical Morse theory on closed surfaces in `R³`: critical points of a
//! function restricted to a regular level set, the negative gradient flow,
//! shooting for flow lines between critical points of adjacent index, their
//! orientation signs, and the resulting flow category.
//!
//! The projective plane is handled on its double cover, the unit sphere,
//! with lifts of critical points paired by the antipodal map. Every line is
//! recorded through the representative lift of its source, so each line
//! downstairs is found exactly once.
//!
//! Between points of adjacent index on a surface one of the two spheres
//! involved is a 0-sphere: the unstable one of a saddle, or the stable one of
//! the target saddle of a maximum. Lines are found by following the two
//! separatrices from that side through an intermediate regular level until
//! they enter the launch ball of a critical point.

mod assemble;
mod critical;
mod model;
mod pseudogradient;
mod shooting;
mod signs;

use nalgebra::Vector3;
use thiserror::Error;

pub use assemble::{
    assemble_flow_category, compute_flow_category, count_table, product_continuation, shooting_pairs,
    write_trajectories, MorseFlowOptions, MorsePipeline,
};
pub use critical::{find_critical_points, CriticalOptions, CriticalPoint, Lift, MorseData};
pub use model::{Constraint, ManifoldModel, MorseFunction, Symmetry, BUILTIN_NAMES, TORUS_TILT};
pub use pseudogradient::{build_pseudogradient, Pseudogradient, PseudogradientReport};
pub use shooting::{shoot_flow_lines, FlowLine, ShootingOptions};
pub use signs::assign_signs;

use crate::flowcat::FlowCatError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseFlowError {
    #[error("unknown model {0:?} (expected one of s2, torus, rp2)")]
    UnknownModel(String),
    #[error("no critical points found on {0}")]
    NoCriticalPoints(String),
    #[error("degenerate critical point at {position:?}: tangent Hessian eigenvalue {eigenvalue:e}")]
    Degenerate { position: Vector3<f64>, eigenvalue: f64 },
    #[error("critical point at {0:?} has no symmetric partner")]
    UnpairedLift(Vector3<f64>),
    #[error("pseudo-gradient does not descend at {position:?}: dF(X) = {rate:e}")]
    PseudoGradient { position: Vector3<f64>, rate: f64 },
    #[error("linearized flow at {point} deviates from the Hessian model by {error:e}")]
    Linearization { point: String, error: f64 },
    #[error("{from} -> {to}: indices do not differ by one, or the source index is not 1 or 2")]
    IndexGap { from: String, to: String },
    #[error("shooting {from} -> {to} exceeded its budget: {detail}")]
    ShootingBudget { from: String, to: String, detail: String },
    #[error("integration failed while shooting {from} -> {to}: {detail}")]
    Integration { from: String, to: String, detail: String },
    #[error("f fails to decrease along a trajectory {from} -> {to} near {position:?}")]
    Monotonicity { from: String, to: String, position: Vector3<f64> },
    #[error("cannot orient line {from} -> {to}: {detail}")]
    SignFrame { from: String, to: String, detail: String },
    #[error(transparent)]
    Category(#[from] FlowCatError),
}
