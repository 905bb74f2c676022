//! Normal-form coordinates near a nondegenerate critical point: the model
//! function, its Anosov flow, blow-down charts of the level sets, the
//! backward-flow extension across the stable sphere, and finite-difference
//! smoothness certification of these maps.

mod charts;
mod smoothness;

use thiserror::Error;

pub use charts::{
    anosov_cross_time, anosov_flow, backward_flow_extension, blowdown_minus, blowdown_plus, directions,
    extension_scale, integrate_to_level, model_f, tubular_lower, tubular_upper, unit_tolerance, BlowupChartPoint,
    ModelPoint,
};
pub use smoothness::{transition_curve, verify_smoothness, ChartTransition, SmoothnessReport, SmoothnessRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalModelError {
    #[error("blow-up parameter must be nonnegative, got {0}")]
    NegativeParameter(f64),
    #[error("{which} has norm {norm}, expected a unit vector")]
    NotUnit { which: &'static str, norm: f64 },
    #[error("flow line never crosses the lower level: x₋ = 0")]
    NonCrossing,
}
