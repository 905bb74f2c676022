//! Computational Morse theory: flow categories built numerically from
//! gradient flows on closed surfaces, their Morse and cellular chain
//! complexes with exact integer homology, continuation maps and mapping
//! cones, and the explicit blow-up charts near broken flow lines.

pub mod algebra;
pub mod continuation;
pub mod flowcat;
pub mod format;
pub mod localmodel;
pub mod morseflow;
pub mod ode;
pub mod sample;
pub mod scalar;
pub mod suites;

pub use format::ParseError;
pub use scalar::Scalar;

pub type ModelPoint64 = localmodel::ModelPoint<f64>;
pub type ModelPoint32 = localmodel::ModelPoint<f32>;
pub type BlowupChartPoint64 = localmodel::BlowupChartPoint<f64>;
pub type BlowupChartPoint32 = localmodel::BlowupChartPoint<f32>;
