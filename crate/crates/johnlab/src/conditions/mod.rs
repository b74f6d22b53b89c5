//! Estimators for the metric conditions: John variants, LLC, bounded
//! turning, ball separation, uniformity, plus distortion-function algebra
//! and the eta integral.

mod ballsep;
mod bt;
mod distortion;
mod eta;
mod john;
mod llc;
mod report;
mod uniformity;

pub use ballsep::check_ball_separation;
pub use bt::estimate_bounded_turning;
pub use distortion::{relative_from_absolute, DistortionFunction, DistortionKind, Role};
pub use eta::eta_from_phi;
pub use john::{check_john, JohnVariant};
pub use llc::{estimate_llc1, estimate_llc2};
pub use report::{ConditionReport, REPORT_SCHEMA};
pub use uniformity::estimate_uniformity;
