//! Numerical toolkit for the Frenet apparatus of curves in Euclidean n-space.
//!
//! The crate builds unit-speed reparameterizations of analytic or sampled
//! curves, computes Frenet frames and the n-1 curvature functions, tests
//! whether the principal normal keeps a constant angle to some fixed axis
//! (the slant-helix property), recovers that axis, and synthesizes curves
//! with prescribed curvature profiles - including slant helices built by
//! inverse design.
//!
//! Everything is generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the aliases at the crate root fix `f64`, which is what
//! the command-line front end uses.

// Comparisons are deliberately spelled `!(a > b)` so NaN falls into the
// rejecting branch; the index-heavy loops are stencil/convolution kernels
// where the subscripts mirror the formulas they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curve;
pub mod error;
pub mod expr;
pub mod frenet;
pub mod grid;
pub mod io;
pub mod ode;
pub mod quad;
pub mod scalar;
pub mod series;
pub mod slant;
pub mod spline;
pub mod synthesis;
pub mod tol;

pub use error::{HelixError, Result};
pub use expr::Expr;
pub use scalar::Real;

/// Double-precision aliases for the main pipeline types; these are what the
/// command-line front end and most tests use.
pub type AnalyticCurve64 = curve::AnalyticCurve<f64>;
pub type SampledCurve64 = curve::SampledCurve<f64>;
pub type UnitSpeedCurve64 = curve::UnitSpeedCurve<f64>;
pub type FrenetApparatus64 = frenet::FrenetApparatus<f64>;
pub type DetectionReport64 = slant::DetectionReport<f64>;
pub type SynthesisRecord64 = synthesis::SynthesisRecord<f64>;

/// Single-precision aliases, for callers trading accuracy for footprint.
pub type AnalyticCurve32 = curve::AnalyticCurve<f32>;
pub type SampledCurve32 = curve::SampledCurve<f32>;
pub type UnitSpeedCurve32 = curve::UnitSpeedCurve<f32>;
pub type FrenetApparatus32 = frenet::FrenetApparatus<f32>;
pub type DetectionReport32 = slant::DetectionReport<f32>;
pub type SynthesisRecord32 = synthesis::SynthesisRecord<f32>;
