//! Passive drone detection with a reconfigurable intelligent surface (RIS)
//! assisting a mmWave MIMO base station.
//!
//! The pipeline runs scenario → LoS channels → sounding beams and RIS
//! profiles → whitened linear model → GLRT analytics, with Monte Carlo
//! validation and the power/overhead/beam studies on top.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`, which every accuracy target assumes.

// `!(x > 0)` guards reject NaN as well; coefficient tables keep all their digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod arrays;
pub mod beams;
pub mod channels;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod montecarlo;
pub mod rng;
pub mod scalar;
pub mod scenario;
pub mod sounding;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type CMat64 = linalg::CMat<f64>;
pub type ChannelSet64 = channels::ChannelSet<f64>;
pub type BsBeamSet64 = beams::BsBeamSet<f64>;
pub type RisProfileSet64 = beams::RisProfileSet<f64>;
pub type SoundingFrame64 = sounding::SoundingFrame<f64>;
pub type WhitenedModel64 = sounding::WhitenedModel<f64>;
pub type ModelBuilder64 = sounding::ModelBuilder<f64>;
pub type AnalyticPoint64 = detector::AnalyticPoint<f64>;
