//! Finite-key rate engine for BB84, six-state and `(d+1)`-bases QKD.
//!
//! Compares the von Neumann entropy bound against a min-entropy bound built
//! from closed-form guessing probabilities, and cross-checks those closed
//! forms against numerical state discrimination.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below pin the scalar.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod entropy;
pub mod error;
pub mod estimation;
pub mod oracle;
pub mod protocol;
pub mod report;
pub mod scalar;

pub use engine::{
    delta_correction, find_threshold_n0, key_rate, optimize_rate, optimize_rate_observed, yields,
    Bound, DeviationRule, GridSpec, LeakPoint, OptimalParams, Optimum, RateBreakdown, RateOptions,
    RateProblem, SecurityBudget, Threshold, YieldModel, YieldRule,
};
pub use error::{QkdError, Result};
pub use protocol::{ChannelModel, CorrectionRule, Family, PeKind, ProtocolSpec};
pub use scalar::Real;

pub type ChannelModel64 = ChannelModel<f64>;
pub type SecurityBudget64 = SecurityBudget<f64>;
pub type YieldModel64 = YieldModel<f64>;
pub type RateBreakdown64 = RateBreakdown<f64>;
pub type RateOptions64 = RateOptions<f64>;
pub type RateProblem64 = RateProblem<f64>;
pub type Optimum64 = Optimum<f64>;
pub type Threshold64 = Threshold<f64>;
pub type HermitianMatrix64 = oracle::HermitianMatrix<f64>;
pub type PeOutcome64 = estimation::PeOutcome<f64>;

pub type ChannelModel32 = ChannelModel<f32>;
pub type SecurityBudget32 = SecurityBudget<f32>;
pub type RateBreakdown32 = RateBreakdown<f32>;
pub type RateOptions32 = RateOptions<f32>;
pub type HermitianMatrix32 = oracle::HermitianMatrix<f32>;
