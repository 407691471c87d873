//! Redundancy thresholds for classical computation on noisy quantum hardware.
//!
//! A bit computed with `k`-fold redundancy on hardware whose noise grows with
//! `k` can only be recovered if the Holevo information of the effective
//! channel pays for the information required. This crate evaluates that
//! bound, finds the noise threshold above which no redundancy helps, and
//! simulates repetition-coded computation to compare against it.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod bound;
pub mod channels;
pub mod closedform;
pub mod error;
pub mod optimize;
pub mod scaling;
pub mod simulator;

pub use bound::{capacity_cost, AccuracySpec, Objective};
pub use channels::{binary_entropy, holevo, ChannelKind, NoiseLevel};
pub use error::{Error, Result};
pub use optimize::{threshold_bisection, OptimizerConfig, ThresholdResult};
pub use scaling::{k_max, KMax, LawFamily, ScalingLaw};
