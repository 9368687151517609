//! Value-at-Risk and expected shortfall of heavy-tailed random walks by
//! importance sampling.
//!
//! Samples of `S_n = Z_1 + ... + Z_n` with regularly varying increments are
//! drawn under a dynamic mixture change of measure ([`samplers`]), turned
//! into a weighted tail e.d.f. ([`weighted_edf`]) and inverted for quantile
//! and shortfall estimates. [`asymptotics`] holds the closed-form tail
//! approximation and efficiency bounds; [`harness`] runs replicated
//! experiments and the brute-force oracles used to validate them.

// `!(x > 0.0)` is the NaN-rejecting domain check used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod dist;
pub mod error;
pub mod harness;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod weighted_edf;

pub use dist::HeavyTailDistribution;
pub use error::{Error, Result};
pub use harness::{EstimateMode, ExperimentConfig, ExperimentReport, MixSchedule, ScheduleKind};
pub use samplers::{Algorithm, MixtureConfig, Sampler, WeightedSample, WeightedSampleSet};
pub use weighted_edf::{RiskEstimate, WeightedTailEdf};
