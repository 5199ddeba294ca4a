//! Online false discovery rate control.
//!
//! Hypotheses arrive one at a time and each must be accepted or rejected
//! using only earlier decisions. This crate provides
//!
//! * the LOND, LORD, Bonferroni and alpha-investing rules ([`rules`]),
//! * the level sequences they spend ([`schedule`]),
//! * offline Benjamini–Hochberg baselines ([`baselines`]),
//! * mixture-model simulation, metrics and renewal-rate theory
//!   ([`synth`], [`metrics`], [`theory`]),
//! * a deterministic parallel experiment harness with CSV I/O ([`harness`]).
//!
//! The numeric kernels are generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the harness uses throughout.
//!
//! ```
//! use std::sync::Arc;
//! use online_fdr::{BetaSchedule, OnlineRule, RuleKind};
//!
//! let beta = Arc::new(BetaSchedule::log_power(0.05, 2.0, None)?);
//! let mut rule = OnlineRule::new(RuleKind::Lord(beta));
//! let decisions = rule.run(&[1e-4, 0.3, 0.02])?;
//! assert!(decisions[0].reject && !decisions[1].reject);
//! # Ok::<(), online_fdr::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rules;
pub mod scalar;
pub mod schedule;
pub mod seed;
pub mod stats;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Real;

pub type BetaSchedule = schedule::BetaSchedule<f64>;
pub type RuleKind = rules::RuleKind<f64>;
pub type RuleState = rules::RuleState<f64>;
pub type Decision = rules::Decision<f64>;
pub type OnlineRule = rules::OnlineRule<f64>;
pub type BhResult = baselines::BhResult<f64>;
pub type AlternativeModel = theory::AlternativeModel<f64>;
pub type RateBoundParams = theory::RateBoundParams<f64>;

pub type BetaScheduleF32 = schedule::BetaSchedule<f32>;
pub type RuleKindF32 = rules::RuleKind<f32>;
pub type OnlineRuleF32 = rules::OnlineRule<f32>;
