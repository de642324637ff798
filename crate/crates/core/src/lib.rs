//! No-regret online learning: bandit learners, online gradient and mirror
//! descent, zeroth-order methods, meta-wrappers, synthetic loss streams and a
//! regret ledger.
//!
//! Learners consume negative gradients `v = −∇ℓ` and payoffs; environments
//! emit losses. The sign flip happens in [`loss::LossFunction::negative_gradient`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod envs;
pub mod error;
pub mod geometry;
pub mod learner;
pub mod linalg;
pub mod loss;
pub mod meta;
pub mod oco;
pub mod process;
pub mod tuning;
pub mod zeroth;

pub use envs::{Environment, EnvironmentSpec, LossRevelation, SetSpec};
pub use error::{Error, Result};
pub use geometry::{ActionSet, Point, Regularizer, RegularizerKind, SetKind};
pub use learner::{Action, Feedback, GradientKind, GradientSample, Learner};
pub use loss::{AggregateLoss, LossFunction};
pub use meta::RegretLedger;
pub use process::{run_trial, run_trial_with, RoundFailure, RoundOutcome};
