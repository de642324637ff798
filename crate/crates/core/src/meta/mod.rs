//! Regret accounting, hindsight solvers, noisy feedback and restart wrappers.

mod ledger;
mod noise;
pub mod offline;
mod wrappers;

pub use ledger::{ergodic_average, mean_regret, RegretLedger, RoundRecord};
pub use noise::{noisy_oracle, NoiseModel, NoisyFeedback};
pub use offline::SolverOptions;
pub use wrappers::{doubling_reset_rounds, Doubling, LearnerFactory, Restart};
