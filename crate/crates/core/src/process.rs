//! The online decision loop.

use rand::RngCore;
use thiserror::Error as ThisError;

use crate::envs::Environment;
use crate::error::Error;
use crate::learner::{Action, Feedback, GradientSample, Learner};
use crate::meta::RegretLedger;

/// An error raised while playing a specific round.
#[derive(Debug, ThisError)]
#[error("round {round}: {source}")]
pub struct RoundFailure {
    pub round: usize,
    #[source]
    pub source: Error,
}

/// What the loop saw in one round, handed to per-round observers.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub round: usize,
    pub action: Action,
    /// Loss charged to the ledger (expected loss for mixed actions).
    pub loss: f64,
    /// Loss of the arm or point actually played.
    pub realized_loss: f64,
    pub minimum: Option<f64>,
}

/// Plays rounds `1..=horizon` of `learner` against `env`, charging `ledger`.
pub fn run_trial(
    env: &mut Environment,
    learner: &mut dyn Learner,
    ledger: &mut RegretLedger,
    horizon: usize,
    rng: &mut dyn RngCore,
) -> Result<(), RoundFailure> {
    run_trial_with(env, learner, ledger, horizon, rng, |_, _| Ok(()))
}

/// [`run_trial`] with a callback after every round.
pub fn run_trial_with(
    env: &mut Environment,
    learner: &mut dyn Learner,
    ledger: &mut RegretLedger,
    horizon: usize,
    rng: &mut dyn RngCore,
    mut observer: impl FnMut(&RoundOutcome, &mut RegretLedger) -> Result<(), Error>,
) -> Result<(), RoundFailure> {
    for t in 1..=horizon {
        play_round(env, learner, ledger, t, rng, &mut observer)
            .map_err(|source| RoundFailure { round: t, source })?;
    }
    Ok(())
}

fn play_round(
    env: &mut Environment,
    learner: &mut dyn Learner,
    ledger: &mut RegretLedger,
    t: usize,
    rng: &mut dyn RngCore,
    observer: &mut impl FnMut(&RoundOutcome, &mut RegretLedger) -> Result<(), Error>,
) -> Result<(), Error> {
    let action = learner.act(rng)?;
    let revealed = env.reveal(t, &action)?;
    let charged = ledger.record(t, &action, &revealed.loss, revealed.minimum)?;
    let played: Vec<f64> = match &action {
        Action::Point(p) => p.to_vec(),
        Action::Arm(a) | Action::Mixed { arm: a, .. } => {
            let mut e = vec![0.0; env.set().dim()];
            e[*a] = 1.0;
            e
        }
    };
    let realized = revealed.loss.value(&played)?;
    let gradient = revealed.loss.negative_gradient(&played)?;
    let feedback = Feedback {
        round: t,
        loss: realized,
        payoffs: revealed.payoffs,
        gradient: Some(GradientSample::exact(gradient)),
    };
    learner.observe(&feedback, rng)?;
    let outcome = RoundOutcome {
        round: t,
        action,
        loss: charged,
        realized_loss: realized,
        minimum: revealed.minimum,
    };
    observer(&outcome, ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{Hedge, Ucb};
    use crate::envs::EnvironmentSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bandit_loop_charges_every_round() {
        let spec = EnvironmentSpec::BernoulliBandit {
            means: vec![0.9, 0.6],
        };
        let mut env = Environment::new(spec, 1).unwrap();
        let mut ledger = RegretLedger::new(env.set().clone());
        let mut ucb = Ucb::new(2, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = 0;
        run_trial_with(&mut env, &mut ucb, &mut ledger, 200, &mut rng, |o, _| {
            seen += 1;
            assert!(o.loss <= 0.0 && o.loss >= -1.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, 200);
        assert_eq!(ledger.rounds(), 200);
        assert!(ledger.static_regret().unwrap() >= -1e-9 - 200.0);
    }

    #[test]
    fn hedge_regret_against_cover_is_bounded() {
        let spec = EnvironmentSpec::CoverAdversary { arms: 3, lag: 0 };
        let mut env = Environment::new(spec, 0).unwrap();
        let mut ledger = RegretLedger::new(env.set().clone());
        let mut hedge = Hedge::new(3, 0.05).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        run_trial(&mut env, &mut hedge, &mut ledger, 500, &mut rng).unwrap();
        let r = ledger.static_regret().unwrap();
        assert!(r.is_finite() && r <= 500.0);
    }

    #[test]
    fn failure_carries_round() {
        let spec = EnvironmentSpec::BernoulliBandit {
            means: vec![0.5, 0.5, 0.5],
        };
        let mut env = Environment::new(spec, 0).unwrap();
        let mut ledger = RegretLedger::new(crate::ActionSet::simplex(2).unwrap());
        let mut ucb = Ucb::new(3, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = run_trial(&mut env, &mut ucb, &mut ledger, 10, &mut rng).unwrap_err();
        assert_eq!(err.round, 1);
    }
}
