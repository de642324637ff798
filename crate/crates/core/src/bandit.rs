//! Discrete-action learners: UCB for stochastic bandits, Hedge for
//! full-information adversarial streams and EXP3 for bandit feedback.
//!
//! Arm indices are zero-based. Payoffs are rewards (higher is better); the
//! loss reported in [`Feedback`] is the negated payoff.

use rand::{Rng, RngCore};

use crate::error::{invalid, Error, Result};
use crate::learner::{Action, Feedback, Learner};

/// `exp(y) / Σ exp(y)`, evaluated after subtracting `max y`.
pub fn logit_map(y: &[f64]) -> Vec<f64> {
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = y.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Hoeffding's bound `exp(−2 n z²)` on the deviation of an `n`-sample mean.
pub fn hoeffding_tail(n: u64, z: f64) -> f64 {
    (-2.0 * n as f64 * z * z).exp()
}

/// Unbiased payoff-vector estimate from a single observed payoff.
pub fn importance_sample(strategy: &[f64], arm: usize, payoff: f64) -> Result<Vec<f64>> {
    let arms = strategy.len();
    if arm >= arms {
        return Err(Error::ArmOutOfRange { arm, arms });
    }
    if !(strategy[arm] > 0.0) {
        return Err(Error::ZeroProbability(arm));
    }
    let mut v = vec![0.0; arms];
    v[arm] = payoff / strategy[arm];
    Ok(v)
}

/// Optimistic index `μ̂ + √(α log t / (2n))`.
pub fn ucb_index(mean: f64, count: u64, alpha: f64, log_t: f64) -> f64 {
    mean + (alpha * log_t / (2.0 * count as f64)).sqrt()
}

/// Draws an index from a probability vector by inversion.
pub fn sample_index(probs: &[f64], rng: &mut dyn RngCore) -> usize {
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        cumulative += p;
        if u < cumulative {
            return i;
        }
    }
    last_positive
}

fn check_payoff(value: f64, low: f64, high: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::NonFinite("payoff"));
    }
    if value < low || value > high {
        return Err(Error::PayoffOutOfRange { value, low, high });
    }
    Ok(value)
}

/// Per-arm sample counts and empirical means.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    means: Vec<f64>,
    t: u64,
    alpha: f64,
}

impl UcbState {
    pub fn new(arms: usize, alpha: f64) -> Result<Self> {
        if arms == 0 {
            return Err(invalid("arms", "need at least one arm"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(Self {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            t: 0,
            alpha,
        })
    }

    /// Builds a state directly; `t` counts all samples drawn so far.
    pub fn from_parts(counts: Vec<u64>, means: Vec<f64>, t: u64, alpha: f64) -> Result<Self> {
        let mut s = Self::new(counts.len(), alpha)?;
        crate::error::check_dim(counts.len(), means.len())?;
        s.counts = counts;
        s.means = means;
        s.t = t;
        Ok(s)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    /// First arm that has never been sampled.
    pub fn unsampled(&self) -> Option<usize> {
        self.counts.iter().position(|&n| n == 0)
    }

    /// Highest index using the state's own round counter.
    pub fn select(&self) -> Result<usize> {
        if self.t == 0 {
            return Err(Error::Uninitialized("UCB round counter is zero"));
        }
        self.select_with_log_t((self.t as f64).ln())
    }

    /// Highest index for an explicit `log t`; ties go to the lowest arm.
    pub fn select_with_log_t(&self, log_t: f64) -> Result<usize> {
        if self.unsampled().is_some() {
            return Err(Error::Uninitialized("every arm needs one sample"));
        }
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for (a, (&m, &n)) in self.means.iter().zip(&self.counts).enumerate() {
            let idx = ucb_index(m, n, self.alpha, log_t);
            if idx > best_index {
                best = a;
                best_index = idx;
            }
        }
        Ok(best)
    }

    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        let arms = self.counts.len();
        if arm >= arms {
            return Err(Error::ArmOutOfRange { arm, arms });
        }
        check_payoff(reward, 0.0, 1.0)?;
        self.counts[arm] += 1;
        let n = self.counts[arm] as f64;
        self.means[arm] = (1.0 - 1.0 / n) * self.means[arm] + reward / n;
        self.t += 1;
        Ok(())
    }
}

/// UCB with one forced pull of every arm during the first rounds.
#[derive(Debug, Clone)]
pub struct Ucb {
    state: UcbState,
    last: Option<usize>,
}

impl Ucb {
    pub fn new(arms: usize, alpha: f64) -> Result<Self> {
        if !(alpha > 2.0) {
            return Err(invalid("alpha", format!("must exceed 2, got {alpha}")));
        }
        Ok(Self {
            state: UcbState::new(arms, alpha)?,
            last: None,
        })
    }

    pub fn state(&self) -> &UcbState {
        &self.state
    }
}

impl Learner for Ucb {
    fn act(&mut self, _rng: &mut dyn RngCore) -> Result<Action> {
        let arm = match self.state.unsampled() {
            Some(a) => a,
            None => self.state.select()?,
        };
        self.last = Some(arm);
        Ok(Action::Arm(arm))
    }

    fn observe(&mut self, feedback: &Feedback, _rng: &mut dyn RngCore) -> Result<()> {
        let arm = self
            .last
            .take()
            .ok_or(Error::Uninitialized("observe before act"))?;
        self.state.update(arm, -feedback.loss)
    }
}

/// Scores, step size and the current logit strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreState {
    scores: Vec<f64>,
    gamma: f64,
    strategy: Vec<f64>,
}

impl ScoreState {
    pub fn new(arms: usize, gamma: f64) -> Result<Self> {
        if arms == 0 {
            return Err(invalid("arms", "need at least one arm"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(
                "gamma",
                format!("must be nonnegative, got {gamma}"),
            ));
        }
        Ok(Self {
            scores: vec![0.0; arms],
            gamma,
            strategy: vec![1.0 / arms as f64; arms],
        })
    }

    pub fn arms(&self) -> usize {
        self.scores.len()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn strategy(&self) -> &[f64] {
        &self.strategy
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `y ← y + γ v` and returns the new strategy.
    pub fn step(&mut self, v: &[f64]) -> Result<&[f64]> {
        crate::error::check_dim(self.scores.len(), v.len())?;
        crate::error::check_finite(v, "payoff vector")?;
        for (y, p) in self.scores.iter_mut().zip(v) {
            *y += self.gamma * p;
        }
        self.strategy = logit_map(&self.scores);
        Ok(&self.strategy)
    }
}

/// Exponential weights with full payoff vectors.
#[derive(Debug, Clone)]
pub struct Hedge {
    state: ScoreState,
}

impl Hedge {
    pub fn new(arms: usize, gamma: f64) -> Result<Self> {
        Ok(Self {
            state: ScoreState::new(arms, gamma)?,
        })
    }

    pub fn state(&self) -> &ScoreState {
        &self.state
    }

    pub fn hedge_step(&mut self, payoffs: &[f64]) -> Result<Vec<f64>> {
        for &p in payoffs {
            check_payoff(p, -1.0, 1.0)?;
        }
        self.state.step(payoffs).map(<[f64]>::to_vec)
    }
}

impl Learner for Hedge {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        let strategy = self.state.strategy.clone();
        let arm = sample_index(&strategy, rng);
        Ok(Action::Mixed { strategy, arm })
    }

    fn observe(&mut self, feedback: &Feedback, _rng: &mut dyn RngCore) -> Result<()> {
        let payoffs = feedback
            .payoffs
            .as_deref()
            .ok_or(Error::MissingFeedback("hedge needs the full payoff vector"))?;
        self.hedge_step(payoffs).map(drop)
    }
}

/// Exponential weights fed with importance-sampled payoff estimates.
#[derive(Debug, Clone)]
pub struct Exp3 {
    state: ScoreState,
    last: Option<usize>,
}

impl Exp3 {
    pub fn new(arms: usize, gamma: f64) -> Result<Self> {
        Ok(Self {
            state: ScoreState::new(arms, gamma)?,
            last: None,
        })
    }

    pub fn state(&self) -> &ScoreState {
        &self.state
    }
}

impl Learner for Exp3 {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        let strategy = self.state.strategy.clone();
        let arm = sample_index(&strategy, rng);
        self.last = Some(arm);
        Ok(Action::Mixed { strategy, arm })
    }

    fn observe(&mut self, feedback: &Feedback, _rng: &mut dyn RngCore) -> Result<()> {
        let arm = self
            .last
            .take()
            .ok_or(Error::Uninitialized("observe before act"))?;
        let payoff = check_payoff(-feedback.loss, -1.0, 1.0)?;
        let estimate = importance_sample(&self.state.strategy, arm, payoff)?;
        self.state.step(&estimate).map(drop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn logit_examples() {
        assert!(close(&logit_map(&[0.0; 3]), &[1.0 / 3.0; 3], 1e-15));
        assert!(close(
            &logit_map(&[2f64.ln(), 0.0]),
            &[2.0 / 3.0, 1.0 / 3.0],
            1e-15
        ));
        assert_eq!(logit_map(&[1000.0, 1000.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn ucb_index_example() {
        let s = UcbState::from_parts(vec![4, 1], vec![0.5, 0.5], 7, 2.0).unwrap();
        assert!((ucb_index(0.5, 4, 2.0, 2.0) - 1.207_106_781_186_547_5).abs() < 1e-12);
        assert!((ucb_index(0.5, 1, 2.0, 2.0) - 1.914_213_562_373_095).abs() < 1e-12);
        assert_eq!(s.select_with_log_t(2.0).unwrap(), 1);
    }

    #[test]
    fn ucb_ties_and_means() {
        let s = UcbState::from_parts(vec![3, 3, 3], vec![0.4; 3], 9, 3.0).unwrap();
        assert_eq!(s.select().unwrap(), 0);
        // Equal counts, large t: the better mean still wins.
        let s = UcbState::from_parts(vec![5000, 5000], vec![0.6, 0.9], 10_000, 3.0).unwrap();
        let gap = ucb_index(0.9, 5000, 3.0, 1e4f64.ln()) - ucb_index(0.6, 5000, 3.0, 1e4f64.ln());
        assert!(gap > 0.0);
        assert_eq!(s.select().unwrap(), 1);
    }

    #[test]
    fn ucb_uninitialized() {
        let s = UcbState::new(2, 3.0).unwrap();
        assert!(matches!(s.select(), Err(Error::Uninitialized(_))));
    }

    #[test]
    fn ucb_update_examples() {
        let mut s = UcbState::from_parts(vec![4], vec![0.5], 4, 3.0).unwrap();
        s.update(0, 1.0).unwrap();
        assert!((s.means()[0] - 0.6).abs() < 1e-15);
        assert_eq!(s.counts()[0], 5);

        let mut s = UcbState::from_parts(vec![1], vec![1.0], 1, 3.0).unwrap();
        for k in 1..=6u64 {
            s.update(0, 0.0).unwrap();
            assert!((s.means()[0] - 1.0 / (k + 1) as f64).abs() < 1e-15);
        }

        let mut s = UcbState::new(1, 3.0).unwrap();
        for r in [1.0, 1.0, 0.0, 1.0, 0.0] {
            s.update(0, r).unwrap();
        }
        assert!((s.means()[0] - 0.6).abs() < 1e-15);
        assert!(matches!(
            s.update(0, 1.5),
            Err(Error::PayoffOutOfRange { .. })
        ));
    }

    #[test]
    fn ucb_forces_initial_pulls() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut u = Ucb::new(3, 3.0).unwrap();
        for expect in 0..3 {
            assert_eq!(u.act(&mut rng).unwrap(), Action::Arm(expect));
            let fb = Feedback {
                round: expect + 1,
                loss: -0.5,
                payoffs: None,
                gradient: None,
            };
            u.observe(&fb, &mut rng).unwrap();
        }
        assert_eq!(u.state().counts(), &[1, 1, 1]);
        assert!(Ucb::new(2, 2.0).is_err());
    }

    #[test]
    fn hedge_examples() {
        let mut h = Hedge::new(2, 1.0).unwrap();
        let x = h.hedge_step(&[1.0, 0.0]).unwrap();
        let e = std::f64::consts::E;
        assert!(close(&x, &[e / (1.0 + e), 1.0 / (1.0 + e)], 1e-15));
        assert_eq!(h.state().scores(), &[1.0, 0.0]);

        let mut frozen = Hedge::new(4, 0.0).unwrap();
        for _ in 0..10 {
            assert_eq!(
                frozen.hedge_step(&[1.0, -1.0, 0.5, 0.0]).unwrap(),
                vec![0.25; 4]
            );
        }
        assert!(matches!(
            frozen.hedge_step(&[2.0, 0.0, 0.0, 0.0]),
            Err(Error::PayoffOutOfRange { .. })
        ));
    }

    #[test]
    fn importance_examples() {
        assert_eq!(
            importance_sample(&[0.5, 0.5], 0, 0.8).unwrap(),
            vec![1.6, 0.0]
        );
        assert_eq!(
            importance_sample(&[1.0, 0.0], 0, 0.3).unwrap(),
            vec![0.3, 0.0]
        );
        assert_eq!(
            importance_sample(&[1.0, 0.0], 1, 0.3),
            Err(Error::ZeroProbability(1))
        );
        let x = [0.25, 0.75];
        let v = [0.4, 0.8];
        let mut mean = [0.0; 2];
        for a in 0..2 {
            let est = importance_sample(&x, a, v[a]).unwrap();
            for j in 0..2 {
                mean[j] += x[a] * est[j];
            }
        }
        assert!(close(&mean, &v, 1e-15));
    }

    #[test]
    fn hoeffding_examples() {
        assert_eq!(hoeffding_tail(5, 0.0), 1.0);
        assert!((hoeffding_tail(1, 1.0) - (-2f64).exp()).abs() < 1e-16);
        let b = hoeffding_tail(3, 0.4);
        assert!((hoeffding_tail(6, 0.4) - b * b).abs() < 1e-15);
    }

    #[test]
    fn sample_index_skips_zero_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(sample_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
    }

    proptest! {
        #[test]
        fn logit_is_a_distribution(y in proptest::collection::vec(-50.0f64..50.0, 1..12)) {
            let x = logit_map(&y);
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(x.iter().all(|&p| p > 0.0 && p <= 1.0));
        }

        #[test]
        fn hedge_ignores_constant_shifts(
            rounds in proptest::collection::vec(
                (proptest::collection::vec(-0.5f64..0.5, 4), -0.5f64..0.5), 1..40)
        ) {
            let mut a = Hedge::new(4, 0.3).unwrap();
            let mut b = Hedge::new(4, 0.3).unwrap();
            for (v, c) in rounds {
                let shifted: Vec<f64> = v.iter().map(|p| p + c).collect();
                let xa = a.hedge_step(&v).unwrap();
                let xb = b.hedge_step(&shifted).unwrap();
                prop_assert!(close(&xa, &xb, 1e-12));
            }
        }

        #[test]
        fn importance_sampling_unbiased(
            raw in proptest::collection::vec(0.05f64..1.0, 2..8),
            seed in 0u64..1000,
        ) {
            let total: f64 = raw.iter().sum();
            let x: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = x.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut mean = vec![0.0; x.len()];
            for a in 0..x.len() {
                let est = importance_sample(&x, a, v[a]).unwrap();
                for j in 0..x.len() {
                    mean[j] += x[a] * est[j];
                }
            }
            prop_assert!(close(&mean, &v, 1e-12));
        }

        #[test]
        fn ucb_select_permutation_equivariant(
            means in proptest::collection::vec(0.0f64..1.0, 4),
            counts in proptest::collection::vec(1u64..50, 4),
            rot in 0usize..4,
        ) {
            let t: u64 = counts.iter().sum();
            let s = UcbState::from_parts(counts.clone(), means.clone(), t, 3.0).unwrap();
            let perm: Vec<usize> = (0..4).map(|i| (i + rot) % 4).collect();
            let pm: Vec<f64> = perm.iter().map(|&i| means[i]).collect();
            let pc: Vec<u64> = perm.iter().map(|&i| counts[i]).collect();
            let ps = UcbState::from_parts(pc, pm, t, 3.0).unwrap();
            let chosen = s.select().unwrap();
            let permuted = perm[ps.select().unwrap()];
            let index = |a: usize| ucb_index(means[a], counts[a], 3.0, (t as f64).ln());
            // Same arm unless the two choices tie exactly.
            prop_assert!(chosen == permuted || index(chosen) == index(permuted));
        }
    }
}
