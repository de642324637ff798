//! Seeded loss streams.
//!
//! Bandit streams play on the simplex over arms and reveal full payoff
//! vectors `u ∈ [−1, 1]^A` together with the linear loss `−⟨u, x⟩`. Every
//! environment is a deterministic function of its spec, its seed and (for
//! the Cover adversary) the learner's past actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ActionSet, Point};
use crate::learner::Action;
use crate::linalg::{self, norm};
use crate::loss::LossFunction;

/// Upper end of the threshold interval `[1, ε_max]` for metric learning.
pub const EPSILON_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Simplex {
        dim: usize,
    },
    Ball {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Spectrahedron {
        side: usize,
        #[serde(default = "one")]
        trace_bound: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SetSpec {
    pub fn build(&self) -> Result<ActionSet> {
        match self {
            SetSpec::Simplex { dim } => ActionSet::simplex(*dim),
            SetSpec::Ball { dim, radius } => ActionSet::ball(vec![0.0; *dim], *radius),
            SetSpec::Box { lower, upper } => ActionSet::boxed(lower.clone(), upper.clone()),
            SetSpec::Spectrahedron { side, trace_bound } => {
                ActionSet::spectrahedron(*side, *trace_bound)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffPattern {
    /// Independent uniform `±1` payoffs.
    RandomSigns,
    /// Arm `a` earns `(−1)^(t+a)` in round `t`.
    AlternatingExtremes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvironmentSpec {
    /// Independent Bernoulli rewards with the given means.
    BernoulliBandit {
        means: Vec<f64>,
    },
    /// The same draws reported as payoffs in `{−1, 0}`: a success costs
    /// nothing and a failure costs one.
    BernoulliLosses {
        means: Vec<f64>,
    },
    /// Zero payoff on the arm the learner pulled `lag` rounds ago, one on
    /// every other arm; `lag = 0` targets the current pull.
    CoverAdversary {
        arms: usize,
        #[serde(default)]
        lag: usize,
    },
    /// Payoff 1 on a free channel and 0 on a busy one. Busy probabilities
    /// are redrawn uniformly every `redraw_every` rounds when set.
    ChannelSelection {
        occupancy: Vec<f64>,
        #[serde(default)]
        redraw_every: Option<usize>,
    },
    AdversarialPayoffs {
        arms: usize,
        pattern: PayoffPattern,
    },
    /// Linear losses `⟨g_t, x⟩` with dual norm exactly `lipschitz`, drawn
    /// around a fixed random direction weighted by `bias`.
    LinearStream {
        set: SetSpec,
        #[serde(default = "one")]
        lipschitz: f64,
        #[serde(default)]
        bias: f64,
    },
    /// `½(x − c_t)ᵀM_t(x − c_t)` on a box, with diagonal `M_t` whose entries
    /// lie in `[β, β + spread]` and centers drawn from the box, redrawn every
    /// `switch_every` rounds (every round when unset).
    QuadraticStream {
        lower: Vec<f64>,
        upper: Vec<f64>,
        beta: f64,
        #[serde(default)]
        spread: f64,
        #[serde(default)]
        switch_every: Option<usize>,
    },
    /// `−log det(I + H_t Q H_tᵀ)` on a spectrahedron, with Gaussian channels
    /// following `H_t = ρH_{t−1} + √(1−ρ²)·scale·G_t`.
    LogDetStream {
        rows: usize,
        side: usize,
        #[serde(default = "one")]
        trace_bound: f64,
        #[serde(default)]
        correlation: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Hinge losses on labelled pairs drawn from two Gaussian clusters at
    /// `±separation/2·e₁` with unit-variance noise, on
    /// `Box[1, ε_max] × Spectrahedron(dim, trace_bound)`.
    MetricHinge {
        dim: usize,
        #[serde(default = "one")]
        trace_bound: f64,
        #[serde(default = "one")]
        separation: f64,
        #[serde(default = "default_noise")]
        noise: f64,
    },
}

fn default_noise() -> f64 {
    0.3
}

fn check_probabilities(name: &'static str, p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(invalid(name, "need at least one arm"));
    }
    if p.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(invalid(name, "probabilities must lie in [0, 1]"));
    }
    Ok(())
}

impl EnvironmentSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentSpec::BernoulliBandit { means }
            | EnvironmentSpec::BernoulliLosses { means } => check_probabilities("means", means),
            EnvironmentSpec::ChannelSelection {
                occupancy,
                redraw_every,
            } => {
                check_probabilities("occupancy", occupancy)?;
                if *redraw_every == Some(0) {
                    return Err(invalid("redraw_every", "must be at least 1"));
                }
                Ok(())
            }
            EnvironmentSpec::CoverAdversary { arms, .. }
            | EnvironmentSpec::AdversarialPayoffs { arms, .. } => {
                if *arms == 0 {
                    return Err(invalid("arms", "need at least one arm"));
                }
                Ok(())
            }
            EnvironmentSpec::LinearStream {
                set,
                lipschitz,
                bias,
            } => {
                set.build()?;
                if !(*lipschitz > 0.0) || !(*bias >= 0.0) {
                    return Err(invalid("lipschitz", "need lipschitz > 0 and bias ≥ 0"));
                }
                Ok(())
            }
            EnvironmentSpec::QuadraticStream {
                lower,
                upper,
                beta,
                spread,
                switch_every,
            } => {
                ActionSet::boxed(lower.clone(), upper.clone())?;
                if !(*beta > 0.0) || !(*spread >= 0.0) {
                    return Err(invalid("beta", "need beta > 0 and spread ≥ 0"));
                }
                if *switch_every == Some(0) {
                    return Err(invalid("switch_every", "must be at least 1"));
                }
                Ok(())
            }
            EnvironmentSpec::LogDetStream {
                rows,
                side,
                trace_bound,
                correlation,
                scale,
            } => {
                ActionSet::spectrahedron(*side, *trace_bound)?;
                if *rows == 0 {
                    return Err(invalid("rows", "must be at least 1"));
                }
                if !(0.0..1.0).contains(correlation) || !(*scale > 0.0) {
                    return Err(invalid("correlation", "need 0 ≤ ρ < 1 and scale > 0"));
                }
                Ok(())
            }
            EnvironmentSpec::MetricHinge {
                dim,
                trace_bound,
                separation,
                noise,
            } => {
                ActionSet::spectrahedron(*dim, *trace_bound)?;
                if !(*separation >= 0.0) || !(*noise >= 0.0) {
                    return Err(invalid("separation", "need separation, noise ≥ 0"));
                }
                Ok(())
            }
        }
    }

    pub fn is_bandit(&self) -> bool {
        matches!(
            self,
            EnvironmentSpec::BernoulliBandit { .. }
                | EnvironmentSpec::BernoulliLosses { .. }
                | EnvironmentSpec::CoverAdversary { .. }
                | EnvironmentSpec::ChannelSelection { .. }
                | EnvironmentSpec::AdversarialPayoffs { .. }
        )
    }

    pub fn arms(&self) -> Option<usize> {
        match self {
            EnvironmentSpec::BernoulliBandit { means }
            | EnvironmentSpec::BernoulliLosses { means } => Some(means.len()),
            EnvironmentSpec::ChannelSelection { occupancy, .. } => Some(occupancy.len()),
            EnvironmentSpec::CoverAdversary { arms, .. }
            | EnvironmentSpec::AdversarialPayoffs { arms, .. } => Some(*arms),
            _ => None,
        }
    }

    pub fn action_set(&self) -> Result<ActionSet> {
        if let Some(arms) = self.arms() {
            return ActionSet::simplex(arms);
        }
        match self {
            EnvironmentSpec::LinearStream { set, .. } => set.build(),
            EnvironmentSpec::QuadraticStream { lower, upper, .. } => {
                ActionSet::boxed(lower.clone(), upper.clone())
            }
            EnvironmentSpec::LogDetStream {
                side, trace_bound, ..
            } => ActionSet::spectrahedron(*side, *trace_bound),
            EnvironmentSpec::MetricHinge {
                dim, trace_bound, ..
            } => ActionSet::product(vec![
                ActionSet::cube(1, 1.0, EPSILON_MAX)?,
                ActionSet::spectrahedron(*dim, *trace_bound)?,
            ]),
            _ => unreachable!("bandit specs handled above"),
        }
    }

    /// Mean gaps of the suboptimal arms for stationary bandits.
    pub fn gaps(&self) -> Option<Vec<f64>> {
        let means: Vec<f64> = match self {
            EnvironmentSpec::BernoulliBandit { means }
            | EnvironmentSpec::BernoulliLosses { means } => means.clone(),
            EnvironmentSpec::ChannelSelection {
                occupancy,
                redraw_every: None,
            } => occupancy.iter().map(|p| 1.0 - p).collect(),
            _ => return None,
        };
        let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gaps: Vec<f64> = means
            .iter()
            .map(|m| best - m)
            .filter(|g| *g > 0.0)
            .collect();
        Some(gaps)
    }

    /// Bound on the Euclidean norm of every loss gradient over the set
    /// (the Frobenius norm for matrix streams).
    pub fn euclidean_lipschitz(&self) -> Option<f64> {
        match self {
            EnvironmentSpec::LinearStream { set, lipschitz, .. } => Some(match set {
                SetSpec::Ball { .. } => *lipschitz,
                SetSpec::Simplex { dim } => lipschitz * (*dim as f64).sqrt(),
                SetSpec::Box { lower, .. } => lipschitz * (lower.len() as f64).sqrt(),
                SetSpec::Spectrahedron { side, .. } => lipschitz * (*side as f64).sqrt(),
            }),
            EnvironmentSpec::QuadraticStream {
                lower,
                upper,
                beta,
                spread,
                ..
            } => Some((beta + spread) * linalg::distance(lower, upper)),
            _ => self.arms().map(|a| (a as f64).sqrt()),
        }
    }

    /// Bound on the gradient in the norm dual to the geometry the stream is
    /// naturally paired with: `ℓ∞` for payoffs, spectral for matrix streams.
    pub fn dual_lipschitz(&self) -> Option<f64> {
        match self {
            EnvironmentSpec::LinearStream { lipschitz, .. } => Some(*lipschitz),
            _ if self.is_bandit() => Some(1.0),
            _ => self.euclidean_lipschitz(),
        }
    }

    /// Bound on `|ℓ_t(x)|` over the set, where one is known.
    pub fn max_loss(&self) -> Option<f64> {
        if self.is_bandit() {
            return Some(1.0);
        }
        let set = self.action_set().ok()?;
        match self {
            EnvironmentSpec::LinearStream { .. } => {
                Some(self.dual_lipschitz()? * set.max_norm().max(1e-300))
            }
            EnvironmentSpec::QuadraticStream {
                lower,
                upper,
                beta,
                spread,
                ..
            } => {
                let d = linalg::distance(lower, upper);
                Some(0.5 * (beta + spread) * d * d)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossRevelation {
    pub round: usize,
    pub loss: LossFunction,
    pub payoffs: Option<Vec<f64>>,
    pub minimum: Option<f64>,
    pub minimizer: Option<Point>,
}

#[derive(Debug, Clone)]
enum State {
    None,
    Occupancy(Vec<f64>),
    Bias(Vec<f64>),
    Quadratic {
        curvature: Vec<f64>,
        center: Vec<f64>,
    },
    Channel(Vec<f64>),
}

/// A running loss stream.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvironmentSpec,
    set: ActionSet,
    rng: ChaCha8Rng,
    round: usize,
    history: Vec<usize>,
    state: State,
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

impl Environment {
    pub fn new(spec: EnvironmentSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let set = spec.action_set()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = match &spec {
            EnvironmentSpec::ChannelSelection { occupancy, .. } => {
                State::Occupancy(occupancy.clone())
            }
            EnvironmentSpec::LinearStream { .. } => {
                let b: Vec<f64> = (0..set.dim()).map(|_| gauss(&mut rng)).collect();
                State::Bias(b)
            }
            EnvironmentSpec::LogDetStream {
                rows, side, scale, ..
            } => State::Channel((0..rows * side).map(|_| scale * gauss(&mut rng)).collect()),
            EnvironmentSpec::QuadraticStream { .. } => State::Quadratic {
                curvature: Vec::new(),
                center: Vec::new(),
            },
            _ => State::None,
        };
        Ok(Self {
            spec,
            set,
            rng,
            round: 0,
            history: Vec::new(),
            state,
        })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn set(&self) -> &ActionSet {
        &self.set
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Reveals the loss of round `t`, which must follow the previous call.
    /// The Cover adversary reads the arm in `action`; other streams ignore it.
    pub fn reveal(&mut self, t: usize, action: &Action) -> Result<LossRevelation> {
        if t != self.round + 1 {
            return Err(Error::OutOfOrder {
                expected: self.round + 1,
                actual: t,
            });
        }
        if let EnvironmentSpec::CoverAdversary { arms, .. } = &self.spec {
            let arm = action.arm().ok_or_else(|| {
                Error::Unsupported("Cover adversary needs discrete actions".into())
            })?;
            if arm >= *arms {
                return Err(Error::ArmOutOfRange { arm, arms: *arms });
            }
            self.history.push(arm);
        }
        self.round = t;
        if let Some(payoffs) = self.draw_payoffs(t) {
            let loss = LossFunction::from_payoffs(&payoffs);
            let (minimizer, minimum) = self
                .set
                .support_extreme(&payoffs.iter().map(|u| -u).collect::<Vec<_>>())?;
            return Ok(LossRevelation {
                round: t,
                loss,
                payoffs: Some(payoffs),
                minimum: Some(minimum),
                minimizer: Some(minimizer),
            });
        }
        let loss = self.draw_loss(t)?;
        let closed = loss.minimize(&self.set)?;
        let (minimizer, minimum) = match closed {
            Some((p, v)) => (Some(p), Some(v)),
            None => (None, None),
        };
        Ok(LossRevelation {
            round: t,
            loss,
            payoffs: None,
            minimum,
            minimizer,
        })
    }

    fn draw_payoffs(&mut self, t: usize) -> Option<Vec<f64>> {
        let rng = &mut self.rng;
        Some(match &self.spec {
            EnvironmentSpec::BernoulliBandit { means } => means
                .iter()
                .map(|&p| if rng.random::<f64>() < p { 1.0 } else { 0.0 })
                .collect(),
            EnvironmentSpec::BernoulliLosses { means } => means
                .iter()
                .map(|&p| if rng.random::<f64>() < p { 0.0 } else { -1.0 })
                .collect(),
            EnvironmentSpec::CoverAdversary { arms, lag } => {
                let mut u = vec![1.0; *arms];
                if t > *lag {
                    u[self.history[t - 1 - lag]] = 0.0;
                }
                u
            }
            EnvironmentSpec::ChannelSelection { redraw_every, .. } => {
                let State::Occupancy(occ) = &mut self.state else {
                    unreachable!()
                };
                if let Some(k) = redraw_every {
                    if t > 1 && (t - 1).is_multiple_of(*k) {
                        occ.iter_mut().for_each(|p| *p = rng.random::<f64>());
                    }
                }
                occ.iter()
                    .map(|&busy| if rng.random::<f64>() < busy { 0.0 } else { 1.0 })
                    .collect()
            }
            EnvironmentSpec::AdversarialPayoffs { arms, pattern } => match pattern {
                PayoffPattern::RandomSigns => (0..*arms)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect(),
                PayoffPattern::AlternatingExtremes => (0..*arms)
                    .map(|a| if (t + a).is_multiple_of(2) { 1.0 } else { -1.0 })
                    .collect(),
            },
            _ => return None,
        })
    }

    fn draw_loss(&mut self, t: usize) -> Result<LossFunction> {
        let rng = &mut self.rng;
        match (&self.spec, &mut self.state) {
            (
                EnvironmentSpec::LinearStream {
                    set,
                    lipschitz,
                    bias,
                },
                State::Bias(b),
            ) => {
                let dim = self.set.dim();
                let mut g: Vec<f64> = (0..dim).map(|_| gauss(rng)).collect();
                if let SetSpec::Spectrahedron { side, .. } = set {
                    g = linalg::symmetrize(&g, *side);
                    let bs = linalg::symmetrize(b, *side);
                    g.iter_mut().zip(&bs).for_each(|(v, c)| *v += bias * c);
                } else {
                    g.iter_mut().zip(b.iter()).for_each(|(v, c)| *v += bias * c);
                }
                let dual = match set {
                    SetSpec::Ball { .. } => norm(&g),
                    SetSpec::Simplex { .. } | SetSpec::Box { .. } => {
                        g.iter().fold(0.0f64, |m, v| m.max(v.abs()))
                    }
                    SetSpec::Spectrahedron { side, .. } => linalg::spectral_norm(&g, *side)?,
                };
                if dual == 0.0 {
                    return Ok(LossFunction::linear(vec![0.0; dim]));
                }
                Ok(LossFunction::linear(
                    g.into_iter().map(|v| lipschitz * v / dual).collect(),
                ))
            }
            (
                EnvironmentSpec::QuadraticStream {
                    lower,
                    upper,
                    beta,
                    spread,
                    switch_every,
                },
                State::Quadratic { curvature, center },
            ) => {
                let n = lower.len();
                let fresh = match switch_every {
                    None => true,
                    Some(k) => (t - 1).is_multiple_of(*k),
                };
                if fresh || center.is_empty() {
                    *center = lower
                        .iter()
                        .zip(upper)
                        .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                        .collect();
                }
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = beta + spread * rng.random::<f64>();
                }
                *curvature = m.clone();
                let lin: Vec<f64> = (0..n).map(|i| m[i * n + i] * center[i]).collect();
                let offset = 0.5 * (0..n).map(|i| lin[i] * center[i]).sum::<f64>();
                Ok(LossFunction::Quadratic {
                    curvature: m,
                    linear: lin,
                    offset,
                })
            }
            (
                EnvironmentSpec::LogDetStream {
                    rows,
                    side,
                    correlation,
                    scale,
                    ..
                },
                State::Channel(h),
            ) => {
                if t > 1 {
                    let keep = *correlation;
                    let fresh = (1.0 - keep * keep).sqrt() * scale;
                    h.iter_mut()
                        .for_each(|v| *v = keep * *v + fresh * gauss(rng));
                }
                LossFunction::logdet(h.clone(), *rows, *side)
            }
            (
                EnvironmentSpec::MetricHinge {
                    dim,
                    separation,
                    noise,
                    ..
                },
                State::None,
            ) => {
                let same = rng.random::<bool>();
                let side_p = rng.random::<bool>();
                let side_q = if same { side_p } else { !side_p };
                let mut point = |positive: bool| -> Vec<f64> {
                    (0..*dim)
                        .map(|i| {
                            let mean = if i == 0 {
                                if positive {
                                    0.5 * separation
                                } else {
                                    -0.5 * separation
                                }
                            } else {
                                0.0
                            };
                            mean + noise * gauss(rng)
                        })
                        .collect()
                };
                let p = point(side_p);
                let q = point(side_q);
                LossFunction::metric_hinge(&p, &q, if same { 1.0 } else { -1.0 })
            }
            _ => unreachable!("bandit streams reveal payoffs"),
        }
    }
}
