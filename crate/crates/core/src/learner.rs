//! The learner interface driven by the online decision loop.

use rand::RngCore;

use crate::error::Result;
use crate::geometry::Point;

/// What a learner plays in one round.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// A deterministic arm choice.
    Arm(usize),
    /// A mixed strategy together with the arm drawn from it.
    Mixed { strategy: Vec<f64>, arm: usize },
    /// A point of a continuous action set.
    Point(Point),
}

impl Action {
    /// The arm actually pulled, for discrete actions.
    pub fn arm(&self) -> Option<usize> {
        match self {
            Action::Arm(a) | Action::Mixed { arm: a, .. } => Some(*a),
            Action::Point(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientKind {
    Exact,
    Noisy,
    ZerothOrder,
}

/// A (possibly estimated) negative gradient `v = −∇ℓ` handed to a learner.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub vector: Vec<f64>,
    pub kind: GradientKind,
    /// Bound `V²` on `E‖v‖²` when known.
    pub second_moment: Option<f64>,
    /// Exploration radius for zeroth-order estimates.
    pub delta: Option<f64>,
}

impl GradientSample {
    pub fn exact(vector: Vec<f64>) -> Self {
        Self {
            vector,
            kind: GradientKind::Exact,
            second_moment: None,
            delta: None,
        }
    }
}

/// Feedback revealed to the learner after it acts.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback {
    pub round: usize,
    /// Loss of the action actually played (the drawn arm for mixed actions).
    pub loss: f64,
    /// Full payoff vector, on full-information bandit streams.
    pub payoffs: Option<Vec<f64>>,
    /// Negative gradient at the played point, on first-order streams.
    pub gradient: Option<GradientSample>,
}

/// A single-owner online learner. Rounds alternate strictly between
/// [`Learner::act`] and [`Learner::observe`].
pub trait Learner: Send {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action>;

    fn observe(&mut self, feedback: &Feedback, rng: &mut dyn RngCore) -> Result<()>;
}

impl<L: Learner + ?Sized> Learner for Box<L> {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        (**self).act(rng)
    }

    fn observe(&mut self, feedback: &Feedback, rng: &mut dyn RngCore) -> Result<()> {
        (**self).observe(feedback, rng)
    }
}
