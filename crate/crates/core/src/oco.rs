//! Online gradient descent and online mirror descent.

use rand::RngCore;

use crate::error::{check_dim, check_finite, invalid, Error, Result};
use crate::geometry::{ActionSet, Point, Regularizer, RegularizerKind, SetKind};
use crate::learner::{Action, Feedback, Learner};
use crate::linalg;

/// Step sizes indexed by the round `t ≥ 1` whose feedback is being applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `γ_t = 1/(βt)`.
    StronglyConvex {
        beta: f64,
    },
    /// `γ_t = β/t`, the form printed alongside the logarithmic bound.
    BetaOverT {
        beta: f64,
    },
}

impl StepSchedule {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            StepSchedule::Constant(g) => ("gamma", g),
            StepSchedule::StronglyConvex { beta } | StepSchedule::BetaOverT { beta } => {
                ("beta", beta)
            }
        };
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(invalid(name, format!("must be positive, got {v}")))
        }
    }

    pub fn step(&self, t: usize) -> f64 {
        let t = t.max(1) as f64;
        match *self {
            StepSchedule::Constant(g) => g,
            StepSchedule::StronglyConvex { beta } => 1.0 / (beta * t),
            StepSchedule::BetaOverT { beta } => beta / t,
        }
    }
}

fn gradient_of(feedback: &Feedback) -> Result<&[f64]> {
    feedback
        .gradient
        .as_ref()
        .map(|g| g.vector.as_slice())
        .ok_or(Error::MissingFeedback(
            "first-order learner needs a gradient",
        ))
}

/// Projected online gradient descent `x ← Π(x + γ_t v)`.
#[derive(Debug, Clone)]
pub struct Ogd {
    set: ActionSet,
    x: Point,
    schedule: StepSchedule,
    t: usize,
}

impl Ogd {
    /// Starts from the set's interior point.
    pub fn new(set: ActionSet, schedule: StepSchedule) -> Result<Self> {
        let x = set.interior_point();
        Self::with_start(set, schedule, x)
    }

    pub fn with_start(set: ActionSet, schedule: StepSchedule, start: Point) -> Result<Self> {
        schedule.validate()?;
        check_dim(set.dim(), start.dim())?;
        if !set.contains(&start, 1e-10) {
            return Err(invalid("start", "initial point is infeasible"));
        }
        Ok(Self {
            set,
            x: start,
            schedule,
            t: 0,
        })
    }

    pub fn point(&self) -> &Point {
        &self.x
    }

    pub fn set(&self) -> &ActionSet {
        &self.set
    }

    pub fn ogd_step(&mut self, v: &[f64]) -> Result<&Point> {
        check_dim(self.set.dim(), v.len())?;
        check_finite(v, "gradient")?;
        self.t += 1;
        let gamma = self.schedule.step(self.t);
        let y: Vec<f64> = self.x.iter().zip(v).map(|(x, g)| x + gamma * g).collect();
        self.x = self.set.project(&y)?;
        Ok(&self.x)
    }
}

impl Learner for Ogd {
    fn act(&mut self, _rng: &mut dyn RngCore) -> Result<Action> {
        Ok(Action::Point(self.x.clone()))
    }

    fn observe(&mut self, feedback: &Feedback, _rng: &mut dyn RngCore) -> Result<()> {
        let v = gradient_of(feedback)?;
        self.ogd_step(v).map(drop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorMode {
    /// Prox step from the current primal point.
    Agile,
    /// Accumulate scores in the dual space, then apply the mirror map.
    Lazy,
}

/// Online mirror descent over a regularizer's set.
///
/// The entropic agile step on the simplex is `x′ ∝ x·exp(γv)`; the von
/// Neumann agile step solves the prox in closed form as
/// `mirror(∇h(X) + γV)`. The lazy von Neumann variant is matrix exponential
/// learning, `X = c·exp(Y)/(1 + tr exp Y)`.
#[derive(Debug, Clone)]
pub struct MirrorLearner {
    reg: Regularizer,
    mode: MirrorMode,
    schedule: StepSchedule,
    x: Point,
    scores: Vec<f64>,
    t: usize,
}

impl MirrorLearner {
    /// Agile Euclidean learners start at the set's interior point; all other
    /// configurations start at the mirror image of zero scores.
    pub fn new(reg: Regularizer, mode: MirrorMode, schedule: StepSchedule) -> Result<Self> {
        schedule.validate()?;
        let dim = reg.set().dim();
        let zeros = vec![0.0; dim];
        let x = match (mode, reg.kind()) {
            (MirrorMode::Agile, RegularizerKind::Euclidean) => reg.set().interior_point(),
            _ => reg.mirror(&zeros)?,
        };
        Ok(Self {
            reg,
            mode,
            schedule,
            x,
            scores: zeros,
            t: 0,
        })
    }

    /// Agile learner started from `start`, which must lie in the interior of
    /// the regularizer's domain.
    pub fn agile_from(reg: Regularizer, schedule: StepSchedule, start: Point) -> Result<Self> {
        let mut m = Self::new(reg, MirrorMode::Agile, schedule)?;
        check_dim(m.reg.set().dim(), start.dim())?;
        if m.reg.kind() != RegularizerKind::Euclidean {
            m.reg.gradient(&start)?;
        }
        m.x = start;
        Ok(m)
    }

    pub fn point(&self) -> &Point {
        &self.x
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn mode(&self) -> MirrorMode {
        self.mode
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.reg
    }

    fn checked_input(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.reg.set().dim(), v.len())?;
        check_finite(v, "gradient")?;
        match self.reg.set().kind() {
            SetKind::Spectrahedron { side, .. } => linalg::require_symmetric(v, *side),
            _ => Ok(v.to_vec()),
        }
    }

    /// `argmin_{x′} ⟨γv, x − x′⟩ + D_h(x′, x)`, for agile learners.
    pub fn mirror_prox_step(&mut self, v: &[f64]) -> Result<&Point> {
        if self.mode != MirrorMode::Agile {
            return Err(Error::Unsupported("prox step on a lazy learner".into()));
        }
        self.step(v)
    }

    /// `Y ← Y + γV`, `X = mirror(Y)` for lazy learners.
    pub fn mxl_step(&mut self, v: &[f64]) -> Result<&Point> {
        if self.mode != MirrorMode::Lazy {
            return Err(Error::Unsupported(
                "dual accumulation on an agile learner".into(),
            ));
        }
        self.step(v)
    }

    pub fn step(&mut self, v: &[f64]) -> Result<&Point> {
        let v = self.checked_input(v)?;
        self.t += 1;
        let gamma = self.schedule.step(self.t);
        match self.mode {
            MirrorMode::Lazy => {
                for (y, g) in self.scores.iter_mut().zip(&v) {
                    *y += gamma * g;
                }
                self.x = self.reg.mirror(&self.scores)?;
            }
            MirrorMode::Agile => {
                let base = match self.reg.kind() {
                    RegularizerKind::Euclidean => self.x.to_vec(),
                    RegularizerKind::NegativeEntropy => {
                        if self.x.iter().any(|&p| !(p > 0.0)) {
                            return Err(Error::BoundaryPoint);
                        }
                        self.x.iter().map(|p| p.ln()).collect()
                    }
                    RegularizerKind::VonNeumann => self.reg.gradient(&self.x)?,
                };
                let y: Vec<f64> = base.iter().zip(&v).map(|(b, g)| b + gamma * g).collect();
                self.x = self.reg.mirror(&y)?;
            }
        }
        Ok(&self.x)
    }
}

impl Learner for MirrorLearner {
    fn act(&mut self, _rng: &mut dyn RngCore) -> Result<Action> {
        Ok(Action::Point(self.x.clone()))
    }

    fn observe(&mut self, feedback: &Feedback, _rng: &mut dyn RngCore) -> Result<()> {
        let v = gradient_of(feedback)?;
        self.step(v).map(drop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::{logit_map, Hedge};
    use proptest::prelude::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn ogd_at(set: ActionSet, gamma: f64, x: Vec<f64>) -> Ogd {
        Ogd::with_start(set, StepSchedule::Constant(gamma), Point::new(x).unwrap()).unwrap()
    }

    #[test]
    fn ogd_examples() {
        let unit = || ActionSet::cube(1, 0.0, 1.0).unwrap();
        let mut a = ogd_at(unit(), 0.1, vec![0.5]);
        assert!((a.ogd_step(&[-1.0]).unwrap()[0] - 0.4).abs() < 1e-15);
        let mut b = ogd_at(unit(), 0.1, vec![0.05]);
        assert_eq!(b.ogd_step(&[-1.0]).unwrap().as_slice(), &[0.0]);
        let mut c = ogd_at(ActionSet::unit_ball(2).unwrap(), 0.5, vec![1.0, 0.0]);
        assert_eq!(c.ogd_step(&[1.0, 0.0]).unwrap().as_slice(), &[1.0, 0.0]);
        assert!(matches!(
            c.ogd_step(&[f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn schedules() {
        assert_eq!(StepSchedule::StronglyConvex { beta: 2.0 }.step(5), 0.1);
        assert_eq!(StepSchedule::BetaOverT { beta: 2.0 }.step(5), 0.4);
        assert!(StepSchedule::Constant(0.0).validate().is_err());
    }

    #[test]
    fn entropic_prox_examples() {
        let reg = Regularizer::negative_entropy(ActionSet::simplex(2).unwrap()).unwrap();
        let start = Point::new(vec![0.5, 0.5]).unwrap();
        let mut m =
            MirrorLearner::agile_from(reg.clone(), StepSchedule::Constant(1.0), start).unwrap();
        let x = m.mirror_prox_step(&[2f64.ln(), 0.0]).unwrap();
        assert!(close(x, &[2.0 / 3.0, 1.0 / 3.0], 1e-15));
        let before = x.to_vec();
        assert_eq!(
            m.mirror_prox_step(&[0.0, 0.0]).unwrap().as_slice(),
            &before[..]
        );
        let boundary = Point::new(vec![1.0, 0.0]).unwrap();
        assert!(MirrorLearner::agile_from(reg, StepSchedule::Constant(1.0), boundary).is_err());
    }

    #[test]
    fn euclidean_agile_is_ogd() {
        let set = ActionSet::ball(vec![0.2, -0.1], 0.7).unwrap();
        let reg = Regularizer::euclidean(set.clone());
        let mut m =
            MirrorLearner::new(reg, MirrorMode::Agile, StepSchedule::Constant(0.3)).unwrap();
        let mut o = Ogd::new(set, StepSchedule::Constant(0.3)).unwrap();
        for k in 0..50 {
            let v = [(k as f64).sin(), (k as f64 * 0.7).cos()];
            assert_eq!(m.step(&v).unwrap(), o.ogd_step(&v).unwrap());
        }
    }

    #[test]
    fn mxl_examples() {
        let reg = Regularizer::von_neumann(ActionSet::spectrahedron(2, 1.0).unwrap()).unwrap();
        let mut m = MirrorLearner::new(reg, MirrorMode::Lazy, StepSchedule::Constant(1.0)).unwrap();
        assert!(close(m.point(), &[1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0], 1e-15));
        let x = m.mxl_step(&[0.0; 4]).unwrap();
        assert!(close(x, &[1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0], 1e-15));
        let x = m.mxl_step(&[2f64.ln(), 0.0, 0.0, 0.0]).unwrap();
        assert!(close(x, &[0.5, 0.0, 0.0, 0.25], 1e-15));
        let aug = logit_map(&[2f64.ln(), 0.0, 0.0]);
        assert!((x[0] - aug[0]).abs() < 1e-15 && (x[3] - aug[1]).abs() < 1e-15);
        assert!(matches!(
            m.mxl_step(&[0.0, 1e-6, 0.0, 0.0]),
            Err(Error::Asymmetric(_))
        ));
        assert!(m.mxl_step(&[0.0, 1e-13, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn agile_and_lazy_entropy_agree() {
        let reg = Regularizer::negative_entropy(ActionSet::simplex(5).unwrap()).unwrap();
        let sched = StepSchedule::Constant(0.2);
        let mut agile = MirrorLearner::new(reg.clone(), MirrorMode::Agile, sched).unwrap();
        let mut lazy = MirrorLearner::new(reg, MirrorMode::Lazy, sched).unwrap();
        let mut hedge = Hedge::new(5, 0.2).unwrap();
        for k in 0..500 {
            let v: Vec<f64> = (0..5).map(|j| ((k * 7 + j * 3) as f64).sin()).collect();
            let a = agile.step(&v).unwrap().to_vec();
            let l = lazy.step(&v).unwrap().to_vec();
            let h = hedge.hedge_step(&v).unwrap();
            assert!(close(&a, &l, 1e-10));
            assert!(close(&a, &h, 1e-10));
        }
    }

    fn sym2() -> impl Strategy<Value = Vec<f64>> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b, o)| vec![a, o, o, b])
    }

    proptest! {
        #[test]
        fn iterates_stay_feasible(vs in proptest::collection::vec(sym2(), 1..30), gamma in 0.01f64..5.0) {
            let sp = ActionSet::spectrahedron(2, 1.0).unwrap();
            let vn = Regularizer::von_neumann(sp.clone()).unwrap();
            let mut lazy = MirrorLearner::new(vn.clone(), MirrorMode::Lazy, StepSchedule::Constant(gamma)).unwrap();
            let mut agile = MirrorLearner::new(vn, MirrorMode::Agile, StepSchedule::Constant(gamma)).unwrap();
            let mut ball = Ogd::new(ActionSet::unit_ball(4).unwrap(), StepSchedule::Constant(gamma)).unwrap();
            let mut proj = Ogd::new(sp.clone(), StepSchedule::Constant(gamma)).unwrap();
            for v in &vs {
                let x = lazy.step(v).unwrap().to_vec();
                prop_assert!(sp.contains(&x, 1e-10));
                prop_assert!(linalg::max_asymmetry(&x, 2) <= 1e-12);
                match agile.step(v) {
                    Ok(x) => prop_assert!(sp.contains(x, 1e-10)),
                    Err(e) => prop_assert_eq!(e, Error::BoundaryPoint),
                }
                let b = ball.ogd_step(v).unwrap().to_vec();
                prop_assert!(ball.set().contains(&b, 1e-10));
                prop_assert!(sp.contains(proj.ogd_step(v).unwrap(), 1e-10));
            }
        }

        // Score spreads stay below ~30 here; beyond ~36 the smallest
        // eigenvalue of X drops under the rounding error of reassembly.
        #[test]
        fn mxl_outputs_strictly_inside(vs in proptest::collection::vec(sym2(), 1..30), gamma in 0.01f64..0.25) {
            let vn = Regularizer::von_neumann(ActionSet::spectrahedron(2, 1.0).unwrap()).unwrap();
            let mut lazy = MirrorLearner::new(vn, MirrorMode::Lazy, StepSchedule::Constant(gamma)).unwrap();
            for v in &vs {
                let x = lazy.step(v).unwrap().to_vec();
                let s = linalg::sym_eigen(&x, 2).unwrap();
                prop_assert!(s.min().1 > 0.0 && s.max() < 1.0);
                prop_assert!(linalg::trace(&x, 2) < 1.0);
            }
        }
    }
}
