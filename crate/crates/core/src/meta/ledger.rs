use crate::error::{check_dim, Error, Result};
use crate::geometry::{ActionSet, Point};
use crate::learner::Action;
use crate::loss::{AggregateLoss, LossFunction};

use super::offline::{self, SolverOptions};

/// One round as seen by the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub action: Action,
    /// Loss charged to the learner: the expected loss for mixed actions.
    pub loss: f64,
    /// Loss of the arm actually drawn (equal to `loss` for pure actions).
    pub realized_loss: f64,
    pub minimum: Option<f64>,
}

/// Running regret bookkeeping for one trial.
///
/// Discrete actions are vertices of the simplex over arms, so bandit streams
/// are linear losses `−⟨u, x⟩` and mixed strategies are charged their
/// expected loss. The variation budget uses the sup-norm over the set:
/// exact through the support function for consecutive linear losses, and a
/// maximum over [`ActionSet::probe_points`] otherwise.
#[derive(Debug, Clone)]
pub struct RegretLedger {
    set: ActionSet,
    rounds: usize,
    cum_loss: f64,
    cum_realized: f64,
    cum_minimum: f64,
    minima_complete: bool,
    aggregate: AggregateLoss,
    variation: f64,
    track_variation: bool,
    previous: Option<LossFunction>,
    probes: Option<Vec<Point>>,
    records: Option<Vec<RoundRecord>>,
    solver: SolverOptions,
    warm_start: Option<Point>,
}

const PROBE_COUNT: usize = 64;

impl RegretLedger {
    pub fn new(set: ActionSet) -> Self {
        let dim = set.dim();
        Self {
            set,
            rounds: 0,
            cum_loss: 0.0,
            cum_realized: 0.0,
            cum_minimum: 0.0,
            minima_complete: true,
            aggregate: AggregateLoss::new(dim),
            variation: 0.0,
            track_variation: true,
            previous: None,
            probes: None,
            records: None,
            solver: SolverOptions::default(),
            warm_start: None,
        }
    }

    /// Keeps every [`RoundRecord`].
    pub fn with_records(mut self) -> Self {
        self.records = Some(Vec::new());
        self
    }

    pub fn without_variation(mut self) -> Self {
        self.track_variation = false;
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn set(&self) -> &ActionSet {
        &self.set
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn cumulative_loss(&self) -> f64 {
        self.cum_loss
    }

    pub fn realized_cumulative_loss(&self) -> f64 {
        self.cum_realized
    }

    pub fn aggregate(&self) -> &AggregateLoss {
        &self.aggregate
    }

    pub fn records(&self) -> Option<&[RoundRecord]> {
        self.records.as_deref()
    }

    fn point_of(&self, action: &Action) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let vertex = |a: usize| -> Result<Vec<f64>> {
            let arms = self.set.dim();
            if a >= arms {
                return Err(Error::ArmOutOfRange { arm: a, arms });
            }
            let mut e = vec![0.0; arms];
            e[a] = 1.0;
            Ok(e)
        };
        Ok(match action {
            Action::Arm(a) => (vertex(*a)?, None),
            Action::Mixed { strategy, arm } => (strategy.clone(), Some(vertex(*arm)?)),
            Action::Point(p) => (p.to_vec(), None),
        })
    }

    /// Charges round `round` and returns the charged loss.
    pub fn record(
        &mut self,
        round: usize,
        action: &Action,
        loss: &LossFunction,
        minimum: Option<f64>,
    ) -> Result<f64> {
        if round != self.rounds + 1 {
            return Err(Error::OutOfOrder {
                expected: self.rounds + 1,
                actual: round,
            });
        }
        check_dim(self.set.dim(), loss.dim())?;
        let (x, drawn) = self.point_of(action)?;
        let charged = loss.value(&x)?;
        let realized = match &drawn {
            Some(e) => loss.value(e)?,
            None => charged,
        };
        if !charged.is_finite() || !realized.is_finite() {
            return Err(Error::NonFinite("charged loss"));
        }
        self.aggregate.add(loss, 1.0)?;
        if self.track_variation {
            if let Some(prev) = self.previous.take() {
                self.variation += self.sup_distance(&prev, loss)?;
            }
            self.previous = Some(loss.clone());
        }
        match minimum {
            Some(m) => self.cum_minimum += m,
            None => self.minima_complete = false,
        }
        self.rounds = round;
        self.cum_loss += charged;
        self.cum_realized += realized;
        if let Some(r) = &mut self.records {
            r.push(RoundRecord {
                round,
                action: action.clone(),
                loss: charged,
                realized_loss: realized,
                minimum,
            });
        }
        Ok(charged)
    }

    /// `sup_x |a(x) − b(x)|` over the set.
    pub fn sup_distance(&mut self, a: &LossFunction, b: &LossFunction) -> Result<f64> {
        if let (
            LossFunction::Linear {
                grad: ga,
                offset: oa,
            },
            LossFunction::Linear {
                grad: gb,
                offset: ob,
            },
        ) = (a, b)
        {
            let diff: Vec<f64> = ga.iter().zip(gb).map(|(x, y)| x - y).collect();
            let off = oa - ob;
            let (_, lo) = self.set.support_extreme(&diff)?;
            let neg: Vec<f64> = diff.iter().map(|v| -v).collect();
            let (_, hi) = self.set.support_extreme(&neg)?;
            return Ok((lo + off).abs().max((off - hi).abs()));
        }
        if self.probes.is_none() {
            self.probes = Some(self.set.probe_points(PROBE_COUNT));
        }
        let mut worst = 0.0f64;
        for p in self.probes.as_ref().into_iter().flatten() {
            worst = worst.max((a.value(p)? - b.value(p)?).abs());
        }
        Ok(worst)
    }

    pub fn variation_budget(&self) -> f64 {
        self.variation
    }

    /// Best fixed action in hindsight and its cumulative loss.
    pub fn hindsight_minimum(&mut self) -> Result<(Point, f64)> {
        let sol = offline::minimize(
            &self.aggregate,
            &self.set,
            self.warm_start.as_ref(),
            &self.solver,
        )?;
        self.warm_start = Some(sol.0.clone());
        Ok(sol)
    }

    pub fn static_regret(&mut self) -> Result<f64> {
        if self.rounds == 0 {
            return Ok(0.0);
        }
        let (_, best) = self.hindsight_minimum()?;
        Ok(self.cum_loss - best)
    }

    /// Regret of the realized draws against the best fixed action.
    pub fn realized_static_regret(&mut self) -> Result<f64> {
        if self.rounds == 0 {
            return Ok(0.0);
        }
        let (_, best) = self.hindsight_minimum()?;
        Ok(self.cum_realized - best)
    }

    pub fn has_minima(&self) -> bool {
        self.minima_complete
    }

    pub fn dynamic_regret(&self) -> Result<f64> {
        if !self.minima_complete {
            return Err(Error::Ledger(
                "a round is missing its per-round minimum".into(),
            ));
        }
        Ok(self.cum_loss - self.cum_minimum)
    }
}

/// Regret of the seed-averaged loss against the best fixed action for the
/// seed-averaged aggregate loss (average first, then minimize).
pub fn mean_regret(ledgers: &[RegretLedger]) -> Result<f64> {
    let first = ledgers
        .first()
        .ok_or_else(|| Error::Ledger("no ledgers to average".into()))?;
    if ledgers.iter().any(|l| l.rounds != first.rounds) {
        return Err(Error::Ledger("ledgers have unequal horizons".into()));
    }
    let w = 1.0 / ledgers.len() as f64;
    let mut avg = AggregateLoss::new(first.set.dim());
    let mut loss = 0.0;
    for l in ledgers {
        avg.merge(&l.aggregate, w)?;
        loss += w * l.cum_loss;
    }
    let (_, best) = offline::minimize(&avg, &first.set, None, &first.solver)?;
    Ok(loss - best)
}

/// Coordinate-wise mean of a nonempty list of points.
pub fn ergodic_average(points: &[Point]) -> Result<Point> {
    let first = points
        .first()
        .ok_or_else(|| Error::Ledger("ergodic average of no points".into()))?;
    let n = first.dim();
    let mut sum = vec![0.0; n];
    for p in points {
        check_dim(n, p.dim())?;
        for (s, v) in sum.iter_mut().zip(p.iter()) {
            *s += v;
        }
    }
    let k = points.len() as f64;
    Point::new(sum.into_iter().map(|s| s / k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simplex_ledger(d: usize) -> RegretLedger {
        RegretLedger::new(ActionSet::simplex(d).unwrap()).with_records()
    }

    #[test]
    fn bandit_enumeration_example() {
        let mut l = simplex_ledger(2);
        let payoffs = [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for (t, u) in payoffs.iter().enumerate() {
            l.record(t + 1, &Action::Arm(1), &LossFunction::from_payoffs(u), None)
                .unwrap();
        }
        assert_eq!(l.cumulative_loss(), -1.0);
        assert_eq!(l.static_regret().unwrap(), 1.0);
        assert_eq!(l.records().unwrap().len(), 3);
        assert!(l.dynamic_regret().is_err());
    }

    #[test]
    fn quadratic_example_and_stationary_dynamic() {
        let set = ActionSet::cube(1, 0.0, 1.0).unwrap();
        let mut l = RegretLedger::new(set);
        for (t, c) in [0.0, 1.0].into_iter().enumerate() {
            // (x − c)² = ½·2x² − 2c·x + c².
            let f = LossFunction::Quadratic {
                curvature: vec![2.0],
                linear: vec![2.0 * c],
                offset: c * c,
            };
            let min = f.minimize(l.set()).unwrap().map(|m| m.1);
            l.record(
                t + 1,
                &Action::Point(Point::new(vec![0.5]).unwrap()),
                &f,
                min,
            )
            .unwrap();
        }
        assert!((l.cumulative_loss() - 0.5).abs() < 1e-15);
        assert!(l.static_regret().unwrap().abs() < 1e-12);
        assert!((l.dynamic_regret().unwrap() - 0.5).abs() < 1e-15);

        let set = ActionSet::cube(1, 0.0, 1.0).unwrap();
        let mut s = RegretLedger::new(set);
        let f = LossFunction::Quadratic {
            curvature: vec![2.0],
            linear: vec![0.6],
            offset: 0.09,
        };
        for t in 1..=5 {
            let x = Point::new(vec![0.1 * t as f64]).unwrap();
            let m = f.minimize(s.set()).unwrap().map(|m| m.1);
            s.record(t, &Action::Point(x), &f, m).unwrap();
        }
        assert!((s.static_regret().unwrap() - s.dynamic_regret().unwrap()).abs() < 1e-12);
        assert_eq!(s.variation_budget(), 0.0);
    }

    #[test]
    fn alternating_vertices() {
        let mut l = simplex_ledger(2);
        let t_max = 10;
        for t in 1..=t_max {
            let u = if t % 2 == 1 { [1.0, 0.0] } else { [0.0, 1.0] };
            let f = LossFunction::from_payoffs(&u);
            let m = f.minimize(l.set()).unwrap().map(|m| m.1);
            let mixed = Action::Mixed {
                strategy: vec![0.5, 0.5],
                arm: 0,
            };
            l.record(t, &mixed, &f, m).unwrap();
        }
        assert!((l.variation_budget() - (t_max - 1) as f64).abs() < 1e-15);
        assert!(l.dynamic_regret().unwrap() > l.static_regret().unwrap());
        assert_eq!(l.realized_cumulative_loss(), -5.0);
    }

    #[test]
    fn ball_variation_matches_cauchy_schwarz() {
        let set = ActionSet::ball(vec![0.0, 0.0], 2.0).unwrap();
        let mut l = RegretLedger::new(set);
        let a = LossFunction::linear(vec![1.0, 0.0]);
        let b = LossFunction::linear(vec![0.0, 1.0]);
        assert!((l.sup_distance(&a, &b).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn order_and_errors() {
        let mut l = simplex_ledger(2);
        let f = LossFunction::from_payoffs(&[1.0, 0.0]);
        assert!(matches!(
            l.record(2, &Action::Arm(0), &f, None),
            Err(Error::OutOfOrder { .. })
        ));
        assert!(matches!(
            l.record(1, &Action::Arm(5), &f, None),
            Err(Error::ArmOutOfRange { .. })
        ));
        let mut a = simplex_ledger(2);
        a.record(1, &Action::Arm(0), &f, None).unwrap();
        let b = simplex_ledger(2);
        assert!(mean_regret(&[a.clone(), b]).is_err());
        assert!((mean_regret(&[a.clone()]).unwrap() - a.static_regret().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn ergodic_examples() {
        let s = ActionSet::simplex(2).unwrap();
        let pts = vec![
            Point::new(vec![0.0, 1.0]).unwrap(),
            Point::new(vec![1.0, 0.0]).unwrap(),
        ];
        let avg = ergodic_average(&pts).unwrap();
        assert_eq!(avg.as_slice(), &[0.5, 0.5]);
        assert!(s.contains(&avg, 1e-15));
        assert_eq!(ergodic_average(&pts[..1]).unwrap(), pts[0]);
        assert!(ergodic_average(&[]).is_err());
    }

    proptest! {
        #[test]
        fn dynamic_dominates_static(
            rounds in proptest::collection::vec(
                (proptest::collection::vec(-1.0f64..1.0, 3), proptest::collection::vec(0.0f64..1.0, 3)), 1..30)
        ) {
            let mut l = simplex_ledger(3);
            for (t, (u, raw)) in rounds.iter().enumerate() {
                let total: f64 = raw.iter().sum::<f64>() + 1e-9;
                let x: Vec<f64> = raw.iter().map(|v| (v + 1e-9 / 3.0) / total).collect();
                let f = LossFunction::from_payoffs(u);
                let m = f.minimize(l.set()).unwrap().map(|m| m.1);
                l.record(t + 1, &Action::Point(Point::new(x).unwrap()), &f, m).unwrap();
            }
            let s = l.static_regret().unwrap();
            prop_assert!(l.dynamic_regret().unwrap() >= s - 1e-12);
            if rounds.len() == 1 {
                prop_assert!((l.dynamic_regret().unwrap() - s).abs() < 1e-12);
                prop_assert!(s >= -1e-12);
            }
        }
    }
}
