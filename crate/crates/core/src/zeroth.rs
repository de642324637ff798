//! Single-point gradient estimation and projected descent on a shrunk set.

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, check_finite, invalid, Error, Result};
use crate::geometry::{ActionSet, Point};
use crate::learner::{Action, Feedback, Learner};
use crate::linalg::norm;

/// Uniform direction on the unit sphere of `R^d` (normalized Gaussian).
pub fn sample_unit_sphere(d: usize, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(invalid("d", "sphere dimension must be at least 1"));
    }
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut *rng)).collect();
        let n = norm(&g);
        if n > 0.0 {
            return Ok(g.into_iter().map(|v| v / n).collect());
        }
    }
}

/// Uniform unit direction inside the subspace parallel to the set's affine
/// hull, in ambient coordinates.
pub fn sample_tangent_direction(set: &ActionSet, rng: &mut dyn RngCore) -> Vec<f64> {
    loop {
        let g = set.tangent_gaussian(rng);
        let n = norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// `−(d/δ)·ℓ̂·z`.
pub fn spsa_estimate(d: usize, delta: f64, loss: f64, z: &[f64]) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    if !loss.is_finite() {
        return Err(Error::NonFinite("observed loss"));
    }
    let scale = -(d as f64) / delta * loss;
    Ok(z.iter().map(|v| scale * v).collect())
}

/// The set contracted toward its interior point so that `δ`-perturbations
/// stay feasible.
pub fn shrink_set(set: &ActionSet, delta: f64) -> Result<ActionSet> {
    set.shrink(delta)
}

/// Projected gradient descent driven by single-point loss observations.
///
/// The estimator uses the dimension of the set's affine hull, which is
/// `d − 1` on the simplex and `d(d+1)/2` on a `d × d` spectrahedron.
#[derive(Debug, Clone)]
pub struct Ogd0 {
    set: ActionSet,
    shrunk: ActionSet,
    pivot: Point,
    gamma: f64,
    delta: f64,
    direction: Option<Vec<f64>>,
}

impl Ogd0 {
    pub fn new(set: ActionSet, gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if !(delta > 0.0) {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        let shrunk = shrink_set(&set, delta)?;
        let pivot = shrunk.interior_point();
        Ok(Self {
            set,
            shrunk,
            pivot,
            gamma,
            delta,
            direction: None,
        })
    }

    /// Replaces the pivot with its projection onto the shrunk set.
    pub fn with_pivot(mut self, pivot: &[f64]) -> Result<Self> {
        self.pivot = self.shrunk.project(pivot)?;
        Ok(self)
    }

    pub fn pivot(&self) -> &Point {
        &self.pivot
    }

    pub fn shrunk_set(&self) -> &ActionSet {
        &self.shrunk
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn played(&self, z: &[f64]) -> Point {
        Point::from_raw(
            self.pivot
                .iter()
                .zip(z)
                .map(|(p, v)| p + self.delta * v)
                .collect(),
        )
    }

    /// Fixes the exploration direction for the current round and returns the
    /// played point `pivot + δz`.
    pub fn play_with_direction(&mut self, z: Vec<f64>) -> Result<Point> {
        check_dim(self.set.dim(), z.len())?;
        check_finite(&z, "exploration direction")?;
        let x = self.played(&z);
        self.direction = Some(z);
        Ok(x)
    }

    /// Feeds the loss observed at the played point into the pivot update.
    pub fn update(&mut self, loss: f64) -> Result<()> {
        let z = self
            .direction
            .take()
            .ok_or(Error::Uninitialized("no exploration direction drawn"))?;
        let v = spsa_estimate(self.set.tangent_dim(), self.delta, loss, &z)?;
        let y: Vec<f64> = self
            .pivot
            .iter()
            .zip(&v)
            .map(|(p, g)| p + self.gamma * g)
            .collect();
        self.pivot = self.shrunk.project(&y)?;
        Ok(())
    }

    /// One full round: update with `loss`, draw a fresh direction and return
    /// the next played point.
    pub fn ogd0_round(&mut self, loss: f64, rng: &mut dyn RngCore) -> Result<Point> {
        self.update(loss)?;
        let z = sample_tangent_direction(&self.set, rng);
        self.play_with_direction(z)
    }
}

impl Learner for Ogd0 {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        let z = sample_tangent_direction(&self.set, rng);
        Ok(Action::Point(self.play_with_direction(z)?))
    }

    fn observe(&mut self, feedback: &Feedback, _rng: &mut dyn RngCore) -> Result<()> {
        self.update(feedback.loss)
    }
}
