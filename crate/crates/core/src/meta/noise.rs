use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::learner::{Action, Feedback, GradientKind, GradientSample, Learner};

/// Zero-mean additive gradient noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    Gaussian {
        sigma: f64,
    },
    /// Independent uniform noise on `[−b, b]` per coordinate.
    Uniform {
        half_width: f64,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::Gaussian { sigma: s } | NoiseModel::Uniform { half_width: s } => {
                if s >= 0.0 && s.is_finite() {
                    Ok(())
                } else {
                    Err(invalid(
                        "noise",
                        format!("scale must be nonnegative, got {s}"),
                    ))
                }
            }
        }
    }

    /// `V² = ‖g‖²_max + E‖noise‖²` in dimension `d`.
    pub fn second_moment(&self, grad_norm_sq_bound: f64, d: usize) -> f64 {
        let d = d as f64;
        grad_norm_sq_bound
            + match *self {
                NoiseModel::None => 0.0,
                NoiseModel::Gaussian { sigma } => d * sigma * sigma,
                NoiseModel::Uniform { half_width } => d * half_width * half_width / 3.0,
            }
    }

    pub fn sample(&self, d: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        match *self {
            NoiseModel::None => vec![0.0; d],
            NoiseModel::Gaussian { sigma } => {
                let n = Normal::new(0.0, sigma).expect("validated sigma");
                (0..d).map(|_| n.sample(&mut *rng)).collect()
            }
            NoiseModel::Uniform { half_width } => (0..d)
                .map(|_| {
                    if half_width == 0.0 {
                        0.0
                    } else {
                        rng.random_range(-half_width..=half_width)
                    }
                })
                .collect(),
        }
    }
}

/// Perturbs an exact gradient by the model's noise. Model `None` returns the
/// exact gradient and draws nothing from `rng`.
pub fn noisy_oracle(
    true_gradient: &[f64],
    model: &NoiseModel,
    grad_norm_sq_bound: f64,
    rng: &mut dyn RngCore,
) -> GradientSample {
    if let NoiseModel::None = model {
        return GradientSample::exact(true_gradient.to_vec());
    }
    let noise = model.sample(true_gradient.len(), rng);
    GradientSample {
        vector: true_gradient
            .iter()
            .zip(noise)
            .map(|(g, n)| g + n)
            .collect(),
        kind: GradientKind::Noisy,
        second_moment: Some(model.second_moment(grad_norm_sq_bound, true_gradient.len())),
        delta: None,
    }
}

/// Replaces the gradient in every feedback with a noisy version.
#[derive(Debug, Clone)]
pub struct NoisyFeedback<L> {
    inner: L,
    model: NoiseModel,
    grad_norm_sq_bound: f64,
}

impl<L: Learner> NoisyFeedback<L> {
    pub fn new(inner: L, model: NoiseModel, grad_norm_sq_bound: f64) -> Result<Self> {
        model.validate()?;
        Ok(Self {
            inner,
            model,
            grad_norm_sq_bound,
        })
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }
}

impl<L: Learner> Learner for NoisyFeedback<L> {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        self.inner.act(rng)
    }

    fn observe(&mut self, feedback: &Feedback, rng: &mut dyn RngCore) -> Result<()> {
        match (&self.model, &feedback.gradient) {
            (NoiseModel::None, _) | (_, None) => self.inner.observe(feedback, rng),
            (model, Some(g)) => {
                let mut noisy = feedback.clone();
                noisy.gradient = Some(noisy_oracle(&g.vector, model, self.grad_norm_sq_bound, rng));
                self.inner.observe(&noisy, rng)
            }
        }
    }
}
