//! Theorem-driven step sizes and the matching regret bounds.

use crate::error::{invalid, Result};
use crate::oco::StepSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    Ucb,
    Ew,
    Exp3,
    Ogd,
    OgdStrong,
    Omd,
    OgdNoisy,
    Ogd0,
}

/// Problem constants; each theorem reads only the ones its formulas use.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TuningParams {
    pub horizon: Option<f64>,
    pub arms: Option<f64>,
    pub diameter: Option<f64>,
    pub lipschitz: Option<f64>,
    /// Strong convexity `K` of the regularizer.
    pub strong_convexity: Option<f64>,
    /// `max h − min h`.
    pub value_range: Option<f64>,
    /// Second-moment bound `V` (so that `E‖v̂‖² ≤ V²`).
    pub moment: Option<f64>,
    /// `B = max ‖x‖`.
    pub max_norm: Option<f64>,
    pub max_loss: Option<f64>,
    pub dim: Option<f64>,
    /// Strong convexity `β` of the losses.
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    /// Mean gaps of the suboptimal arms.
    pub gaps: Option<Vec<f64>>,
}

impl TuningParams {
    fn need(&self, name: &'static str, v: Option<f64>) -> Result<f64> {
        match v {
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(x) => Err(invalid(name, format!("must be positive, got {x}"))),
            None => Err(invalid(name, "required by the theorem")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub schedule: StepSchedule,
    /// Exploration radius, for zeroth-order methods.
    pub delta: Option<f64>,
}

impl Tuning {
    fn constant(gamma: f64) -> Self {
        Self {
            schedule: StepSchedule::Constant(gamma),
            delta: None,
        }
    }

    /// The constant step, when the schedule is constant.
    pub fn gamma(&self) -> Option<f64> {
        match self.schedule {
            StepSchedule::Constant(g) => Some(g),
            _ => None,
        }
    }
}

pub fn tune_step_size(theorem: Theorem, p: &TuningParams) -> Result<Tuning> {
    let t = || p.need("horizon", p.horizon);
    Ok(match theorem {
        Theorem::Ucb => return Err(invalid("theorem", "UCB has no step size")),
        Theorem::Ew => {
            let a = p.need("arms", p.arms)?;
            Tuning::constant((2.0 * a.ln() / t()?).sqrt())
        }
        Theorem::Exp3 => {
            let a = p.need("arms", p.arms)?;
            Tuning::constant((a.ln() / (a * t()?)).sqrt())
        }
        Theorem::Ogd => {
            let diam = p.need("diameter", p.diameter)?;
            let l = p.need("lipschitz", p.lipschitz)?;
            Tuning::constant(diam / l / t()?.sqrt())
        }
        Theorem::OgdStrong => Tuning {
            schedule: StepSchedule::StronglyConvex {
                beta: p.need("beta", p.beta)?,
            },
            delta: None,
        },
        Theorem::Omd => {
            let l = p.need("lipschitz", p.lipschitz)?;
            let k = p.need("strong_convexity", p.strong_convexity)?;
            let range = p.need("value_range", p.value_range)?;
            Tuning::constant((2.0 * k * range / t()?).sqrt() / l)
        }
        Theorem::OgdNoisy => {
            let diam = p.need("diameter", p.diameter)?;
            let v = p.need("moment", p.moment)?;
            Tuning::constant(diam / (v * v * t()?).sqrt())
        }
        Theorem::Ogd0 => {
            let b = p.need("max_norm", p.max_norm)?;
            let d = p.need("dim", p.dim)?;
            let lmax = p.need("max_loss", p.max_loss)?;
            let l = p.need("lipschitz", p.lipschitz)?;
            let horizon = t()?;
            let delta = horizon.powf(-0.25) * (d * b * lmax / (3.0 * l)).sqrt();
            let gamma = (2.0 * horizon).powf(-0.5) * b / (d * (lmax / delta + l));
            Tuning {
                schedule: StepSchedule::Constant(gamma),
                delta: Some(delta),
            }
        }
    })
}

/// The theorem's regret bound at the tuned parameters. For OGD-0 only the
/// rate `√(dL)·T^{3/4}` is known, and it is returned with unit constant.
pub fn regret_bound(theorem: Theorem, p: &TuningParams) -> Result<f64> {
    let t = || p.need("horizon", p.horizon);
    Ok(match theorem {
        Theorem::Ucb => {
            let alpha = p.need("alpha", p.alpha)?;
            if alpha <= 2.0 {
                return Err(invalid("alpha", "must exceed 2"));
            }
            let gaps = p
                .gaps
                .as_ref()
                .ok_or(invalid("gaps", "required by the theorem"))?;
            let log_t = t()?.ln();
            let mut total = 0.0;
            for &g in gaps {
                let g = p.need("gaps", Some(g))?;
                total += 2.0 * alpha / g * log_t + alpha / (alpha - 2.0);
            }
            total
        }
        Theorem::Ew => (2.0 * t()? * p.need("arms", p.arms)?.ln()).sqrt(),
        Theorem::Exp3 => {
            let a = p.need("arms", p.arms)?;
            2.0 * (a * t()? * a.ln()).sqrt()
        }
        Theorem::Ogd => {
            p.need("diameter", p.diameter)? * p.need("lipschitz", p.lipschitz)? * t()?.sqrt()
        }
        Theorem::OgdStrong => {
            let l = p.need("lipschitz", p.lipschitz)?;
            0.5 * l * l / p.need("beta", p.beta)? * t()?.ln()
        }
        Theorem::Omd => {
            let l = p.need("lipschitz", p.lipschitz)?;
            let k = p.need("strong_convexity", p.strong_convexity)?;
            let range = p.need("value_range", p.value_range)?;
            2.0 * l * (range / (2.0 * k) * t()?).sqrt()
        }
        Theorem::OgdNoisy => {
            p.need("diameter", p.diameter)? * p.need("moment", p.moment)? * t()?.sqrt()
        }
        Theorem::Ogd0 => {
            let d = p.need("dim", p.dim)?;
            let l = p.need("lipschitz", p.lipschitz)?;
            (d * l).sqrt() * t()?.powf(0.75)
        }
    })
}

/// Exponential-weights bound `log A/γ + γT/2` at an arbitrary step.
pub fn ew_bound_at(arms: f64, gamma: f64, horizon: f64) -> f64 {
    arms.ln() / gamma + 0.5 * gamma * horizon
}

/// Importance-sampled exponential-weights bound `log A/γ + γAT`.
pub fn exp3_bound_at(arms: f64, gamma: f64, horizon: f64) -> f64 {
    arms.ln() / gamma + gamma * arms * horizon
}

/// Worst-case inflation of a `M√T` bound under window doubling.
pub fn doubling_factor() -> f64 {
    2.0 / (2f64.sqrt() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> TuningParams {
        TuningParams {
            horizon: Some(1e4),
            ..Default::default()
        }
    }

    #[test]
    fn ogd_step_example() {
        let p = TuningParams {
            diameter: Some(2.0),
            lipschitz: Some(1.0),
            ..base()
        };
        assert!((tune_step_size(Theorem::Ogd, &p).unwrap().gamma().unwrap() - 0.02).abs() < 1e-15);
        assert!((regret_bound(Theorem::Ogd, &p).unwrap() - 200.0).abs() < 1e-12);
    }

    #[test]
    fn ew_step_and_bound() {
        let p = TuningParams {
            arms: Some(10.0),
            ..base()
        };
        let g = tune_step_size(Theorem::Ew, &p).unwrap().gamma().unwrap();
        assert!((g - 0.021_459_660_262_893_5).abs() < 1e-12);
        let b = regret_bound(Theorem::Ew, &p).unwrap();
        assert!((b - 214.596_602_628_934_7).abs() < 1e-9);
        // The tuned step minimizes log A/γ + γT/2, where it equals the bound.
        assert!((ew_bound_at(10.0, g, 1e4) - b).abs() < 1e-9);
        assert!(ew_bound_at(10.0, 1.1 * g, 1e4) > b && ew_bound_at(10.0, 0.9 * g, 1e4) > b);
    }

    #[test]
    fn exp3_bound_matches_optimized_form() {
        let p = TuningParams {
            arms: Some(10.0),
            ..base()
        };
        let g = tune_step_size(Theorem::Exp3, &p).unwrap().gamma().unwrap();
        let b = regret_bound(Theorem::Exp3, &p).unwrap();
        assert!((exp3_bound_at(10.0, g, 1e4) - b).abs() < 1e-9);
        assert!((b - 959.7).abs() < 0.05);
    }

    #[test]
    fn ucb_bound_example() {
        let p = TuningParams {
            alpha: Some(3.0),
            gaps: Some(vec![0.3]),
            ..base()
        };
        let b = regret_bound(Theorem::Ucb, &p).unwrap();
        assert!((b - (20.0 * 1e4f64.ln() + 3.0)).abs() < 1e-12);
        assert!((b - 187.2).abs() < 0.05);
    }

    #[test]
    fn omd_reduces_to_ogd() {
        // Euclidean regularizer: K = 1 and range diam²/2.
        let diam = 2.0;
        let p = TuningParams {
            diameter: Some(diam),
            lipschitz: Some(1.0),
            strong_convexity: Some(1.0),
            value_range: Some(diam * diam / 2.0),
            ..base()
        };
        let omd = tune_step_size(Theorem::Omd, &p).unwrap().gamma().unwrap();
        let ogd = tune_step_size(Theorem::Ogd, &p).unwrap().gamma().unwrap();
        assert!((omd - ogd).abs() < 1e-15);
        let bo = regret_bound(Theorem::Omd, &p).unwrap();
        assert!((bo - regret_bound(Theorem::Ogd, &p).unwrap()).abs() < 1e-9);
        // Entropic range log d gives L√(2T log d).
        let q = TuningParams {
            value_range: Some(8f64.ln()),
            ..p
        };
        let b = regret_bound(Theorem::Omd, &q).unwrap();
        assert!((b - (2.0 * 1e4 * 8f64.ln()).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn noisy_and_strong() {
        let p = TuningParams {
            diameter: Some(2.0),
            moment: Some(2.0),
            lipschitz: Some(2.0),
            beta: Some(1.0),
            ..base()
        };
        assert!(
            (tune_step_size(Theorem::OgdNoisy, &p)
                .unwrap()
                .gamma()
                .unwrap()
                - 0.01)
                .abs()
                < 1e-15
        );
        assert!((regret_bound(Theorem::OgdNoisy, &p).unwrap() - 400.0).abs() < 1e-12);
        let s = tune_step_size(Theorem::OgdStrong, &p).unwrap();
        assert_eq!(s.schedule, StepSchedule::StronglyConvex { beta: 1.0 });
        assert!((regret_bound(Theorem::OgdStrong, &p).unwrap() - 2.0 * 1e4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn ogd0_sequence() {
        let p = TuningParams {
            max_norm: Some(1.0),
            dim: Some(2.0),
            max_loss: Some(1.0),
            lipschitz: Some(1.0),
            ..base()
        };
        let tuned = tune_step_size(Theorem::Ogd0, &p).unwrap();
        let delta = tuned.delta.unwrap();
        assert!((delta - 0.1 * (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let gamma = tuned.gamma().unwrap();
        let expect = 1.0 / (2e4f64).sqrt() / (2.0 * (1.0 / delta + 1.0));
        assert!((gamma - expect).abs() < 1e-18);
        assert!((gamma - 2.6688e-4).abs() < 1e-8);
    }

    #[test]
    fn missing_or_bad_parameters() {
        assert!(tune_step_size(Theorem::Ew, &base()).is_err());
        let p = TuningParams {
            arms: Some(-1.0),
            ..base()
        };
        assert!(tune_step_size(Theorem::Ew, &p).is_err());
        assert!(tune_step_size(Theorem::Ucb, &p).is_err());
        assert!(regret_bound(
            Theorem::Ucb,
            &TuningParams {
                alpha: Some(3.0),
                ..base()
            }
        )
        .is_err());
    }

    #[test]
    fn doubling_constant() {
        assert!((doubling_factor() - 4.828_427_124_746_19).abs() < 1e-12);
    }
}
