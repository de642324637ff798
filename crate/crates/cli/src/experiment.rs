//! Learner construction, step-size tuning and the trial runner.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use noregret::bandit::{Exp3, Hedge, Ucb};
use noregret::meta::{Doubling, LearnerFactory, NoiseModel, NoisyFeedback, Restart};
use noregret::oco::{MirrorLearner, MirrorMode, Ogd, StepSchedule};
use noregret::tuning::{doubling_factor, regret_bound, tune_step_size, Theorem, TuningParams};
use noregret::zeroth::Ogd0;
use noregret::{
    run_trial_with, ActionSet, Environment, EnvironmentSpec, Learner, RegretLedger, Regularizer,
    RegularizerKind, SetKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Algorithm, ExperimentConfig, LearnerSpec, ModeChoice, RegularizerChoice};
use crate::report::fmt_f64;
use crate::{CliError, ConfigError};

/// Everything needed to build a learner for a given horizon. Cheap to clone
/// into wrapper factories.
#[derive(Debug, Clone)]
pub struct Blueprint {
    pub learner: LearnerSpec,
    pub environment: EnvironmentSpec,
    pub set: ActionSet,
    pub noise: Option<NoiseModel>,
}

/// Step sizes and bound resolved for the full horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub theorem: Option<Theorem>,
    pub schedule: Option<StepSchedule>,
    pub delta: Option<f64>,
    pub bound: Option<f64>,
}

pub fn theorem_name(t: Theorem) -> &'static str {
    match t {
        Theorem::Ucb => "ucb",
        Theorem::Ew => "ew",
        Theorem::Exp3 => "ew_partial",
        Theorem::Ogd => "ogd",
        Theorem::OgdStrong => "ogd_strong",
        Theorem::Omd => "omd",
        Theorem::OgdNoisy => "ogd_noisy",
        Theorem::Ogd0 => "ogd0",
    }
}

impl Blueprint {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, ConfigError> {
        let set = cfg
            .environment
            .action_set()
            .map_err(|e| ConfigError::Invalid(format!("environment: {e}")))?;
        let noise = cfg.wrappers.noise.map(|n| n.model());
        if noise.is_some()
            && matches!(
                cfg.learner.algorithm,
                Algorithm::Ucb | Algorithm::Hedge | Algorithm::Exp3 | Algorithm::Ogd0
            )
        {
            return Err(ConfigError::Invalid(format!(
                "wrappers.noise: {} does not consume gradients",
                cfg.learner.algorithm.name()
            )));
        }
        let bp = Self {
            learner: cfg.learner.clone(),
            environment: cfg.environment.clone(),
            set,
            noise,
        };
        bp.regularizer()
            .map_err(|e| ConfigError::Invalid(format!("learner: {e}")))?;
        Ok(bp)
    }

    fn algorithm(&self) -> Algorithm {
        self.learner.algorithm
    }

    fn regularizer_choice(&self) -> Option<RegularizerChoice> {
        match self.algorithm() {
            Algorithm::Omd | Algorithm::Mxl => {
                Some(self.learner.regularizer.unwrap_or(match self.set.kind() {
                    SetKind::Simplex { .. } => RegularizerChoice::Entropy,
                    SetKind::Spectrahedron { .. } => RegularizerChoice::VonNeumann,
                    _ => RegularizerChoice::Euclidean,
                }))
            }
            _ => None,
        }
    }

    fn regularizer(&self) -> noregret::Result<Option<Regularizer>> {
        Ok(match self.regularizer_choice() {
            None => None,
            Some(RegularizerChoice::Euclidean) => Some(Regularizer::euclidean(self.set.clone())),
            Some(RegularizerChoice::Entropy) => {
                Some(Regularizer::negative_entropy(self.set.clone())?)
            }
            Some(RegularizerChoice::VonNeumann) => {
                Some(Regularizer::von_neumann(self.set.clone())?)
            }
        })
    }

    fn theorem(&self) -> Theorem {
        match self.algorithm() {
            Algorithm::Ucb => Theorem::Ucb,
            Algorithm::Hedge => Theorem::Ew,
            Algorithm::Exp3 => Theorem::Exp3,
            Algorithm::Ogd if self.noise.is_some() => Theorem::OgdNoisy,
            Algorithm::Ogd => Theorem::Ogd,
            Algorithm::OgdStrong => Theorem::OgdStrong,
            Algorithm::Omd | Algorithm::Mxl => Theorem::Omd,
            Algorithm::Ogd0 => Theorem::Ogd0,
        }
    }

    fn beta(&self) -> Option<f64> {
        self.learner.beta.or(match &self.environment {
            EnvironmentSpec::QuadraticStream { beta, .. } => Some(*beta),
            _ => None,
        })
    }

    /// Problem constants known from the config, for horizon `horizon`.
    pub fn params(&self, horizon: usize) -> TuningParams {
        let env = &self.environment;
        let reg = self.regularizer().ok().flatten();
        let lipschitz = match reg.as_ref().map(Regularizer::kind) {
            Some(RegularizerKind::NegativeEntropy) | Some(RegularizerKind::VonNeumann) => {
                env.dual_lipschitz()
            }
            _ => env.euclidean_lipschitz(),
        };
        let moment = match (self.noise, env.euclidean_lipschitz()) {
            (Some(model), Some(l)) => Some(model.second_moment(l * l, self.set.dim()).sqrt()),
            _ => None,
        };
        TuningParams {
            horizon: Some(horizon as f64),
            arms: env.arms().map(|a| a as f64),
            diameter: Some(self.set.diameter()),
            lipschitz,
            strong_convexity: reg.as_ref().map(Regularizer::strong_convexity),
            value_range: reg.as_ref().map(Regularizer::value_range),
            moment,
            max_norm: Some(self.set.max_norm()),
            max_loss: env.max_loss(),
            dim: Some(self.set.tangent_dim() as f64),
            beta: self.beta(),
            alpha: Some(self.alpha()),
            gaps: env.gaps(),
        }
    }

    fn alpha(&self) -> f64 {
        self.learner.alpha.unwrap_or(3.0)
    }

    /// Resolves step sizes for `horizon`, tuning whatever is set to `auto`.
    pub fn resolve(&self, horizon: usize) -> noregret::Result<Resolved> {
        let theorem = self.theorem();
        let params = self.params(horizon);
        let spec = &self.learner;
        let given = spec.step_size.value();
        let tuned = match self.algorithm() {
            Algorithm::Ucb => None,
            Algorithm::Ogd0 if given.is_none() || spec.delta.value().is_none() => {
                Some(tune_step_size(theorem, &params)?)
            }
            _ if given.is_none() => Some(tune_step_size(theorem, &params)?),
            _ => None,
        };
        let schedule = match self.algorithm() {
            Algorithm::Ucb => None,
            _ => Some(match given {
                Some(g) => StepSchedule::Constant(g),
                None => tuned.expect("tuned when no step size is given").schedule,
            }),
        };
        let delta = match self.algorithm() {
            Algorithm::Ogd0 => Some(match spec.delta.value() {
                Some(d) => d,
                None => tuned
                    .and_then(|t| t.delta)
                    .expect("tuned exploration radius"),
            }),
            _ => None,
        };
        let tuned_run = match self.algorithm() {
            Algorithm::Ucb => true,
            Algorithm::Ogd0 => given.is_none() && spec.delta.value().is_none(),
            _ => given.is_none(),
        };
        let bound = if tuned_run {
            regret_bound(theorem, &params).ok()
        } else {
            None
        };
        Ok(Resolved {
            theorem: Some(theorem),
            schedule,
            delta,
            bound,
        })
    }

    /// A fresh learner tuned for `horizon`.
    pub fn build(&self, horizon: usize) -> noregret::Result<Box<dyn Learner>> {
        let r = self.resolve(horizon)?;
        let schedule = r.schedule;
        let gamma = || match schedule {
            Some(StepSchedule::Constant(g)) => Ok(g),
            _ => Err(noregret::Error::Unsupported(
                "algorithm needs a constant step size".into(),
            )),
        };
        let base: Box<dyn Learner> = match self.algorithm() {
            Algorithm::Ucb => Box::new(Ucb::new(self.set.dim(), self.alpha())?),
            Algorithm::Hedge => Box::new(Hedge::new(self.set.dim(), gamma()?)?),
            Algorithm::Exp3 => Box::new(Exp3::new(self.set.dim(), gamma()?)?),
            Algorithm::Ogd | Algorithm::OgdStrong => Box::new(Ogd::new(
                self.set.clone(),
                schedule.expect("first-order schedule"),
            )?),
            Algorithm::Omd | Algorithm::Mxl => {
                let reg = self
                    .regularizer()?
                    .expect("mirror learners have a regularizer");
                let mode = match (self.learner.mode, self.algorithm()) {
                    (Some(ModeChoice::Agile), _) => MirrorMode::Agile,
                    (Some(ModeChoice::Lazy), _) | (None, Algorithm::Mxl) => MirrorMode::Lazy,
                    (None, _) => MirrorMode::Agile,
                };
                Box::new(MirrorLearner::new(
                    reg,
                    mode,
                    schedule.expect("mirror schedule"),
                )?)
            }
            Algorithm::Ogd0 => Box::new(Ogd0::new(
                self.set.clone(),
                gamma()?,
                r.delta.expect("exploration radius"),
            )?),
        };
        Ok(match (self.noise, self.environment.euclidean_lipschitz()) {
            (Some(model), l) => {
                Box::new(NoisyFeedback::new(base, model, l.map_or(0.0, |l| l * l))?)
            }
            (None, _) => base,
        })
    }
}

/// The learner for one trial, including window wrappers.
pub fn learner_for(cfg: &ExperimentConfig, bp: &Blueprint) -> noregret::Result<Box<dyn Learner>> {
    let factory = || -> LearnerFactory {
        let bp = bp.clone();
        Box::new(move |window: usize| bp.build(window))
    };
    Ok(match (cfg.wrappers.doubling, cfg.wrappers.restart) {
        (Some(d), _) => Box::new(Doubling::new(factory(), d.base_window)?),
        (None, Some(r)) => Box::new(Restart::new(factory(), r.window)?),
        (None, None) => bp.build(cfg.horizon)?,
    })
}

/// Regret bound of the configured run, when one applies.
pub fn run_bound(cfg: &ExperimentConfig, resolved: &Resolved) -> Option<f64> {
    if cfg.wrappers.restart.is_some() {
        return None;
    }
    match (cfg.wrappers.doubling, resolved.theorem) {
        (None, _) => resolved.bound,
        (
            Some(_),
            Some(Theorem::Ew | Theorem::Exp3 | Theorem::Ogd | Theorem::Omd | Theorem::OgdNoisy),
        ) => resolved.bound.map(|b| doubling_factor() * b),
        (Some(_), _) => None,
    }
}

/// Checks the whole config, including that auto-tuning has its constants.
pub fn plan(cfg: &ExperimentConfig) -> Result<(Blueprint, Resolved), ConfigError> {
    let bp = Blueprint::new(cfg)?;
    let resolved = bp
        .resolve(cfg.horizon)
        .map_err(|e| ConfigError::Invalid(format!("learner: {e}")))?;
    learner_for(cfg, &bp).map_err(|e| ConfigError::Invalid(format!("learner: {e}")))?;
    Ok((bp, resolved))
}

/// Final numbers of one trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub index: usize,
    pub seed: u64,
    pub cumulative_loss: f64,
    pub static_regret: f64,
    pub dynamic_regret: Option<f64>,
    pub variation_budget: f64,
    pub ledger: RegretLedger,
}

/// The learner's random stream for a trial, independent of the environment's.
pub fn learner_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn numerical(trial: usize, round: usize, message: impl ToString) -> CliError {
    CliError::Numerical {
        trial,
        round,
        message: message.to_string(),
    }
}

pub fn run_one(
    cfg: &ExperimentConfig,
    bp: &Blueprint,
    index: usize,
    seed: u64,
    trajectory: Option<&Path>,
) -> Result<TrialResult, CliError> {
    let mut env =
        Environment::new(cfg.environment.clone(), seed).map_err(|e| numerical(index, 0, e))?;
    let mut learner = learner_for(cfg, bp).map_err(|e| numerical(index, 0, e))?;
    let mut ledger = RegretLedger::new(env.set().clone());
    let mut rng = learner_rng(seed);
    let mut writer = match trajectory {
        Some(path) => {
            let f =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            writeln!(w, "round,loss,cum_loss,static_regret,dynamic_regret")
                .map_err(|e| CliError::Io(e.to_string()))?;
            Some(w)
        }
        None => None,
    };
    let stride = cfg.record_stride;
    let horizon = cfg.horizon;
    let mut io_error = None;
    run_trial_with(
        &mut env,
        &mut learner,
        &mut ledger,
        horizon,
        &mut rng,
        |o, ledger| {
            let Some(w) = writer.as_mut() else {
                return Ok(());
            };
            if o.round % stride != 0 && o.round != horizon {
                return Ok(());
            }
            let regret = ledger.static_regret()?;
            let dynamic = ledger
                .dynamic_regret()
                .ok()
                .map(fmt_f64)
                .unwrap_or_default();
            let line = format!(
                "{},{},{},{},{}",
                o.round,
                fmt_f64(o.loss),
                fmt_f64(ledger.cumulative_loss()),
                fmt_f64(regret),
                dynamic
            );
            if let Err(e) = writeln!(w, "{line}") {
                io_error.get_or_insert(e.to_string());
            }
            Ok(())
        },
    )
    .map_err(|f| numerical(index, f.round, f.source))?;
    if let Some(e) = io_error {
        return Err(CliError::Io(e));
    }
    if let Some(mut w) = writer {
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let static_regret = ledger
        .static_regret()
        .map_err(|e| numerical(index, horizon, e))?;
    Ok(TrialResult {
        index,
        seed,
        cumulative_loss: ledger.cumulative_loss(),
        static_regret,
        dynamic_regret: ledger.dynamic_regret().ok(),
        variation_budget: ledger.variation_budget(),
        ledger,
    })
}

pub fn trajectory_name(index: usize) -> String {
    format!("trajectory_{index:04}.csv")
}

/// Runs every trial, in parallel when configured. Results are in trial
/// order and do not depend on scheduling.
pub fn run_all(
    cfg: &ExperimentConfig,
    bp: &Blueprint,
    out_dir: Option<&Path>,
) -> Result<Vec<TrialResult>, CliError> {
    let seeds = cfg.trial_seeds();
    let job = |(i, &seed): (usize, &u64)| {
        let path = match (out_dir, cfg.output.trajectories) {
            (Some(dir), true) => Some(dir.join(trajectory_name(i))),
            _ => None,
        };
        run_one(cfg, bp, i, seed, path.as_deref())
    };
    let results: Vec<Result<TrialResult, CliError>> = if cfg.parallel {
        seeds.par_iter().enumerate().map(job).collect()
    } else {
        seeds.iter().enumerate().map(job).collect()
    };
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    const HEDGE: &str = r#"
schema_version = 1
horizon = 10000
[environment]
kind = "adversarial_payoffs"
arms = 10
pattern = "random_signs"
[learner]
algorithm = "hedge"
"#;

    #[test]
    fn hedge_auto_tune() {
        let c = cfg(HEDGE);
        let (_, r) = plan(&c).unwrap();
        let StepSchedule::Constant(g) = r.schedule.unwrap() else {
            panic!()
        };
        assert!((g - (2.0 * 10f64.ln() / 1e4).sqrt()).abs() < 1e-15);
        assert!((g - 0.021460).abs() < 5e-7);
        assert!((r.bound.unwrap() - 214.597).abs() < 1e-3);
    }

    #[test]
    fn ucb_bound_from_gaps() {
        let c = cfg(r#"
schema_version = 1
horizon = 10000
[environment]
kind = "bernoulli_bandit"
means = [0.9, 0.6]
[learner]
algorithm = "ucb"
alpha = 3.0
"#);
        let (_, r) = plan(&c).unwrap();
        let expect = 2.0 * 3.0 / 0.3 * 1e4f64.ln() + 3.0;
        assert!((r.bound.unwrap() - expect).abs() < 1e-9);
    }

    #[test]
    fn auto_tune_needs_constants() {
        let c = cfg(r#"
schema_version = 1
horizon = 100
[environment]
kind = "log_det_stream"
rows = 2
side = 2
[learner]
algorithm = "mxl"
"#);
        assert!(plan(&c).is_err());
        let given = cfg(&format!(
            "{}\nstep_size = 0.1\n",
            r#"
schema_version = 1
horizon = 100
[environment]
kind = "log_det_stream"
rows = 2
side = 2
[learner]
algorithm = "mxl""#
        ));
        let (_, r) = plan(&given).unwrap();
        assert_eq!(r.bound, None);
    }

    #[test]
    fn doubling_bound_inflates() {
        let text = format!("{HEDGE}\n[wrappers.doubling]\nbase_window = 100\n");
        let c = cfg(&text);
        let (_, r) = plan(&c).unwrap();
        let b = run_bound(&c, &r).unwrap();
        assert!((b - doubling_factor() * r.bound.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn serial_matches_parallel() {
        let mut c = cfg(&HEDGE.replace("horizon = 10000", "horizon = 300\ntrials = 6"));
        let bp = Blueprint::new(&c).unwrap();
        let par = run_all(&c, &bp, None).unwrap();
        c.parallel = false;
        let ser = run_all(&c, &bp, None).unwrap();
        let key = |v: &[TrialResult]| {
            v.iter()
                .map(|t| (t.seed, t.static_regret.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(key(&par), key(&ser));
    }
}
