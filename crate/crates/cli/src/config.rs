//! Experiment configuration files (TOML, `schema_version = 1`).

use std::path::{Path, PathBuf};

use noregret::meta::NoiseModel;
use noregret::EnvironmentSpec;
use serde::Deserialize;

use crate::ConfigError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub horizon: usize,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Explicit trial seeds; overrides `base_seed` and `trials` when set.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "one")]
    pub record_stride: usize,
    #[serde(default = "yes")]
    pub parallel: bool,
    pub environment: EnvironmentSpec,
    pub learner: LearnerSpec,
    #[serde(default)]
    pub wrappers: WrapperSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Ucb,
    Hedge,
    Exp3,
    Ogd,
    OgdStrong,
    Omd,
    Mxl,
    Ogd0,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ucb => "ucb",
            Algorithm::Hedge => "hedge",
            Algorithm::Exp3 => "exp3",
            Algorithm::Ogd => "ogd",
            Algorithm::OgdStrong => "ogd_strong",
            Algorithm::Omd => "omd",
            Algorithm::Mxl => "mxl",
            Algorithm::Ogd0 => "ogd0",
        }
    }

    pub fn is_bandit(self) -> bool {
        matches!(self, Algorithm::Ucb | Algorithm::Hedge | Algorithm::Exp3)
    }
}

/// A step size or exploration radius, either given or tuned from a theorem.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Tunable {
    Value(f64),
    Keyword(Auto),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Auto {
    Auto,
}

impl Default for Tunable {
    fn default() -> Self {
        Tunable::Keyword(Auto::Auto)
    }
}

impl Tunable {
    pub fn value(self) -> Option<f64> {
        match self {
            Tunable::Value(v) => Some(v),
            Tunable::Keyword(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerChoice {
    Euclidean,
    Entropy,
    VonNeumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeChoice {
    Agile,
    Lazy,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub step_size: Tunable,
    /// UCB exploration exponent.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Loss strong convexity for `ogd_strong`; read from the environment when absent.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Exploration radius for `ogd0`.
    #[serde(default)]
    pub delta: Tunable,
    #[serde(default)]
    pub regularizer: Option<RegularizerChoice>,
    #[serde(default)]
    pub mode: Option<ModeChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    Gaussian { sigma: f64 },
    Uniform { half_width: f64 },
}

impl NoiseSpec {
    pub fn model(self) -> NoiseModel {
        match self {
            NoiseSpec::Gaussian { sigma } => NoiseModel::Gaussian { sigma },
            NoiseSpec::Uniform { half_width } => NoiseModel::Uniform { half_width },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingSpec {
    pub base_window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestartSpec {
    pub window: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrapperSpec {
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub doubling: Option<DoublingSpec>,
    #[serde(default)]
    pub restart: Option<RestartSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write per-round trajectory CSVs.
    #[serde(default = "yes")]
    pub trajectories: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            trajectories: true,
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Trial seeds, in trial order.
    pub fn trial_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.trials as u64)
                .map(|i| self.base_seed.wrapping_add(i))
                .collect(),
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        let bad =
            |field: &str, reason: &str| Err(ConfigError::Invalid(format!("{field}: {reason}")));
        if self.schema_version != SCHEMA_VERSION {
            return bad(
                "schema_version",
                &format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            );
        }
        if self.horizon == 0 {
            return bad("horizon", "must be at least 1");
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1");
        }
        if matches!(&self.seeds, Some(s) if s.is_empty()) {
            return bad("seeds", "must not be empty");
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1");
        }
        if self.wrappers.doubling.is_some() && self.wrappers.restart.is_some() {
            return bad("wrappers", "doubling and restart are mutually exclusive");
        }
        if matches!(self.wrappers.doubling, Some(d) if d.base_window == 0) {
            return bad("wrappers.doubling.base_window", "must be at least 1");
        }
        if matches!(self.wrappers.restart, Some(r) if r.window == 0) {
            return bad("wrappers.restart.window", "must be at least 1");
        }
        if let Some(noise) = self.wrappers.noise {
            noise
                .model()
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("wrappers.noise: {e}")))?;
        }
        self.environment
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("environment: {e}")))?;
        let algo = self.learner.algorithm;
        if algo.is_bandit() != self.environment.is_bandit() {
            return bad(
                "learner.algorithm",
                &format!("{} does not run on this environment kind", algo.name()),
            );
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
schema_version = 1
horizon = 100
trials = 3
base_seed = 7

[environment]
kind = "bernoulli_bandit"
means = [0.9, 0.6]

[learner]
algorithm = "ucb"
alpha = 3.0
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::parse(BASIC).unwrap();
        assert_eq!(cfg.trial_seeds(), vec![7, 8, 9]);
        assert_eq!(cfg.learner.step_size, Tunable::Keyword(Auto::Auto));
        assert_eq!(cfg.output.dir, PathBuf::from("results"));
    }

    #[test]
    fn numeric_step_size() {
        let text = BASIC.replace("alpha = 3.0", "alpha = 3.0\nstep_size = 0.5");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.learner.step_size.value(), Some(0.5));
    }

    #[test]
    fn rejects_bad_configs() {
        for (from, to) in [
            ("schema_version = 1", "schema_version = 2"),
            ("horizon = 100", "horizon = 0"),
            ("trials = 3", "trials = 0"),
            ("algorithm = \"ucb\"", "algorithm = \"klucb\""),
            ("algorithm = \"ucb\"", "algorithm = \"ogd\""),
            ("means = [0.9, 0.6]", "means = [1.5]"),
            ("alpha = 3.0", "alpha = 3.0\ncolour = 1"),
        ] {
            let text = BASIC.replace(from, to);
            assert!(ExperimentConfig::parse(&text).is_err(), "{to}");
        }
    }
}
