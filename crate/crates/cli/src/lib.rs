//! Config-driven experiment runner for the `noregret` library.
//!
//! A run reads a TOML config, plays every trial (in parallel when enabled),
//! and writes one `trajectory_NNNN.csv` per trial plus `summary.json` to the
//! output directory. Outputs are byte-identical for identical configs,
//! whether trials run serially or in parallel.

pub mod catalog;
pub mod config;
pub mod experiment;
pub mod report;

use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure in trial {trial} at round {round}: {message}")]
    Numerical {
        trial: usize,
        round: usize,
        message: String,
    },
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(n) = overrides.trials {
        cfg.trials = n;
        cfg.seeds = None;
    }
    if let Some(s) = overrides.seed {
        cfg.base_seed = s;
        cfg.seeds = None;
    }
    if let Some(dir) = &overrides.out {
        cfg.output.dir = dir.clone();
    }
    cfg.check()?;
    Ok(cfg)
}

/// Checks a config end to end and describes the resolved tuning.
pub fn validate(path: &Path) -> Result<String, CliError> {
    let cfg = load(path, &Overrides::default())?;
    let (_, resolved) = experiment::plan(&cfg)?;
    let bound = experiment::run_bound(&cfg, &resolved);
    let mut lines = vec![format!(
        "ok: {} on {}, T = {}, {} trial(s)",
        cfg.learner.algorithm.name(),
        serde_json::to_value(&cfg.environment)
            .ok()
            .and_then(|v| v.get("kind").and_then(Value::as_str).map(str::to_string))
            .unwrap_or_default(),
        cfg.horizon,
        cfg.trial_seeds().len()
    )];
    if let Some(s) = resolved.schedule {
        lines.push(format!("step schedule: {s:?}"));
    }
    if let Some(d) = resolved.delta {
        lines.push(format!("exploration radius: {}", report::fmt_f64(d)));
    }
    if let Some(b) = bound {
        lines.push(format!("regret bound: {}", report::fmt_f64(b)));
    }
    Ok(lines.join("\n"))
}

/// Runs an experiment and writes its outputs; returns the summary.
pub fn run(path: &Path, overrides: &Overrides) -> Result<Value, CliError> {
    let cfg = load(path, overrides)?;
    run_config(&cfg)
}

pub fn run_config(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let (bp, resolved) = experiment::plan(cfg)?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let trials = experiment::run_all(cfg, &bp, Some(dir))?;
    let summary = report::summary(cfg, &resolved, &trials).map_err(|e| CliError::Numerical {
        trial: 0,
        round: cfg.horizon,
        message: e.to_string(),
    })?;
    let path = dir.join("summary.json");
    std::fs::write(&path, report::to_json_string(&summary))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(summary)
}
