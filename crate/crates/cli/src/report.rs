//! Summary JSON and number formatting.

use std::io;

use serde_json::ser::{Formatter, Serializer};
use serde_json::{json, Value};

use noregret::meta::mean_regret;
use noregret::oco::StepSchedule;
use noregret::RegretLedger;

use crate::config::ExperimentConfig;
use crate::experiment::{run_bound, theorem_name, Resolved, TrialResult};

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes every float with [`fmt_f64`]; non-finite values become `null`.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }
}

pub fn to_json_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedDigits);
    serde::Serialize::serialize(value, &mut ser).expect("in-memory JSON serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

fn schedule_json(s: Option<StepSchedule>) -> (Value, Value) {
    match s {
        None => (Value::Null, Value::Null),
        Some(StepSchedule::Constant(g)) => (json!(g), json!("constant")),
        Some(StepSchedule::StronglyConvex { beta }) => (json!(beta), json!("one_over_beta_t")),
        Some(StepSchedule::BetaOverT { beta }) => (json!(beta), json!("beta_over_t")),
    }
}

fn env_kind(cfg: &ExperimentConfig) -> String {
    let v = serde_json::to_value(&cfg.environment).expect("environment spec serializes");
    v.get("kind")
        .and_then(Value::as_str)
        .unwrap_or("unknown")
        .to_string()
}

/// Builds the run summary. `mean_regret` averages losses over trials before
/// minimizing, which estimates pseudo-regret when trials share a loss
/// distribution. `static_regret` statistics are over per-trial regrets, and
/// `ratio` is the mean per-trial static regret over the bound.
pub fn summary(
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    trials: &[TrialResult],
) -> noregret::Result<Value> {
    let ledgers: Vec<RegretLedger> = trials.iter().map(|t| t.ledger.clone()).collect();
    let mean = mean_regret(&ledgers)?;
    let n = trials.len() as f64;
    let avg = |f: &dyn Fn(&TrialResult) -> f64| trials.iter().map(f).sum::<f64>() / n;
    let static_mean = avg(&|t| t.static_regret);
    let min = trials
        .iter()
        .map(|t| t.static_regret)
        .fold(f64::INFINITY, f64::min);
    let max = trials
        .iter()
        .map(|t| t.static_regret)
        .fold(f64::NEG_INFINITY, f64::max);
    let dynamic = if trials.iter().all(|t| t.dynamic_regret.is_some()) {
        json!(avg(&|t| t.dynamic_regret.unwrap_or(0.0)))
    } else {
        Value::Null
    };
    let bound = run_bound(cfg, resolved);
    let (step, schedule) = schedule_json(resolved.schedule);
    let per_trial: Vec<Value> = trials
        .iter()
        .map(|t| {
            json!({
                "trial": t.index,
                "seed": t.seed,
                "cumulative_loss": t.cumulative_loss,
                "static_regret": t.static_regret,
                "dynamic_regret": t.dynamic_regret,
                "variation_budget": t.variation_budget,
            })
        })
        .collect();
    Ok(json!({
        "schema_version": cfg.schema_version,
        "algorithm": cfg.learner.algorithm.name(),
        "environment": env_kind(cfg),
        "theorem": resolved.theorem.map(theorem_name),
        "horizon": cfg.horizon,
        "trials": trials.len(),
        "step_size": step,
        "step_schedule": schedule,
        "delta": resolved.delta,
        "mean_regret": mean,
        "static_regret": { "mean": static_mean, "min": min, "max": max },
        "dynamic_regret_mean": dynamic,
        "variation_budget_mean": avg(&|t| t.variation_budget),
        "cumulative_loss_mean": avg(&|t| t.cumulative_loss),
        "bound": bound,
        "ratio": bound.map(|b| static_mean / b),
        "per_trial": per_trial,
    }))
}
