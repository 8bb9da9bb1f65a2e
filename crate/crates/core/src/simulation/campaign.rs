use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::heterogeneity::model_i_squared;

use super::methods::{EvalConfig, Evaluator, Method, MethodOutcome};
use super::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignConfig {
    pub eval: EvalConfig,
    /// Largest tolerated fraction of failed replications per method.
    pub failure_budget: f64,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            eval: EvalConfig::default(),
            failure_budget: 0.01,
            threads: None,
        }
    }
}

/// Aggregates for one (scenario, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationMetrics {
    pub scenario: String,
    pub method: String,
    pub n_reps: usize,
    /// Mean of `tau_hat - tau_true`.
    pub tau_bias: f64,
    pub tau_rmse: f64,
    /// Fraction of replications with `tau_hat == 0` exactly.
    pub zero_prop: f64,
    pub mu_rmse: f64,
    pub coverage: f64,
    pub mean_len: f64,
    /// Median over replications of the generating model's `I^2`, using the
    /// true `tau` and the replication's standard errors.
    pub median_i2: f64,
    pub failures: usize,
}

pub const METRICS_HEADER: [&str; 11] = [
    "scenario", "method", "n_reps", "tau_bias", "tau_rmse", "zero_prop", "mu_rmse", "coverage", "mean_len",
    "median_i2", "failures",
];

struct Replication {
    i2: Option<f64>,
    outcomes: Vec<Option<MethodOutcome>>,
}

fn run_replication(sc: &Scenario, methods: &[Method], cfg: &EvalConfig, rep: u64) -> Replication {
    let ds = match sc.simulate(rep) {
        Ok(ds) => ds,
        Err(_) => {
            return Replication {
                i2: None,
                outcomes: vec![None; methods.len()],
            }
        }
    };
    let mut ev = Evaluator::new(&ds, cfg);
    Replication {
        i2: Some(model_i_squared(&ds, sc.true_tau())),
        outcomes: methods.iter().map(|m| ev.evaluate(m).ok()).collect(),
    }
}

/// Median of a sample; `NaN` when empty.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Reduces per-replication outcomes (in replication order; `None` marks a
/// failure) to metrics. Failed replications are excluded from the means and
/// counted in `failures`.
pub fn summarize_outcomes(
    scenario: &str,
    method: &str,
    true_tau: f64,
    target_mu: f64,
    outcomes: &[Option<MethodOutcome>],
    median_i2: f64,
) -> SimulationMetrics {
    let mut n = 0usize;
    let (mut dtau, mut dtau2, mut zeros, mut dmu2, mut covered, mut len) = (0.0, 0.0, 0usize, 0.0, 0usize, 0.0);
    for o in outcomes.iter().flatten() {
        n += 1;
        let e = o.tau - true_tau;
        dtau += e;
        dtau2 += e * e;
        zeros += (o.tau == 0.0) as usize;
        dmu2 += (o.mu - target_mu).powi(2);
        covered += o.interval.contains(target_mu) as usize;
        len += o.interval.width();
    }
    let m = n as f64;
    SimulationMetrics {
        scenario: scenario.to_string(),
        method: method.to_string(),
        n_reps: outcomes.len(),
        tau_bias: dtau / m,
        tau_rmse: (dtau2 / m).sqrt(),
        zero_prop: zeros as f64 / m,
        mu_rmse: (dmu2 / m).sqrt(),
        coverage: covered as f64 / m,
        mean_len: len / m,
        median_i2,
        failures: outcomes.len() - n,
    }
}

fn run_scenario(sc: &Scenario, methods: &[Method], cfg: &EvalConfig) -> Vec<SimulationMetrics> {
    let reps: Vec<Replication> = (0..sc.n_reps() as u64)
        .into_par_iter()
        .map(|rep| run_replication(sc, methods, cfg, rep))
        .collect();
    let mut i2: Vec<f64> = reps.iter().filter_map(|r| r.i2).collect();
    let median_i2 = median(&mut i2);
    let label = sc.label();
    methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let outcomes: Vec<Option<MethodOutcome>> = reps.iter().map(|r| r.outcomes[j]).collect();
            summarize_outcomes(&label, &m.label(), sc.true_tau(), sc.target_mu(), &outcomes, median_i2)
        })
        .collect()
}

/// Runs every method on every replication of every scenario.
///
/// Results depend only on the scenarios, methods and configuration, never
/// on the thread count. If any method fails on more than the failure budget
/// of a scenario's replications, [`Error::FailureBudget`] is returned with
/// the complete metrics attached.
pub fn run_campaign(scenarios: &[Scenario], methods: &[Method], cfg: &CampaignConfig) -> Result<Vec<SimulationMetrics>> {
    if scenarios.is_empty() || methods.is_empty() {
        return Err(Error::InvalidConfig("campaign needs at least one scenario and one method".into()));
    }
    for sc in scenarios {
        sc.validate()?;
    }
    cfg.eval.estimator.validate()?;
    let run = || -> Vec<SimulationMetrics> {
        scenarios.iter().flat_map(|sc| run_scenario(sc, methods, &cfg.eval)).collect()
    };
    let metrics = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {n} threads: {e}")))?
            .install(run),
        None => run(),
    };
    let breaches: Vec<String> = metrics
        .iter()
        .filter(|m| m.failures as f64 > cfg.failure_budget * m.n_reps as f64)
        .map(|m| format!("{}/{} ({} of {})", m.scenario, m.method, m.failures, m.n_reps))
        .collect();
    if breaches.is_empty() {
        Ok(metrics)
    } else {
        Err(Error::FailureBudget { breaches, metrics })
    }
}

/// Writes metrics as CSV with [`METRICS_HEADER`]; floats at full precision.
pub fn write_metrics_csv<W: Write>(out: W, metrics: &[SimulationMetrics]) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER).map_err(io)?;
    for m in metrics {
        w.write_record([
            m.scenario.clone(),
            m.method.clone(),
            m.n_reps.to_string(),
            m.tau_bias.to_string(),
            m.tau_rmse.to_string(),
            m.zero_prop.to_string(),
            m.mu_rmse.to_string(),
            m.coverage.to_string(),
            m.mean_len.to_string(),
            m.median_i2.to_string(),
            m.failures.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}
