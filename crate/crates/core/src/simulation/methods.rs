//! The inference procedures compared in a campaign and their report labels.

use std::fmt;
use std::str::FromStr;

use crate::bayes::{summarize_posterior, BayesConfig, PriorSpec};
use crate::error::{Error, Result};
use crate::heterogeneity::{estimate_tau, EstimatorConfig};
use crate::model::{Dataset, IntervalEstimate, IntervalMethod, TauMethod};
use crate::pooling::{ci_knapp_hartung, ci_normal, pooled_estimate, weighted_stats};

/// Frequentist interval flavours for `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalKind {
    Norm,
    /// Knapp-Hartung with `q* = max(1, q)`; labelled "KnHa".
    KnHa,
    /// Knapp-Hartung with the raw `q`.
    KnHaUnmod,
}

impl IntervalKind {
    fn suffix(self) -> &'static str {
        match self {
            IntervalKind::Norm => "norm",
            IntervalKind::KnHa => "KnHa",
            IntervalKind::KnHaUnmod => "KnHa-unmod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Frequentist { estimator: TauMethod, interval: IntervalKind },
    Bayes(PriorSpec),
}

impl Method {
    pub fn frequentist(estimator: TauMethod, interval: IntervalKind) -> Self {
        Method::Frequentist { estimator, interval }
    }

    /// Label such as `DL-norm`, `REML-KnHa` or `half-Normal(0.5)`.
    pub fn label(&self) -> String {
        match self {
            Method::Frequentist { estimator, interval } => format!("{}-{}", estimator.label(), interval.suffix()),
            Method::Bayes(p) => p.label(),
        }
    }

    /// Same as [`Method::label`] but with Mandel-Paule shown as "EB"
    /// (empirical Bayes), as in comparison tables.
    pub fn table_label(&self) -> String {
        match self {
            Method::Frequentist { estimator: TauMethod::MP, interval } => format!("EB-{}", interval.suffix()),
            _ => self.label(),
        }
    }

    /// True when the method's `tau` estimate can be exactly zero.
    pub fn tau_can_be_zero(&self) -> bool {
        match self {
            Method::Frequentist { estimator, .. } => estimator.can_be_zero(),
            Method::Bayes(_) => false,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn parse_estimator(s: &str) -> Option<TauMethod> {
    Some(match s.to_ascii_uppercase().as_str() {
        "DL" => TauMethod::DL,
        "REML" => TauMethod::REML,
        "ML" => TauMethod::ML,
        "MP" | "PM" | "EB" => TauMethod::MP,
        "BM" => TauMethod::BM,
        _ => return None,
    })
}

fn parse_interval(s: &str) -> Option<IntervalKind> {
    Some(match s.to_ascii_uppercase().as_str() {
        "NORM" => IntervalKind::Norm,
        "KNHA" | "KH-MOD" | "KHMOD" => IntervalKind::KnHa,
        "KNHA-UNMOD" | "KH" => IntervalKind::KnHaUnmod,
        _ => return None,
    })
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts `<estimator>-<interval>` (e.g. `DL-norm`, `EB-KnHa`,
    /// `REML-KH-MOD`, `DL-KH`) or a prior label (`half-Normal(0.5)`, `U(0,4)`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((est, iv)) = s.split_once('-') {
            if let (Some(e), Some(i)) = (parse_estimator(est), parse_interval(iv)) {
                return Ok(Method::frequentist(e, i));
            }
        }
        s.parse::<PriorSpec>()
            .map(Method::Bayes)
            .map_err(|_| Error::UnknownMethod(s.to_string()))
    }
}

/// Splits on commas outside parentheses, so `U(0,4)` stays one item.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter().map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
}

pub fn parse_method_list(s: &str) -> Result<Vec<Method>> {
    split_top_level(s).iter().map(|t| t.parse()).collect()
}

/// The eleven procedures of the binomial case-study comparison, in table order.
pub fn case_study_methods() -> Vec<Method> {
    let ests = [TauMethod::DL, TauMethod::REML, TauMethod::MP, TauMethod::BM];
    let mut out = Vec::with_capacity(11);
    for kind in [IntervalKind::Norm, IntervalKind::KnHa] {
        out.extend(ests.iter().map(|&e| Method::frequentist(e, kind)));
    }
    out.push(Method::Bayes(PriorSpec::Uniform { upper: 4.0 }));
    out.push(Method::Bayes(PriorSpec::HalfNormal { scale: 1.0 }));
    out.push(Method::Bayes(PriorSpec::HalfNormal { scale: 0.5 }));
    out
}

/// Point estimates and interval from one method on one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOutcome {
    /// Estimate of `tau` (posterior median for Bayes methods).
    pub tau: f64,
    /// Estimate of `mu` (posterior median for Bayes methods).
    pub mu: f64,
    pub interval: IntervalEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub level: f64,
    pub estimator: EstimatorConfig,
    pub bayes: BayesConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            level: 0.95,
            estimator: EstimatorConfig::default(),
            bayes: BayesConfig::default(),
        }
    }
}

/// Applies methods to a dataset, computing each `tau` estimator once.
pub struct Evaluator<'a> {
    ds: &'a Dataset,
    cfg: &'a EvalConfig,
    taus: Vec<(TauMethod, Result<f64>)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(ds: &'a Dataset, cfg: &'a EvalConfig) -> Self {
        Evaluator { ds, cfg, taus: Vec::new() }
    }

    fn tau(&mut self, m: TauMethod) -> Result<f64> {
        if let Some((_, r)) = self.taus.iter().find(|(k, _)| *k == m) {
            return r.clone();
        }
        let r = estimate_tau(self.ds, m, &self.cfg.estimator).map(|e| e.tau);
        self.taus.push((m, r.clone()));
        r
    }

    pub fn evaluate(&mut self, method: &Method) -> Result<MethodOutcome> {
        let level = self.cfg.level;
        match *method {
            Method::Frequentist { estimator, interval } => {
                let tau = self.tau(estimator)?;
                let interval = match interval {
                    IntervalKind::Norm => ci_normal(&pooled_estimate(self.ds, tau), level)?,
                    IntervalKind::KnHa => ci_knapp_hartung(self.ds, tau, level, true)?.0,
                    IntervalKind::KnHaUnmod => ci_knapp_hartung(self.ds, tau, level, false)?.0,
                };
                let mu = weighted_stats(self.ds, tau).mu;
                Ok(MethodOutcome { tau, mu, interval })
            }
            Method::Bayes(prior) => {
                let s = summarize_posterior(self.ds, &prior, level, &self.cfg.bayes)?;
                Ok(MethodOutcome {
                    tau: s.tau_median,
                    mu: s.mu_median,
                    interval: s.mu_interval,
                })
            }
        }
    }
}

/// Convenience wrapper evaluating a single method.
pub fn evaluate_method(ds: &Dataset, method: &Method, cfg: &EvalConfig) -> Result<MethodOutcome> {
    Evaluator::new(ds, cfg).evaluate(method)
}

impl IntervalKind {
    pub fn interval_method(self) -> IntervalMethod {
        match self {
            IntervalKind::Norm => IntervalMethod::Norm,
            IntervalKind::KnHa => IntervalMethod::KHMod,
            IntervalKind::KnHaUnmod => IntervalMethod::KH,
        }
    }
}
