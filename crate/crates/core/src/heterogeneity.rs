//! Estimators of the between-study standard deviation `tau`.
//!
//! All iterative estimators work on the `tau` scale (not `tau^2`) and stop on
//! an absolute tolerance in `tau`. Boundary solutions are returned as exact
//! zeros, never jittered, so that zero proportions can be counted exactly.

use crate::dist::chi2_quantile;
use crate::error::{Error, Result};
use crate::model::{check_level, Dataset, HeterogeneityEstimate, TauInterval, TauMethod};
use crate::optimize::{bisect_decreasing, maximize_on_interval, MaxOutcome};
use crate::pooling::weighted_stats;

/// Likelihood penalized by the Bayes-modal estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmLikelihood {
    /// `mu` profiled out (penalized ML), the usual Bayes-modal form.
    Profile,
    /// Restricted likelihood (penalized REML); less shrinkage toward 0,
    /// noticeably longer intervals for k <= 3.
    Restricted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Upper end of the search range for `tau`.
    pub tau_max: f64,
    /// Convergence tolerance on `tau`.
    pub abs_tol: f64,
    /// Gamma prior shape for the Bayes-modal estimator; must exceed 1.
    pub bm_shape: f64,
    /// Gamma prior rate for the Bayes-modal estimator (0 = improper).
    pub bm_rate: f64,
    pub bm_likelihood: BmLikelihood,
    /// Iteration budget of the golden-section refinement.
    pub max_iter: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            tau_max: 10.0,
            abs_tol: 1e-8,
            bm_shape: 2.0,
            bm_rate: 0.0,
            bm_likelihood: BmLikelihood::Profile,
            max_iter: 500,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_max > 0.0 && self.tau_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("tau_max must be positive, got {}", self.tau_max)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if !(self.bm_shape > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "Bayes-modal shape must exceed 1, got {}",
                self.bm_shape
            )));
        }
        if !(self.bm_rate >= 0.0) {
            return Err(Error::InvalidConfig(format!("Bayes-modal rate must be >= 0, got {}", self.bm_rate)));
        }
        Ok(())
    }
}

/// Generalized Cochran statistic `Q(tau) = sum w_j(tau) (y_j - mu_hat(tau))^2`.
pub fn generalized_q(ds: &Dataset, tau: f64) -> Result<f64> {
    ds.require_k(2, "generalized Q")?;
    Ok(weighted_stats(ds, tau).q)
}

/// Restricted log-likelihood of `tau`, up to an additive constant:
/// `-1/2 [sum log(s_j^2 + tau^2) + log w_+(tau) + Q(tau)]`.
///
/// Equal to the log marginal likelihood of `tau` after integrating `mu`
/// out under a flat prior.
pub fn restricted_log_likelihood(ds: &Dataset, tau: f64) -> f64 {
    let st = weighted_stats(ds, tau);
    -0.5 * (st.sum_log_var + st.w_sum.ln() + st.q)
}

/// Log-likelihood of `tau` with `mu` profiled out, up to a constant.
pub fn profile_log_likelihood(ds: &Dataset, tau: f64) -> f64 {
    let st = weighted_stats(ds, tau);
    -0.5 * (st.sum_log_var + st.q)
}

/// Log-likelihood (profile by default) plus the log of a Gamma(shape, rate)
/// prior on `tau`.
pub fn bayes_modal_objective(ds: &Dataset, tau: f64, cfg: &EstimatorConfig) -> f64 {
    let base = match cfg.bm_likelihood {
        BmLikelihood::Profile => profile_log_likelihood(ds, tau),
        BmLikelihood::Restricted => restricted_log_likelihood(ds, tau),
    };
    base + (cfg.bm_shape - 1.0) * tau.ln() - cfg.bm_rate * tau
}

/// DerSimonian-Laird moment estimator (closed form).
pub fn tau_dl(ds: &Dataset) -> Result<HeterogeneityEstimate> {
    ds.require_k(2, "DerSimonian-Laird")?;
    let q0 = weighted_stats(ds, 0.0).q;
    let (s1, s2) = ds.ses().fold((0.0, 0.0), |(s1, s2), s| {
        let u = 1.0 / (s * s);
        (s1 + u, s2 + u * u)
    });
    let excess = q0 - (ds.k() - 1) as f64;
    let tau2 = if excess > 0.0 { excess / (s1 - s2 / s1) } else { 0.0 };
    Ok(HeterogeneityEstimate::new(tau2.sqrt(), TauMethod::DL))
}

fn maximize(
    ds: &Dataset,
    cfg: &EstimatorConfig,
    method: TauMethod,
    what: &'static str,
    objective: impl Fn(f64) -> f64,
) -> Result<HeterogeneityEstimate> {
    ds.require_k(2, what)?;
    cfg.validate()?;
    match maximize_on_interval(objective, cfg.tau_max, cfg.abs_tol, cfg.max_iter) {
        MaxOutcome::Converged(tau) => Ok(HeterogeneityEstimate::new(tau, method)),
        MaxOutcome::Exhausted(best_tau, iterations) => Err(Error::NoConvergence {
            method: what,
            iterations,
            best_tau,
        }),
    }
}

/// Restricted maximum-likelihood estimate on `[0, tau_max]`.
pub fn tau_reml(ds: &Dataset, cfg: &EstimatorConfig) -> Result<HeterogeneityEstimate> {
    maximize(ds, cfg, TauMethod::REML, "REML", |t| restricted_log_likelihood(ds, t))
}

/// Maximum-likelihood estimate on `[0, tau_max]`.
pub fn tau_ml(ds: &Dataset, cfg: &EstimatorConfig) -> Result<HeterogeneityEstimate> {
    maximize(ds, cfg, TauMethod::ML, "ML", |t| profile_log_likelihood(ds, t))
}

/// Bayes-modal estimate: penalized likelihood, strictly positive.
pub fn tau_bm(ds: &Dataset, cfg: &EstimatorConfig) -> Result<HeterogeneityEstimate> {
    maximize(ds, cfg, TauMethod::BM, "Bayes-modal", |t| bayes_modal_objective(ds, t, cfg))
}

/// Solves `Q(tau) = target` for non-increasing `Q`; 0 when `Q(0) <= target`.
fn solve_q(ds: &Dataset, target: f64, cfg: &EstimatorConfig, what: &'static str) -> Result<f64> {
    let q0 = weighted_stats(ds, 0.0).q;
    if q0 <= target {
        return Ok(0.0);
    }
    if weighted_stats(ds, cfg.tau_max).q > target {
        return Err(Error::NotBracketed {
            what,
            tau_max: cfg.tau_max,
        });
    }
    let value_tol = 1e-10 * target.max(1.0);
    Ok(bisect_decreasing(
        |t| weighted_stats(ds, t).q - target,
        0.0,
        cfg.tau_max,
        cfg.abs_tol,
        value_tol,
    ))
}

/// Mandel-Paule estimate: the root of `Q(tau) = k - 1`.
pub fn tau_mp(ds: &Dataset, cfg: &EstimatorConfig) -> Result<HeterogeneityEstimate> {
    ds.require_k(2, "Mandel-Paule")?;
    cfg.validate()?;
    let tau = solve_q(ds, (ds.k() - 1) as f64, cfg, "Mandel-Paule")?;
    Ok(HeterogeneityEstimate::new(tau, TauMethod::MP))
}

/// Dispatches to the named estimator. `BayesMedian` is not a point
/// estimator of this module and is rejected.
pub fn estimate_tau(ds: &Dataset, method: TauMethod, cfg: &EstimatorConfig) -> Result<HeterogeneityEstimate> {
    match method {
        TauMethod::DL => tau_dl(ds),
        TauMethod::REML => tau_reml(ds, cfg),
        TauMethod::ML => tau_ml(ds, cfg),
        TauMethod::MP => tau_mp(ds, cfg),
        TauMethod::BM => tau_bm(ds, cfg),
        TauMethod::BayesMedian => Err(Error::UnknownMethod(method.label().into())),
    }
}

/// Q-profile confidence interval for `tau`.
///
/// The lower bound solves `Q(tau) = chi2_{k-1; 1-alpha/2}`, the upper bound
/// `Q(tau) = chi2_{k-1; alpha/2}`; bounds without a non-negative solution
/// are 0.
pub fn tau_q_profile_ci(ds: &Dataset, level: f64, cfg: &EstimatorConfig) -> Result<TauInterval> {
    ds.require_k(2, "Q-profile interval")?;
    check_level(level)?;
    cfg.validate()?;
    let df = (ds.k() - 1) as f64;
    let alpha = 1.0 - level;
    let lower = solve_q(ds, chi2_quantile(df, 1.0 - alpha / 2.0), cfg, "Q-profile lower bound")?;
    let upper = solve_q(ds, chi2_quantile(df, alpha / 2.0), cfg, "Q-profile upper bound")?;
    Ok(TauInterval { lower, upper, level })
}

/// Higgins' `I^2 = max(0, (Q(0) - (k-1)) / Q(0))`.
pub fn i_squared(ds: &Dataset) -> Result<f64> {
    ds.require_k(2, "I^2")?;
    let q0 = weighted_stats(ds, 0.0).q;
    let df = (ds.k() - 1) as f64;
    if q0 <= df {
        Ok(0.0)
    } else {
        Ok((q0 - df) / q0)
    }
}

/// Heterogeneity share of the generating model, `tau^2 / (tau^2 + mean s_j^2)`,
/// for a known `tau`. Simulation summaries report this rather than the
/// Q-based estimate, which is biased upward for small `k`.
pub fn model_i_squared(ds: &Dataset, tau: f64) -> f64 {
    let mean_v = ds.ses().map(|s| s * s).sum::<f64>() / ds.k() as f64;
    let t2 = tau * tau;
    if t2 == 0.0 {
        0.0
    } else {
        t2 / (t2 + mean_v)
    }
}
