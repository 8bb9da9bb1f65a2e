//! Inverse-variance pooling and frequentist intervals for the overall effect.

use crate::dist::{normal_quantile, t_quantile};
use crate::error::Result;
use crate::model::{check_level, Dataset, IntervalEstimate, IntervalMethod, PooledResult};

/// Weighted summary at a fixed `tau`: pooled mean, total weight and the
/// generalized Q statistic. Allocation-free; used in every inner loop.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightedStats {
    pub mu: f64,
    pub w_sum: f64,
    pub q: f64,
    pub sum_log_var: f64,
}

pub(crate) fn weighted_stats(ds: &Dataset, tau: f64) -> WeightedStats {
    let tau2 = tau * tau;
    let mut w_sum = 0.0;
    let mut wy = 0.0;
    let mut sum_log_var = 0.0;
    for s in ds.studies() {
        let v = s.se * s.se + tau2;
        let w = 1.0 / v;
        w_sum += w;
        wy += w * s.y;
        sum_log_var += v.ln();
    }
    let mu = wy / w_sum;
    let q = ds
        .studies()
        .iter()
        .map(|s| {
            let r = s.y - mu;
            r * r / (s.se * s.se + tau2)
        })
        .sum();
    WeightedStats {
        mu,
        w_sum,
        q,
        sum_log_var,
    }
}

/// Inverse-variance weights `1 / (s_j^2 + tau^2)`.
pub fn weights(ds: &Dataset, tau: f64) -> Vec<f64> {
    let tau2 = tau * tau;
    ds.ses().map(|s| 1.0 / (s * s + tau2)).collect()
}

/// Weighted mean of the estimates and its standard error `sqrt(1 / w_+)`.
pub fn pooled_estimate(ds: &Dataset, tau: f64) -> PooledResult {
    let weights = weights(ds, tau);
    let w_sum: f64 = weights.iter().sum();
    let mu_hat = weights.iter().zip(ds.ys()).map(|(w, y)| w * y).sum::<f64>() / w_sum;
    PooledResult {
        mu_hat,
        se_mu: (1.0 / w_sum).sqrt(),
        weights,
        tau_used: tau,
    }
}

/// `mu_hat ± z_{1-alpha/2} * se_mu`.
pub fn ci_normal(pooled: &PooledResult, level: f64) -> Result<IntervalEstimate> {
    check_level(level)?;
    let half = normal_quantile(0.5 + level / 2.0) * pooled.se_mu;
    Ok(IntervalEstimate {
        lower: pooled.mu_hat - half,
        upper: pooled.mu_hat + half,
        level,
        method: IntervalMethod::Norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnappHartungStats {
    /// `sum w_j (y_j - mu_hat)^2 / (k - 1)`.
    pub q: f64,
    pub q_star: f64,
    pub df: usize,
}

/// Knapp-Hartung interval `mu_hat ± t_{k-1} * sqrt(q) * se_mu`; with
/// `modified`, `q` is floored at 1.
///
/// The unmodified interval has zero width when all estimates coincide.
pub fn ci_knapp_hartung(
    ds: &Dataset,
    tau: f64,
    level: f64,
    modified: bool,
) -> Result<(IntervalEstimate, KnappHartungStats)> {
    ds.require_k(2, "Knapp-Hartung interval")?;
    check_level(level)?;
    let pooled = pooled_estimate(ds, tau);
    let df = ds.k() - 1;
    let q = pooled
        .weights
        .iter()
        .zip(ds.ys())
        .map(|(w, y)| w * (y - pooled.mu_hat).powi(2))
        .sum::<f64>()
        / df as f64;
    let stats = KnappHartungStats {
        q,
        q_star: q.max(1.0),
        df,
    };
    let factor = if modified { stats.q_star } else { q };
    let half = t_quantile(df as f64, 0.5 + level / 2.0) * factor.sqrt() * pooled.se_mu;
    let interval = IntervalEstimate {
        lower: pooled.mu_hat - half,
        upper: pooled.mu_hat + half,
        level,
        method: if modified {
            IntervalMethod::KHMod
        } else {
            IntervalMethod::KH
        },
    };
    Ok((interval, stats))
}
