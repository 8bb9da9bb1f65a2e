//! Posterior inference for `(mu, tau)` without MCMC.
//!
//! With a flat prior on `mu`, integrating `mu` out leaves a one-dimensional
//! marginal likelihood for `tau`. The `tau` posterior is tabulated on a
//! trapezoid grid, and the `mu` posterior is the grid-weighted mixture of the
//! conditional normals `N(mu_hat(tau), 1 / w_+(tau))`.

use crate::dist::{normal_cdf, normal_pdf, normal_quantile};
use crate::error::{Error, Result};
use crate::heterogeneity::restricted_log_likelihood;
use crate::model::{check_level, Dataset, IntervalEstimate, IntervalMethod, TauInterval};
use crate::pooling::weighted_stats;

use super::prior::PriorSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BayesConfig {
    /// Hard upper limit of the `tau` grid.
    pub tau_max: f64,
    /// The grid stops at this prior quantile (or `tau_max`, if smaller).
    pub cut_quantile: f64,
    /// Node count of the first grid; intervals are doubled from there.
    pub initial_nodes: usize,
    /// Relative change of the normalizer below which refinement stops.
    pub grid_tol: f64,
    pub max_nodes: usize,
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig {
            tau_max: 10.0,
            cut_quantile: 0.9999,
            initial_nodes: 201,
            grid_tol: 1e-8,
            max_nodes: (1 << 16) + 1,
        }
    }
}

/// Log marginal likelihood of `tau` with `mu` integrated out under a flat
/// prior, up to a `tau`-independent constant.
pub fn tau_log_marginal(ds: &Dataset, tau: f64) -> Result<f64> {
    ds.require_k(2, "tau marginal likelihood")?;
    Ok(restricted_log_likelihood(ds, tau))
}

/// Tabulated marginal posterior of `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct TauPosterior {
    grid: Vec<f64>,
    density: Vec<f64>,
    log_marginals: Vec<f64>,
    /// Trapezoid weights; sum to one.
    weights: Vec<f64>,
    log_normalizer: f64,
    prior: PriorSpec,
}

fn trapezoid_weights(grid: &[f64], density: &[f64]) -> Vec<f64> {
    let n = grid.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = grid[i + 1] - grid[i];
        w[i] += 0.5 * h * density[i];
        w[i + 1] += 0.5 * h * density[i + 1];
    }
    w
}

impl TauPosterior {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Normalized density at the grid nodes.
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// `log L(tau)` at the grid nodes.
    pub fn log_marginals(&self) -> &[f64] {
        &self.log_marginals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Log of the unnormalized posterior mass on the grid.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn tau_cut(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    fn is_point_mass(&self) -> bool {
        self.grid.len() == 1
    }

    /// Trapezoid integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.weights.iter().zip(&self.grid).map(|(w, t)| w * t).sum()
    }

    // Mass of the piecewise-linear density on [t_i, t_i + u h].
    fn cell_mass(&self, i: usize, u: f64) -> f64 {
        let h = self.grid[i + 1] - self.grid[i];
        let d0 = self.density[i];
        let d1 = self.density[i + 1];
        h * (d0 * u + 0.5 * (d1 - d0) * u * u)
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut c = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        c.push(0.0);
        for i in 0..self.grid.len() - 1 {
            acc += self.cell_mass(i, 1.0);
            c.push(acc);
        }
        c
    }

    /// Posterior CDF with the density interpolated linearly between nodes.
    pub fn cdf(&self, tau: f64) -> f64 {
        if self.is_point_mass() {
            return if tau >= self.grid[0] { 1.0 } else { 0.0 };
        }
        if tau <= 0.0 {
            return 0.0;
        }
        if tau >= self.tau_cut() {
            return 1.0;
        }
        let i = self.grid.partition_point(|&t| t <= tau) - 1;
        let cum: f64 = (0..i).map(|j| self.cell_mass(j, 1.0)).sum();
        let h = self.grid[i + 1] - self.grid[i];
        cum + self.cell_mass(i, (tau - self.grid[i]) / h)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if self.is_point_mass() {
            return self.grid[0];
        }
        let cum = self.cumulative();
        let total = *cum.last().unwrap();
        let target = p * total;
        let i = (cum.partition_point(|&c| c < target)).clamp(1, cum.len() - 1) - 1;
        let rest = target - cum[i];
        let h = self.grid[i + 1] - self.grid[i];
        let d0 = self.density[i];
        let a = 0.5 * (self.density[i + 1] - d0) * h;
        let b = d0 * h;
        // solve a u^2 + b u = rest for u in [0, 1]
        let u = if a.abs() < 1e-14 * b.abs().max(1e-300) {
            if b > 0.0 {
                rest / b
            } else {
                0.5
            }
        } else {
            let disc = (b * b + 4.0 * a * rest).max(0.0);
            2.0 * rest / (b + disc.sqrt())
        };
        self.grid[i] + u.clamp(0.0, 1.0) * h
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    // Mass where the interpolated density is at least `c`, plus the
    // leftmost and rightmost points of that set.
    fn level_set(&self, c: f64) -> (f64, f64, f64) {
        let mut mass = 0.0;
        let mut left = f64::NAN;
        let mut right = f64::NAN;
        for i in 0..self.grid.len() - 1 {
            let (d0, d1) = (self.density[i], self.density[i + 1]);
            let h = self.grid[i + 1] - self.grid[i];
            let (u0, u1) = if d0 >= c && d1 >= c {
                (0.0, 1.0)
            } else if d0 < c && d1 < c {
                continue;
            } else {
                let u = (c - d0) / (d1 - d0);
                if d0 >= c {
                    (0.0, u)
                } else {
                    (u, 1.0)
                }
            };
            mass += self.cell_mass(i, u1) - self.cell_mass(i, u0);
            if left.is_nan() {
                left = self.grid[i] + u0 * h;
            }
            right = self.grid[i] + u1 * h;
        }
        (mass, left, right)
    }

    /// Shortest interval holding `level` posterior mass, found by sweeping
    /// the density's level sets. For a multimodal density the hull of the
    /// highest-density set is returned.
    pub fn shortest_interval(&self, level: f64) -> Result<TauInterval> {
        check_level(level)?;
        if self.is_point_mass() {
            let t = self.grid[0];
            return Ok(TauInterval { lower: t, upper: t, level });
        }
        let mut lo = 0.0;
        let mut hi = self.density.iter().cloned().fold(0.0, f64::max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.level_set(mid).0 >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (_, lower, upper) = self.level_set(lo);
        Ok(TauInterval {
            lower: lower.max(0.0),
            upper,
            level,
        })
    }
}

/// Marginal posterior of `tau` under `prior`.
pub fn posterior_tau(ds: &Dataset, prior: &PriorSpec, cfg: &BayesConfig) -> Result<TauPosterior> {
    ds.require_k(2, "Bayesian analysis")?;
    let prior = prior.validated()?;
    if let PriorSpec::PointMass { tau } = prior {
        let lm = restricted_log_likelihood(ds, tau);
        return Ok(TauPosterior {
            grid: vec![tau],
            density: vec![1.0],
            log_marginals: vec![lm],
            weights: vec![1.0],
            log_normalizer: lm,
            prior,
        });
    }
    if cfg.initial_nodes < 3 || !(cfg.tau_max > 0.0) || !(cfg.grid_tol > 0.0) {
        return Err(Error::InvalidConfig(format!("invalid Bayes grid settings {cfg:?}")));
    }
    let support = match prior {
        PriorSpec::Uniform { upper } => upper,
        _ => prior.quantile(cfg.cut_quantile),
    };
    let tau_cut = support.min(cfg.tau_max);
    let log_post = |t: f64| prior.log_density(t) + restricted_log_likelihood(ds, t);

    let mut intervals = cfg.initial_nodes - 1;
    let mut grid: Vec<f64> = (0..=intervals).map(|i| tau_cut * i as f64 / intervals as f64).collect();
    let mut logs: Vec<f64> = grid.iter().map(|&t| log_post(t)).collect();
    let mut previous: Option<f64> = None;
    let (shift, z) = loop {
        let shift = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::NormalizerUnderflow { tau_cut });
        }
        let h = tau_cut / intervals as f64;
        let n = logs.len();
        let inner: f64 = logs.iter().map(|l| (l - shift).exp()).sum();
        let z = h * (inner - 0.5 * ((logs[0] - shift).exp() + (logs[n - 1] - shift).exp()));
        if !(z > 0.0) {
            return Err(Error::NormalizerUnderflow { tau_cut });
        }
        if let Some(prev) = previous {
            if (z - prev).abs() <= cfg.grid_tol * z || 2 * intervals + 1 > cfg.max_nodes {
                break (shift, z);
            }
        }
        previous = Some(z);
        // doubling keeps every old node; only midpoints are new
        intervals *= 2;
        let mut g = Vec::with_capacity(intervals + 1);
        let mut l = Vec::with_capacity(intervals + 1);
        for i in 0..grid.len() {
            g.push(grid[i]);
            l.push(logs[i]);
            if i + 1 < grid.len() {
                let mid = 0.5 * (grid[i] + grid[i + 1]);
                g.push(mid);
                l.push(log_post(mid));
            }
        }
        grid = g;
        logs = l;
    };

    let density: Vec<f64> = logs.iter().map(|l| (l - shift).exp() / z).collect();
    let log_marginals = grid.iter().map(|&t| restricted_log_likelihood(ds, t)).collect();
    let weights = trapezoid_weights(&grid, &density);
    Ok(TauPosterior {
        grid,
        density,
        log_marginals,
        weights,
        log_normalizer: z.ln() + shift,
        prior,
    })
}

/// Posterior of `mu`: a finite mixture of normals.
#[derive(Debug, Clone, PartialEq)]
pub struct MuPosterior {
    means: Vec<f64>,
    sds: Vec<f64>,
    weights: Vec<f64>,
}

// Components lighter than this are dropped; their total is far below any
// reported precision.
const NEGLIGIBLE_WEIGHT: f64 = 1e-16;

pub fn posterior_mu(ds: &Dataset, tau_post: &TauPosterior) -> MuPosterior {
    let mut means = Vec::with_capacity(tau_post.grid.len());
    let mut sds = Vec::with_capacity(tau_post.grid.len());
    let mut weights = Vec::with_capacity(tau_post.grid.len());
    for (&t, &w) in tau_post.grid.iter().zip(&tau_post.weights) {
        if w <= NEGLIGIBLE_WEIGHT {
            continue;
        }
        let st = weighted_stats(ds, t);
        means.push(st.mu);
        sds.push((1.0 / st.w_sum).sqrt());
        weights.push(w);
    }
    MuPosterior { means, sds, weights }
}

impl MuPosterior {
    pub fn cdf(&self, mu: f64) -> f64 {
        self.components().map(|(m, s, w)| w * normal_cdf((mu - m) / s)).sum()
    }

    pub fn pdf(&self, mu: f64) -> f64 {
        self.components().map(|(m, s, w)| w * normal_pdf((mu - m) / s) / s).sum()
    }

    pub fn mean(&self) -> f64 {
        self.components().map(|(m, _, w)| w * m).sum::<f64>() / self.total()
    }

    fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    fn variance(&self) -> f64 {
        let mean = self.mean();
        self.components()
            .map(|(m, s, w)| w * (s * s + (m - mean).powi(2)))
            .sum::<f64>()
            / self.total()
    }

    fn components(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.means
            .iter()
            .zip(&self.sds)
            .zip(&self.weights)
            .map(|((&m, &s), &w)| (m, s, w))
    }

    /// Quantile by safeguarded Newton iteration on the mixture CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let target = p * self.total();
        let (mut lo, mut hi) = self.components().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (m, s, _)| {
            (lo.min(m - 40.0 * s), hi.max(m + 40.0 * s))
        });
        let mut x = self.mean() + self.variance().sqrt() * normal_quantile(p);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let f = self.cdf(x) - target;
            if f.abs() <= 1e-14 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.pdf(x);
            let newton = x - f / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-13 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// Equal-tailed credible interval.
    pub fn central_interval(&self, level: f64) -> Result<IntervalEstimate> {
        check_level(level)?;
        let alpha = 1.0 - level;
        Ok(IntervalEstimate {
            lower: self.quantile(alpha / 2.0),
            upper: self.quantile(1.0 - alpha / 2.0),
            level,
            method: IntervalMethod::Bayes,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub mu_median: f64,
    pub mu_mean: f64,
    /// Central (equal-tailed) interval.
    pub mu_interval: IntervalEstimate,
    pub tau_median: f64,
    /// Shortest interval.
    pub tau_interval: TauInterval,
    pub prior: PriorSpec,
}

pub fn summarize_posterior(ds: &Dataset, prior: &PriorSpec, level: f64, cfg: &BayesConfig) -> Result<PosteriorSummary> {
    check_level(level)?;
    let tau_post = posterior_tau(ds, prior, cfg)?;
    let mu_post = posterior_mu(ds, &tau_post);
    Ok(PosteriorSummary {
        mu_median: mu_post.median(),
        mu_mean: mu_post.mean(),
        mu_interval: mu_post.central_interval(level)?,
        tau_median: tau_post.median(),
        tau_interval: tau_post.shortest_interval(level)?,
        prior: *tau_post.prior(),
    })
}
