//! Bayesian inference for the normal-normal hierarchical model.

mod posterior;
mod prior;

pub use posterior::{
    posterior_mu, posterior_tau, summarize_posterior, tau_log_marginal, BayesConfig, MuPosterior,
    PosteriorSummary, TauPosterior,
};
pub use prior::{across_trial_or_interval, PriorSpec};

/// Density of the prior at `tau`.
pub fn prior_density(spec: &PriorSpec, tau: f64) -> f64 {
    spec.density(tau)
}

/// Inverse CDF of the prior.
pub fn prior_quantile(spec: &PriorSpec, p: f64) -> f64 {
    spec.quantile(p)
}
