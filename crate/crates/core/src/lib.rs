//! Estimation and simulation tools for random-effects meta-analysis of few
//! studies under the normal-normal hierarchical model.
//!
//! Study estimates `y_j` with known standard errors `s_j` are modelled as
//! `y_j ~ N(mu, s_j^2 + tau^2)`. The crate provides heterogeneity estimators
//! for `tau`, frequentist intervals for `mu`, a grid-based Bayesian
//! posterior, and a reproducible Monte Carlo harness comparing them.

pub mod bayes;
pub mod dist;
pub mod effect_sizes;
pub mod error;
pub mod heterogeneity;
pub mod model;
mod optimize;
pub mod pooling;
pub mod simulation;

pub use error::{Error, Result};
