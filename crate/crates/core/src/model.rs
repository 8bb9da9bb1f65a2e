//! Shared domain types of the normal-normal hierarchical model.
//!
//! Study `j` reports an estimate `y_j` with standard error `s_j`; the true
//! study effects scatter around a common mean `mu` with standard deviation
//! `tau`. Everything downstream works on the marginal model
//! `y_j ~ N(mu, s_j^2 + tau^2)`.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// One study's effect estimate and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub id: String,
    pub y: f64,
    pub se: f64,
    /// Set when the estimate came from a 2x2 table that needed the
    /// half-cell continuity correction.
    pub corrected: bool,
}

impl StudyResult {
    pub fn new(id: impl Into<String>, y: f64, se: f64) -> Self {
        StudyResult {
            id: id.into(),
            y,
            se,
            corrected: false,
        }
    }

    fn check(&self) -> Result<()> {
        if !self.y.is_finite() {
            return Err(Error::InvalidStudy {
                id: self.id.clone(),
                reason: format!("estimate is not finite ({})", self.y),
            });
        }
        if !(self.se > 0.0) || !self.se.is_finite() {
            return Err(Error::InvalidStudy {
                id: self.id.clone(),
                reason: format!("standard error must be positive and finite ({})", self.se),
            });
        }
        Ok(())
    }
}

/// An ordered, validated collection of studies.
///
/// `k = 1` is allowed here; estimators check `k >= 2` themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    studies: Vec<StudyResult>,
}

impl Dataset {
    pub fn from_studies(studies: Vec<StudyResult>) -> Result<Self> {
        if studies.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(studies.len());
        for s in &studies {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
            s.check()?;
        }
        Ok(Dataset { studies })
    }

    /// Builds a dataset from plain `(y, se)` pairs, labelling studies `1..=k`.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        validate_dataset(
            pairs
                .iter()
                .enumerate()
                .map(|(i, &(y, se))| ((i + 1).to_string(), y, se)),
        )
    }

    pub fn k(&self) -> usize {
        self.studies.len()
    }

    pub fn studies(&self) -> &[StudyResult] {
        &self.studies
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.studies.iter().map(|s| s.y)
    }

    pub fn ses(&self) -> impl Iterator<Item = f64> + '_ {
        self.studies.iter().map(|s| s.se)
    }

    pub(crate) fn require_k(&self, needed: usize, what: &'static str) -> Result<()> {
        if self.k() < needed {
            Err(Error::TooFewStudies {
                what,
                needed,
                found: self.k(),
            })
        } else {
            Ok(())
        }
    }

    /// Copy with `c` added to every estimate.
    pub fn shifted(&self, c: f64) -> Dataset {
        let studies = self
            .studies
            .iter()
            .map(|s| StudyResult { y: s.y + c, ..s.clone() })
            .collect();
        Dataset { studies }
    }

    /// Copy with every estimate and standard error multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Dataset {
        assert!(c > 0.0, "scale factor must be positive");
        let studies = self
            .studies
            .iter()
            .map(|s| StudyResult {
                y: s.y * c,
                se: s.se * c,
                ..s.clone()
            })
            .collect();
        Dataset { studies }
    }
}

/// Validates raw `(id, y, se)` triples into a [`Dataset`], preserving order.
pub fn validate_dataset<I, S>(raw: I) -> Result<Dataset>
where
    I: IntoIterator<Item = (S, f64, f64)>,
    S: Into<String>,
{
    let studies = raw
        .into_iter()
        .map(|(id, y, se)| StudyResult::new(id, y, se))
        .collect();
    Dataset::from_studies(studies)
}

/// Heterogeneity estimators known to the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TauMethod {
    /// DerSimonian-Laird moment estimator.
    DL,
    /// Restricted maximum likelihood.
    REML,
    /// Maximum likelihood, profiled over `mu`.
    ML,
    /// Mandel-Paule; reported as "EB" in some tables.
    MP,
    /// Bayes-modal (penalized REML).
    BM,
    /// Marginal posterior median under some prior.
    BayesMedian,
}

impl TauMethod {
    pub fn label(self) -> &'static str {
        match self {
            TauMethod::DL => "DL",
            TauMethod::REML => "REML",
            TauMethod::ML => "ML",
            TauMethod::MP => "MP",
            TauMethod::BM => "BM",
            TauMethod::BayesMedian => "BAYES-median",
        }
    }

    /// Estimators whose boundary solution is an exact zero.
    pub fn can_be_zero(self) -> bool {
        matches!(
            self,
            TauMethod::DL | TauMethod::REML | TauMethod::ML | TauMethod::MP
        )
    }
}

impl fmt::Display for TauMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A level-tagged interval for `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeterogeneityEstimate {
    pub tau: f64,
    pub method: TauMethod,
    pub tau_interval: Option<TauInterval>,
}

impl HeterogeneityEstimate {
    pub fn new(tau: f64, method: TauMethod) -> Self {
        debug_assert!(tau >= 0.0);
        HeterogeneityEstimate {
            tau,
            method,
            tau_interval: None,
        }
    }

    pub fn tau2(&self) -> f64 {
        self.tau * self.tau
    }
}

/// Inverse-variance pooled estimate for a given `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledResult {
    pub mu_hat: f64,
    pub se_mu: f64,
    pub weights: Vec<f64>,
    pub tau_used: f64,
}

impl PooledResult {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalMethod {
    /// Normal quantiles with plug-in `tau`.
    Norm,
    /// Knapp-Hartung with the raw dispersion factor `q`.
    KH,
    /// Knapp-Hartung with `q* = max(1, q)`.
    KHMod,
    /// Bayesian central credible interval.
    Bayes,
}

impl IntervalMethod {
    pub fn tag(self) -> &'static str {
        match self {
            IntervalMethod::Norm => "NORM",
            IntervalMethod::KH => "KH",
            IntervalMethod::KHMod => "KH-MOD",
            IntervalMethod::Bayes => "BAYES",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl IntervalEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(level))
    }
}
