use rand::Rng;
use rand_distr::{Binomial, ChiSquared, Distribution, StandardNormal};

use crate::effect_sizes::{dataset_from_tables, TwoByTwoTable};
use crate::error::{Error, Result};
use crate::model::Dataset;

use super::rng::{fingerprint, stream_rng, DrawRole};

/// Normal-data scenario: `theta_j ~ N(mu_true, tau2)`, `y_j ~ N(theta_j, s_j^2)`
/// with chi-square based standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalScenario {
    pub k: usize,
    pub tau2: f64,
    pub n_reps: usize,
    pub mu_true: f64,
    pub seed: u64,
}

/// Binomial two-arm scenario with correlated arm log-odds.
#[derive(Debug, Clone, PartialEq)]
pub struct BinomialScenario {
    pub name: Option<String>,
    /// `(control, treatment)` means on the log-odds scale.
    pub arm_means: (f64, f64),
    pub arm_var: f64,
    pub rho: f64,
    /// Per-study `(n_treatment, n_control)`.
    pub patient_counts: Vec<(u64, u64)>,
    pub n_reps: usize,
    pub seed: u64,
}

impl NormalScenario {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!("k must be at least 2, got {}", self.k)));
        }
        if !(self.tau2 >= 0.0 && self.tau2.is_finite()) {
            return Err(Error::InvalidConfig(format!("tau2 must be >= 0, got {}", self.tau2)));
        }
        if self.n_reps == 0 {
            return Err(Error::InvalidConfig("n_reps must be at least 1".into()));
        }
        if !self.mu_true.is_finite() {
            return Err(Error::InvalidConfig("mu_true must be finite".into()));
        }
        Ok(())
    }
}

impl BinomialScenario {
    pub fn k(&self) -> usize {
        self.patient_counts.len()
    }

    /// Heterogeneity of the log odds ratio implied by the arm model,
    /// `sqrt(2 arm_var (1 - rho))`.
    pub fn implied_tau(&self) -> f64 {
        (2.0 * self.arm_var * (1.0 - self.rho)).sqrt()
    }

    /// Mean log odds ratio, treatment versus control.
    pub fn true_effect(&self) -> f64 {
        self.arm_means.1 - self.arm_means.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.k() < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 studies, got {}", self.k())));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if !(self.arm_var > 0.0 && self.arm_var.is_finite()) {
            return Err(Error::InvalidConfig(format!("arm_var must be positive, got {}", self.arm_var)));
        }
        if self.patient_counts.iter().any(|&(t, c)| t == 0 || c == 0) {
            return Err(Error::InvalidConfig("patient counts must be at least 1".into()));
        }
        if self.n_reps == 0 {
            return Err(Error::InvalidConfig("n_reps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Normal(NormalScenario),
    Binomial(BinomialScenario),
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::Normal(s) => format!("normal_k{}_tau2_{}", s.k, s.tau2),
            Scenario::Binomial(s) => match &s.name {
                Some(n) => n.clone(),
                None => format!("binomial_k{}_rho_{}", s.k(), s.rho),
            },
        }
    }

    /// Identifies the data-generating design (not seed or replication count).
    pub fn fingerprint(&self) -> u64 {
        let text = match self {
            Scenario::Normal(s) => format!("normal|{}|{:e}|{:e}", s.k, s.tau2, s.mu_true),
            Scenario::Binomial(s) => format!(
                "binomial|{:e}|{:e}|{:e}|{:e}|{:?}",
                s.arm_means.0, s.arm_means.1, s.arm_var, s.rho, s.patient_counts
            ),
        };
        fingerprint(&text)
    }

    pub fn true_tau(&self) -> f64 {
        match self {
            Scenario::Normal(s) => s.tau2.sqrt(),
            Scenario::Binomial(s) => s.implied_tau(),
        }
    }

    /// The value the intervals are meant to cover.
    pub fn target_mu(&self) -> f64 {
        match self {
            Scenario::Normal(s) => s.mu_true,
            Scenario::Binomial(s) => s.true_effect(),
        }
    }

    pub fn n_reps(&self) -> usize {
        match self {
            Scenario::Normal(s) => s.n_reps,
            Scenario::Binomial(s) => s.n_reps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::Normal(s) => s.validate(),
            Scenario::Binomial(s) => s.validate(),
        }
    }

    pub fn simulate(&self, rep: u64) -> Result<Dataset> {
        match self {
            Scenario::Normal(s) => Ok(simulate_normal_replication(s, rep)),
            Scenario::Binomial(s) => simulate_binomial_replication(s, rep),
        }
    }
}

pub const SE2_SCALE: f64 = 0.25;
pub const SE2_MIN: f64 = 0.009;
pub const SE2_MAX: f64 = 0.6;

/// Standard errors with `s^2 = 0.25 X`, `X ~ chi2(1)`, redrawn until
/// `s^2` lies in `[0.009, 0.6]`.
pub fn draw_standard_errors<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let chi2 = ChiSquared::new(1.0).expect("valid df");
    (0..k)
        .map(|_| loop {
            let s2 = SE2_SCALE * chi2.sample(rng);
            if (SE2_MIN..=SE2_MAX).contains(&s2) {
                break s2.sqrt();
            }
        })
        .collect()
}

pub fn simulate_normal_replication(sc: &NormalScenario, rep: u64) -> Dataset {
    let fp = Scenario::Normal(sc.clone()).fingerprint();
    let ses = draw_standard_errors(sc.k, &mut stream_rng(sc.seed, fp, rep, DrawRole::StandardErrors));
    let mut effects = stream_rng(sc.seed, fp, rep, DrawRole::Effects);
    let mut noise = stream_rng(sc.seed, fp, rep, DrawRole::Observations);
    let tau = sc.tau2.sqrt();
    let pairs: Vec<(f64, f64)> = ses
        .into_iter()
        .map(|se| {
            let z: f64 = StandardNormal.sample(&mut effects);
            let theta = sc.mu_true + tau * z;
            let e: f64 = StandardNormal.sample(&mut noise);
            (theta + se * e, se)
        })
        .collect();
    Dataset::from_pairs(&pairs).expect("simulated studies are valid")
}

/// Draws correlated arm log-odds, binomial event counts and converts the
/// resulting tables to log odds ratios.
pub fn simulate_binomial_replication(sc: &BinomialScenario, rep: u64) -> Result<Dataset> {
    let fp = Scenario::Binomial(sc.clone()).fingerprint();
    let mut arms = stream_rng(sc.seed, fp, rep, DrawRole::ArmLogOdds);
    let mut events = stream_rng(sc.seed, fp, rep, DrawRole::Events);
    let tables: Vec<(String, TwoByTwoTable)> = sc
        .patient_counts
        .iter()
        .enumerate()
        .map(|(j, &(n_t, n_c))| {
            let (lambda_c, lambda_t) = draw_arm_log_odds(sc, &mut arms);
            let r_c = Binomial::new(n_c, expit(lambda_c)).expect("valid p").sample(&mut events);
            let r_t = Binomial::new(n_t, expit(lambda_t)).expect("valid p").sample(&mut events);
            Ok(((j + 1).to_string(), TwoByTwoTable::new(r_t, n_t, r_c, n_c)?))
        })
        .collect::<Result<_>>()?;
    dataset_from_tables(&tables)
}

/// One `(control, treatment)` pair of log-odds from the bivariate normal.
pub(crate) fn draw_arm_log_odds<R: Rng + ?Sized>(sc: &BinomialScenario, rng: &mut R) -> (f64, f64) {
    let sd = sc.arm_var.sqrt();
    let cross = (1.0 - sc.rho * sc.rho).sqrt();
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    (sc.arm_means.0 + sd * z1, sc.arm_means.1 + sd * (sc.rho * z1 + cross * z2))
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}
