use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate study id `{0}`")]
    DuplicateId(String),

    #[error("study `{id}`: {reason}")]
    InvalidStudy { id: String, reason: String },

    #[error("study `{id}`: invalid 2x2 table: {reason}")]
    InvalidTable { id: String, reason: String },

    #[error("{what} requires at least {needed} studies, got {found}")]
    TooFewStudies {
        what: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("{method}: no convergence after {iterations} iterations (best tau = {best_tau})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        best_tau: f64,
    },

    #[error("{what}: root not bracketed within [0, {tau_max}]; increase tau_max")]
    NotBracketed { what: &'static str, tau_max: f64 },

    #[error("posterior normalizer underflow: no mass on [0, {tau_cut}]")]
    NormalizerUnderflow { tau_cut: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("failure budget exceeded: {}", breaches.join("; "))]
    FailureBudget {
        breaches: Vec<String>,
        metrics: Vec<crate::simulation::SimulationMetrics>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
