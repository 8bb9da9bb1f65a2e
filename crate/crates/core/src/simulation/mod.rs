//! Reproducible Monte Carlo comparison of the estimators and intervals.

mod campaign;
mod case_study;
mod config;
mod methods;
mod rng;
mod scenario;

pub use campaign::{median, run_campaign, summarize_outcomes, write_metrics_csv, CampaignConfig, SimulationMetrics, METRICS_HEADER};
pub use case_study::CaseStudy;
pub use config::{case_study_campaign, parse_campaign_config, CampaignSpec, DEFAULT_N_REPS, DEFAULT_SEED};
pub use methods::{
    case_study_methods, evaluate_method, parse_method_list, split_top_level, EvalConfig, Evaluator, IntervalKind, Method,
    MethodOutcome,
};
pub use rng::{fingerprint, stream_rng, DrawRole};
pub use scenario::{
    draw_standard_errors, simulate_binomial_replication, simulate_normal_replication, BinomialScenario, NormalScenario,
    Scenario,
};
