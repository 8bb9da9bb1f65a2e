//! Flat `key = value` campaign configuration.
//!
//! ```text
//! # normal-data grid: one scenario per (k, tau2) pair
//! generator = normal
//! k = 3, 5, 10
//! tau2 = 0, 0.1, 0.5
//! n_reps = 10000
//! seed = 20240101
//! methods = DL-norm, DL-KnHa, half-Normal(0.5)
//! ```
//!
//! Binomial scenarios use `arm_means = <control>, <treatment>`, `arm_var`,
//! `rho` and `patient_counts = 40:40, 60:30, ...` (treatment:control).
//! Optional keys: `name` (binomial scenario label) and `level`.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::case_study::CaseStudy;
use super::methods::{case_study_methods, parse_method_list, split_top_level, Method};
use super::scenario::{BinomialScenario, NormalScenario, Scenario};

pub const DEFAULT_N_REPS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

const KEYS: [&str; 13] = [
    "k", "tau2", "n_reps", "seed", "mu_true", "generator", "arm_means", "arm_var", "rho", "patient_counts",
    "methods", "name", "level",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSpec {
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    pub level: f64,
}

impl CampaignSpec {
    /// Replaces the seed of every scenario.
    pub fn with_seed(mut self, seed: u64) -> Self {
        for sc in &mut self.scenarios {
            match sc {
                Scenario::Normal(s) => s.seed = seed,
                Scenario::Binomial(s) => s.seed = seed,
            }
        }
        self
    }

    pub fn with_n_reps(mut self, n_reps: usize) -> Self {
        for sc in &mut self.scenarios {
            match sc {
                Scenario::Normal(s) => s.n_reps = n_reps,
                Scenario::Binomial(s) => s.n_reps = n_reps,
            }
        }
        self
    }
}

/// Builds the campaign for one of the binomial case studies.
pub fn case_study_campaign(cs: CaseStudy, n_reps: usize, seed: u64) -> CampaignSpec {
    CampaignSpec {
        scenarios: vec![Scenario::Binomial(cs.scenario(n_reps, seed))],
        methods: case_study_methods(),
        level: 0.95,
    }
}

struct Entries {
    map: HashMap<String, (usize, String)>,
}

impl Entries {
    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse { line: *line, message: format!("{key}: cannot parse `{v}`") }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::Parse { line: *line, message: format!("{key}: cannot parse `{}`", t.trim()) })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn err(&self, key: &str, message: String) -> Error {
        let line = self.get(key).map_or(0, |e| e.0);
        Error::Parse { line, message: format!("{key}: {message}") }
    }

    fn require(&self, key: &str, generator: &str) -> Result<()> {
        if self.get(key).is_none() {
            return Err(Error::Parse { line: 0, message: format!("{key}: required for the {generator} generator") });
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
        let key = key.trim().to_ascii_lowercase();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}` (known: {})", KEYS.join(", ")),
            });
        }
        if map.insert(key.clone(), (line, value.trim().to_string())).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    Ok(Entries { map })
}

fn parse_counts(e: &Entries) -> Result<Vec<(u64, u64)>> {
    let (line, v) = e.get("patient_counts").expect("checked by caller");
    split_top_level(v)
        .iter()
        .map(|pair| {
            let bad = || Error::Parse {
                line: *line,
                message: format!("patient_counts: expected `n_treatment:n_control`, got `{pair}`"),
            };
            let (t, c) = pair.split_once(':').ok_or_else(bad)?;
            Ok((t.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn parse_campaign_config(text: &str) -> Result<CampaignSpec> {
    let e = tokenize(text)?;
    let n_reps = e.parse("n_reps")?.unwrap_or(DEFAULT_N_REPS);
    let seed = e.parse("seed")?.unwrap_or(DEFAULT_SEED);
    let level = e.parse("level")?.unwrap_or(0.95);
    if !(level > 0.0 && level < 1.0) {
        return Err(e.err("level", format!("must lie in (0, 1), got {level}")));
    }
    let methods = match e.get("methods") {
        None => case_study_methods(),
        Some((line, v)) => parse_method_list(v).map_err(|err| Error::Parse { line: *line, message: format!("methods: {err}") })?,
    };
    if methods.is_empty() {
        return Err(e.err("methods", "empty list".into()));
    }
    let generator = e.get("generator").map_or("normal", |(_, v)| v.as_str()).to_ascii_lowercase();
    let scenarios = match generator.as_str() {
        "normal" => {
            for key in ["arm_means", "arm_var", "rho", "patient_counts", "name"] {
                if e.get(key).is_some() {
                    return Err(e.err(key, "not used by the normal generator".into()));
                }
            }
            e.require("k", "normal")?;
            e.require("tau2", "normal")?;
            let ks: Vec<usize> = e.list("k")?.unwrap();
            let tau2s: Vec<f64> = e.list("tau2")?.unwrap();
            let mu_true = e.parse("mu_true")?.unwrap_or(0.0);
            let mut out = Vec::with_capacity(ks.len() * tau2s.len());
            for &k in &ks {
                for &tau2 in &tau2s {
                    let sc = NormalScenario { k, tau2, n_reps, mu_true, seed };
                    sc.validate().map_err(|err| e.err(if k < 2 { "k" } else { "tau2" }, err.to_string()))?;
                    out.push(Scenario::Normal(sc));
                }
            }
            out
        }
        "binomial" => {
            for key in ["tau2", "mu_true"] {
                if e.get(key).is_some() {
                    return Err(e.err(key, "not used by the binomial generator".into()));
                }
            }
            for key in ["arm_means", "arm_var", "rho", "patient_counts"] {
                e.require(key, "binomial")?;
            }
            let means: Vec<f64> = e.list("arm_means")?.unwrap();
            if means.len() != 2 {
                return Err(e.err("arm_means", format!("expected `control, treatment`, got {} values", means.len())));
            }
            let patient_counts = parse_counts(&e)?;
            if let Some(k) = e.parse::<usize>("k")? {
                if k != patient_counts.len() {
                    return Err(e.err("k", format!("{k} does not match {} patient_counts entries", patient_counts.len())));
                }
            }
            let sc = BinomialScenario {
                name: e.get("name").map(|(_, v)| v.clone()),
                arm_means: (means[0], means[1]),
                arm_var: e.parse("arm_var")?.unwrap(),
                rho: e.parse("rho")?.unwrap(),
                patient_counts,
                n_reps,
                seed,
            };
            sc.validate().map_err(|err| Error::Parse { line: 0, message: err.to_string() })?;
            vec![Scenario::Binomial(sc)]
        }
        other => return Err(e.err("generator", format!("expected normal or binomial, got `{other}`"))),
    };
    if n_reps == 0 {
        return Err(e.err("n_reps", "must be at least 1".into()));
    }
    Ok(CampaignSpec { scenarios, methods, level })
}
