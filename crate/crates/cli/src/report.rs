//! Analysis of one dataset across methods, and its CSV and text renderings.

use std::fmt::Write as _;
use std::io::Write;

use nnhm::bayes::{summarize_posterior, PriorSpec};
use nnhm::dist::normal_quantile;
use nnhm::heterogeneity::tau_q_profile_ci;
use nnhm::model::{Dataset, TauMethod};
use nnhm::simulation::{EvalConfig, Evaluator, IntervalKind, Method};
use nnhm::{Error, Result};

pub const REPORT_HEADER: [&str; 8] = ["kind", "label", "tau", "mu", "se", "lower", "upper", "width"];

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub id: String,
    pub y: f64,
    pub se: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub label: String,
    /// Estimate of `tau`; posterior median for Bayes rows.
    pub tau: f64,
    /// Estimate of `mu`; posterior median for Bayes rows.
    pub mu: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauIntervalRow {
    pub label: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub level: f64,
    pub studies: Vec<StudyRow>,
    pub methods: Vec<MethodRow>,
    pub tau_intervals: Vec<TauIntervalRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub methods: Vec<Method>,
    pub eval: EvalConfig,
}

/// Default frequentist rows: DL, REML, MP and BM with normal and modified
/// Knapp-Hartung intervals, followed by three Bayes priors.
pub fn default_methods() -> Vec<Method> {
    let mut out = Vec::new();
    for est in [TauMethod::DL, TauMethod::REML, TauMethod::MP, TauMethod::BM] {
        out.push(Method::frequentist(est, IntervalKind::Norm));
        out.push(Method::frequentist(est, IntervalKind::KnHa));
    }
    out.extend(default_priors().into_iter().map(Method::Bayes));
    out
}

pub fn default_priors() -> Vec<PriorSpec> {
    vec![
        PriorSpec::HalfNormal { scale: 0.5 },
        PriorSpec::HalfNormal { scale: 1.0 },
        PriorSpec::Uniform { upper: 4.0 },
    ]
}

pub fn analyze(ds: &Dataset, opts: &AnalysisOptions) -> Result<AnalysisReport> {
    let level = opts.eval.level;
    let z = normal_quantile(0.5 + level / 2.0);
    let studies = ds
        .studies()
        .iter()
        .map(|s| StudyRow {
            id: s.id.clone(),
            y: s.y,
            se: s.se,
            lower: s.y - z * s.se,
            upper: s.y + z * s.se,
        })
        .collect();
    let mut methods = Vec::with_capacity(opts.methods.len());
    let mut tau_intervals = Vec::new();
    let mut ev = Evaluator::new(ds, &opts.eval);
    let mut seen = Vec::new();
    for m in &opts.methods {
        if seen.contains(m) {
            continue;
        }
        seen.push(*m);
        match m {
            Method::Frequentist { .. } => {
                let o = ev.evaluate(m)?;
                methods.push(MethodRow {
                    label: m.label(),
                    tau: o.tau,
                    mu: o.mu,
                    lower: o.interval.lower,
                    upper: o.interval.upper,
                });
            }
            Method::Bayes(prior) => {
                let s = summarize_posterior(ds, prior, level, &opts.eval.bayes)?;
                methods.push(MethodRow {
                    label: m.label(),
                    tau: s.tau_median,
                    mu: s.mu_median,
                    lower: s.mu_interval.lower,
                    upper: s.mu_interval.upper,
                });
                tau_intervals.push(TauIntervalRow {
                    label: m.label(),
                    lower: s.tau_interval.lower,
                    upper: s.tau_interval.upper,
                });
            }
        }
    }
    if !methods.is_empty() {
        let q = tau_q_profile_ci(ds, level, &opts.eval.estimator)?;
        tau_intervals.insert(0, TauIntervalRow { label: "Q-profile".into(), lower: q.lower, upper: q.upper });
    }
    Ok(AnalysisReport { level, studies, methods, tau_intervals })
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Full-precision CSV; every float is written in shortest round-trip form.
pub fn write_report_csv<W: Write>(out: W, r: &AnalysisReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER).map_err(io)?;
    let f = |x: f64| x.to_string();
    for s in &r.studies {
        w.write_record(["study", &s.id, "", &f(s.y), &f(s.se), &f(s.lower), &f(s.upper), &f(s.upper - s.lower)])
            .map_err(io)?;
    }
    for m in &r.methods {
        w.write_record(["method", &m.label, &f(m.tau), &f(m.mu), "", &f(m.lower), &f(m.upper), &f(m.upper - m.lower)])
            .map_err(io)?;
    }
    for t in &r.tau_intervals {
        w.write_record(["tau_interval", &t.label, "", "", "", &f(t.lower), &f(t.upper), &f(t.upper - t.lower)])
            .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a report written by [`write_report_csv`]. The level is not stored
/// in the file and must be supplied.
pub fn read_report_csv(text: &str, level: f64) -> Result<AnalysisReport> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(io)?.iter().map(str::to_string).collect();
    if header != REPORT_HEADER {
        return Err(Error::Parse { line: 1, message: format!("unexpected report header `{}`", header.join(",")) });
    }
    let mut r = AnalysisReport { level, studies: vec![], methods: vec![], tau_intervals: vec![] };
    for rec in rdr.records() {
        let rec = rec.map_err(io)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::Parse { line, message: format!("column {}: `{}`", REPORT_HEADER[i], &rec[i]) })
        };
        let label = rec[1].to_string();
        match &rec[0] {
            "study" => r.studies.push(StudyRow { id: label, y: num(3)?, se: num(4)?, lower: num(5)?, upper: num(6)? }),
            "method" => r.methods.push(MethodRow { label, tau: num(2)?, mu: num(3)?, lower: num(5)?, upper: num(6)? }),
            "tau_interval" => r.tau_intervals.push(TauIntervalRow { label, lower: num(5)?, upper: num(6)? }),
            other => return Err(Error::Parse { line, message: format!("unknown row kind `{other}`") }),
        }
    }
    Ok(r)
}

/// Six significant digits for human-readable tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn render_text(r: &AnalysisReport) -> String {
    let pct = 100.0 * r.level;
    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {:>12} {:>12} {:>12} {:>12}", "study", "y", "se", "lower", "upper");
    for st in &r.studies {
        let _ = writeln!(s, "{:<20} {:>12} {:>12} {:>12} {:>12}", st.id, sig6(st.y), sig6(st.se), sig6(st.lower), sig6(st.upper));
    }
    if !r.methods.is_empty() {
        let _ = writeln!(s, "\n{:<20} {:>12} {:>12} {:>12} {:>12} {:>12}", "method", "tau", "mu", "lower", "upper", "width");
        for m in &r.methods {
            let _ = writeln!(
                s,
                "{:<20} {:>12} {:>12} {:>12} {:>12} {:>12}",
                m.label,
                sig6(m.tau),
                sig6(m.mu),
                sig6(m.lower),
                sig6(m.upper),
                sig6(m.upper - m.lower)
            );
        }
    }
    if !r.tau_intervals.is_empty() {
        let _ = writeln!(s, "\n{:<20} {:>12} {:>12}   ({pct}% intervals for tau)", "tau interval", "lower", "upper");
        for t in &r.tau_intervals {
            let _ = writeln!(s, "{:<20} {:>12} {:>12}", t.label, sig6(t.lower), sig6(t.upper));
        }
    }
    s
}
