//! The `nnhm` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 simulation failure budget exceeded.

pub mod forest;
pub mod input;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nnhm::bayes::{BayesConfig, PriorSpec};
use nnhm::heterogeneity::EstimatorConfig;
use nnhm::model::TauMethod;
use nnhm::simulation::{
    case_study_campaign, parse_campaign_config, run_campaign, split_top_level, write_metrics_csv, CampaignConfig,
    CampaignSpec, CaseStudy, EvalConfig, IntervalKind, Method, Scenario, SimulationMetrics,
};
use nnhm::Error;

use crate::input::{parse_dataset, InputFormat};
use crate::report::{analyze, default_methods, render_text, write_report_csv, AnalysisOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nnhm", version, about = "Random-effects meta-analysis of few studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a dataset with every requested method.
    Analyze(AnalyzeArgs),
    /// Run a simulation campaign described by a config file.
    Simulate(SimulateArgs),
    /// Replicate the binomial case-study comparison (acute or steroid-resistant rejection).
    ReplicateCase(ReplicateArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// CSV with header `study,y,se` or `study,rt,nt,rc,nc`.
    input: PathBuf,
    /// Input schema; detected from the header when omitted.
    #[arg(long, value_parser = ["effects", "counts"])]
    format: Option<String>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Comma-separated estimators (DL, REML, ML, MP, BM; each gives norm and
    /// KnHa rows) or full labels such as DL-norm, REML-KH-MOD, DL-KH. `none`
    /// disables pooling.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated priors such as `half-Normal(0.5), U(0,4), HC(1)`; `none` disables.
    #[arg(long)]
    priors: Option<String>,
    /// Full-precision report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot-ready forest CSV (label, point, lower, upper).
    #[arg(long)]
    forest: Option<PathBuf>,
    /// Static forest plot.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Upper end of the tau search range and posterior grid.
    #[arg(long, default_value_t = 10.0)]
    tau_max: f64,
}

#[derive(Debug, Args)]
struct ThreadArgs {
    /// Worker threads (default: NNHM_THREADS, else all cores).
    #[arg(long, env = "NNHM_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    config: PathBuf,
    /// Metrics CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    threads: ThreadArgs,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config replication count.
    #[arg(long)]
    n_reps: Option<usize>,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    #[arg(long, value_parser = ["ar", "srr"])]
    arm: String,
    #[arg(long, default_value_t = nnhm::simulation::DEFAULT_N_REPS)]
    n_reps: usize,
    #[arg(long, default_value_t = nnhm::simulation::DEFAULT_SEED)]
    seed: u64,
    /// Per-study patient counts `nt:nc, ...` replacing the stand-ins.
    #[arg(long)]
    counts: Option<String>,
    #[command(flatten)]
    threads: ThreadArgs,
    /// `method,coverage,mean_len` CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full metrics CSV.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::NotBracketed { .. } | Error::NormalizerUnderflow { .. } => EXIT_NUMERICAL,
        Error::FailureBudget { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

fn usage(message: String) -> Failure {
    Failure { code: EXIT_USAGE, message }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::ReplicateCase(a) => cmd_replicate(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn is_none(list: &str) -> bool {
    let t = list.trim();
    t.is_empty() || t.eq_ignore_ascii_case("none")
}

fn parse_estimator(s: &str) -> Option<TauMethod> {
    Some(match s.to_ascii_uppercase().as_str() {
        "DL" => TauMethod::DL,
        "REML" => TauMethod::REML,
        "ML" => TauMethod::ML,
        "MP" | "PM" | "EB" => TauMethod::MP,
        "BM" => TauMethod::BM,
        _ => return None,
    })
}

fn resolve_methods(methods: Option<&str>, priors: Option<&str>) -> Result<Vec<Method>, Error> {
    let mut out = Vec::new();
    match methods {
        None => out.extend(default_methods().into_iter().filter(|m| matches!(m, Method::Frequentist { .. }))),
        Some(list) if is_none(list) => {}
        Some(list) => {
            for item in split_top_level(list) {
                match parse_estimator(&item) {
                    Some(e) => {
                        out.push(Method::frequentist(e, IntervalKind::Norm));
                        out.push(Method::frequentist(e, IntervalKind::KnHa));
                    }
                    None => out.push(item.parse()?),
                }
            }
        }
    }
    match priors {
        None => out.extend(report::default_priors().into_iter().map(Method::Bayes)),
        Some(list) if is_none(list) => {}
        Some(list) => {
            for item in split_top_level(list) {
                let p: PriorSpec = item.parse().map_err(|_| Error::UnknownMethod(item.clone()))?;
                out.push(Method::Bayes(p));
            }
        }
    }
    Ok(out)
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Error::InvalidLevel(a.level).into());
    }
    let text = read(&a.input)?;
    let format = a.format.as_deref().map(str::parse::<InputFormat>).transpose()?;
    let ds = parse_dataset(&text, format).map_err(|e| usage(format!("{}: {e}", a.input.display())))?;
    let methods = resolve_methods(a.methods.as_deref(), a.priors.as_deref())?;
    let eval = EvalConfig {
        level: a.level,
        estimator: EstimatorConfig { tau_max: a.tau_max, ..Default::default() },
        bayes: BayesConfig { tau_max: a.tau_max, ..Default::default() },
    };
    let rep = analyze(&ds, &AnalysisOptions { methods, eval })?;
    print!("{}", render_text(&rep));
    if let Some(p) = &a.out {
        write_report_csv(create(p)?, &rep)?;
    }
    let rows = forest::forest_rows(&rep);
    if let Some(p) = &a.forest {
        forest::write_forest_csv(create(p)?, &rows)?;
    }
    if let Some(p) = &a.svg {
        create(p)?
            .write_all(forest::render_svg(&rows).as_bytes())
            .map_err(|e| usage(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn threads(t: &ThreadArgs) -> Result<Option<usize>, Failure> {
    match t.threads {
        Some(0) => Err(usage("--threads must be at least 1".into())),
        other => Ok(other),
    }
}

// Runs the campaign; on a budget breach the metrics are still handed to
// `emit` before the failure is reported.
fn run_and_emit(
    spec: &CampaignSpec,
    threads: Option<usize>,
    mut emit: impl FnMut(&[SimulationMetrics]) -> Result<(), Failure>,
) -> Result<(), Failure> {
    let cfg = CampaignConfig {
        eval: EvalConfig { level: spec.level, ..Default::default() },
        threads,
        ..Default::default()
    };
    match run_campaign(&spec.scenarios, &spec.methods, &cfg) {
        Ok(m) => emit(&m),
        Err(Error::FailureBudget { breaches, metrics }) => {
            emit(&metrics)?;
            Err(Error::FailureBudget { breaches, metrics: vec![] }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let text = read(&a.config)?;
    let mut spec = parse_campaign_config(&text).map_err(|e| usage(format!("{}: {e}", a.config.display())))?;
    if let Some(seed) = a.seed {
        spec = spec.with_seed(seed);
    }
    if let Some(n) = a.n_reps {
        if n == 0 {
            return Err(usage("--n-reps must be at least 1".into()));
        }
        spec = spec.with_n_reps(n);
    }
    let threads = threads(&a.threads)?;
    run_and_emit(&spec, threads, |m| match &a.out {
        Some(p) => Ok(write_metrics_csv(create(p)?, m)?),
        None => Ok(write_metrics_csv(io::stdout().lock(), m)?),
    })
}

fn parse_counts(list: &str) -> Result<Vec<(u64, u64)>, Failure> {
    split_top_level(list)
        .iter()
        .map(|pair| {
            let bad = || usage(format!("--counts: expected `nt:nc`, got `{pair}`"));
            let (t, c) = pair.split_once(':').ok_or_else(bad)?;
            Ok((t.trim().parse().map_err(|_| bad())?, c.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn write_case_table<W: Write>(out: W, methods: &[Method], metrics: &[SimulationMetrics]) -> Result<(), Failure> {
    let io = |e: csv::Error| usage(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "coverage", "mean_len"]).map_err(io)?;
    for (m, r) in methods.iter().zip(metrics) {
        w.write_record([m.table_label(), r.coverage.to_string(), r.mean_len.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| usage(e.to_string()))
}

fn cmd_replicate(a: ReplicateArgs) -> Result<(), Failure> {
    let cs: CaseStudy = a.arm.parse()?;
    if a.n_reps == 0 {
        return Err(usage("--n-reps must be at least 1".into()));
    }
    let mut spec = case_study_campaign(cs, a.n_reps, a.seed);
    if let Some(list) = &a.counts {
        let counts = parse_counts(list)?;
        if let Scenario::Binomial(s) = &mut spec.scenarios[0] {
            s.patient_counts = counts;
        }
    }
    let Scenario::Binomial(sc) = &spec.scenarios[0] else { unreachable!() };
    sc.validate()?;
    let tau = sc.implied_tau();
    let rounded = format!("{tau:.2}");
    let rounded = rounded.trim_end_matches('0').trim_end_matches('.');
    eprintln!("case study {cs}: implied tau = {rounded} (exact {})", report::sig6(tau));
    let threads = threads(&a.threads)?;
    let methods = spec.methods.clone();
    run_and_emit(&spec, threads, |m| {
        if let Some(p) = &a.metrics {
            write_metrics_csv(create(p)?, m)?;
        }
        match &a.out {
            Some(p) => write_case_table(create(p)?, &methods, m),
            None => write_case_table(io::stdout().lock(), &methods, m),
        }
    })
}
