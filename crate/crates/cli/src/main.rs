//! `lmax`: exact and simulated laws of the excursion maximum of
//! nearest-neighbor walks with asymptotically zero drift.
//!
//! Results go to stdout as CSV (one header row) or JSON (`{"meta", "rows"}`);
//! diagnostics go to stderr. Exit status: 0 success, 1 runtime or resource
//! failure, 2 usage error.

mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmax_core::asymptotics::{estimate_constant, AsymptoticShape, ShapeTarget};
use lmax_core::classify::{classify_with_series, Verdict};
use lmax_core::excursion::MaxPmfTable;
use lmax_core::first_passage::{hit_after, hit_before, return_prob, HittingQuery, TruncationOptions};
use lmax_core::montecarlo::{self, SimConfig, DEFAULT_CAP_HEIGHT, DEFAULT_CAP_STEPS};
use lmax_core::series::{ProductSeries, DEFAULT_MAX_TERMS};
use lmax_core::walk::{Sign, WalkParams, WalkSpec};
use lmax_core::Error;
use serde_json::{json, Value};

use crate::output::{Cell, Format, Report};

/// Environment variable capping the number of tabulated terms.
const MAX_TABLE_ENV: &str = "LMAX_MAX_TABLE";

#[derive(Debug, Parser)]
#[command(name = "lmax", version, about = "Excursion maximum of random walks with asymptotically zero drift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact law P(M = n, D < inf) for n = 1..n-max.
    Dist {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        n_max: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Transient / null recurrent / positive recurrent label.
    Classify {
        #[command(flatten)]
        walk: WalkArgs,
        /// Terms used for the partial-sum diagnostic.
        #[arg(long, default_value_t = 100_000)]
        n_max: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Asymptotic shape and fitted constant c_hat(n) = exact(n)/shape(n).
    Asympt {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, value_enum, default_value_t = TargetArg::Pmf)]
        target: TargetArg,
        #[arg(long)]
        n_lo: u64,
        #[arg(long)]
        n_hi: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Probability of hitting a before b from k.
    Hit {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        b: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Return probability P(D < inf) with its bracket.
    Return {
        #[command(flatten)]
        walk: WalkArgs,
        #[arg(long, default_value_t = 100_000)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo excursion counts.
    Simulate {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Simulate, then z-score every bin against the exact law.
    Compare {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Constant,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    Pmf,
    Product,
}

#[derive(Debug, Args)]
struct WalkArgs {
    /// Constant up-probability p in (0, 1).
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
    /// Depth of the iterated-log perturbation.
    #[arg(long = "K", id = "K")]
    k: Option<u32>,
    #[arg(long = "B", id = "B", allow_negative_numbers = true)]
    b: Option<f64>,
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    excursions: u64,
    /// Generated and reported when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_CAP_STEPS)]
    cap_steps: u64,
    #[arg(long, default_value_t = DEFAULT_CAP_HEIGHT)]
    cap_height: u64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

impl WalkArgs {
    fn spec(&self) -> CliResult<WalkSpec> {
        let family = self.family.unwrap_or(if self.p.is_some() {
            FamilyArg::Constant
        } else {
            FamilyArg::Perturbed
        });
        let params = match family {
            FamilyArg::Constant => {
                if self.sign.is_some() || self.k.is_some() || self.b.is_some() {
                    return Err(CliError::Usage("--sign/--K/--B only apply to --family perturbed".into()));
                }
                let p = self.p.ok_or_else(|| CliError::Usage("constant walk needs --p".into()))?;
                WalkParams::Constant { p }
            }
            FamilyArg::Perturbed => {
                if self.p.is_some() {
                    return Err(CliError::Usage("--p conflicts with --family perturbed".into()));
                }
                let (Some(sign), Some(k), Some(b)) = (self.sign, self.k, self.b) else {
                    return Err(CliError::Usage("perturbed walk needs --sign, --K and --B".into()));
                };
                let sign = match sign {
                    SignArg::Plus => Sign::Plus,
                    SignArg::Minus => Sign::Minus,
                };
                WalkParams::Perturbed { k, b, sign }
            }
        };
        Ok(WalkSpec::from_params(params)?)
    }
}

fn table_budget() -> CliResult<usize> {
    match std::env::var(MAX_TABLE_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{MAX_TABLE_ENV}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_MAX_TERMS),
    }
}

fn build_series(spec: WalkSpec, n_max: usize) -> CliResult<ProductSeries> {
    Ok(ProductSeries::build_with_budget(spec, n_max, table_budget()?)?)
}

fn base_report(command: &str, spec: &WalkSpec, columns: &[&'static str]) -> Report {
    let mut r = Report::new(columns);
    r.meta("command", command);
    r.meta("spec", serde_json::to_value(spec).expect("spec serializes"));
    r.meta("version", env!("CARGO_PKG_VERSION"));
    r
}

fn cmd_dist(spec: WalkSpec, n_max: usize) -> CliResult<Report> {
    let series = build_series(spec, n_max)?;
    let table = MaxPmfTable::build(&series, n_max)?;
    let mut r = base_report("dist", &spec, &["n", "pmf", "log_pmf", "cumulative"]);
    r.meta("n_max", n_max);
    for n in 1..=n_max {
        r.row(vec![
            n.into(),
            table.pmf_values()[n - 1].into(),
            table.log_pmf_values()[n - 1].into(),
            table.cumulative_values()[n].into(),
        ]);
    }
    Ok(r)
}

fn boundary_warning(spec: &WalkSpec) -> Option<String> {
    let WalkParams::Perturbed { b, .. } = spec.params() else {
        return None;
    };
    [1.0, -1.0]
        .into_iter()
        .find(|edge| (b - edge).abs() < 1e-12)
        .map(|edge| format!("warning: B = {b} lies within 1e-12 of the criterion boundary B = {edge}"))
}

fn cmd_classify(spec: WalkSpec, n_max: usize) -> CliResult<Report> {
    let series = build_series(spec, n_max)?;
    let c = classify_with_series(&series);
    let d = c.series_diagnostic.expect("diagnostic requested");
    let mut r = base_report("classify", &spec, &["label", "justification", "diagnostic", "growth_exponent"]);
    r.meta("n_max", n_max);
    r.meta(
        "checkpoints",
        d.checkpoints
            .iter()
            .map(|&(n, l)| json!({"n": n, "log_one_plus_sum": l}))
            .collect::<Vec<_>>(),
    );
    let verdict = match d.verdict {
        Verdict::ApparentlyConvergent => "apparently_convergent",
        Verdict::ApparentlyDivergent => "apparently_divergent",
    };
    r.row(vec![
        c.label.as_str().into(),
        c.justification.as_str().into(),
        verdict.into(),
        d.growth_exponent.into(),
    ]);
    if let Some(w) = boundary_warning(&spec) {
        // always on stderr, whatever the format
        eprintln!("{w}");
        r.meta("warning", w);
    }
    Ok(r)
}

fn cmd_asympt(spec: WalkSpec, target: TargetArg, n_lo: u64, n_hi: u64) -> CliResult<Report> {
    let target = match target {
        TargetArg::Pmf => ShapeTarget::MaxPmf,
        TargetArg::Product => ShapeTarget::Product,
    };
    let shape = AsymptoticShape::new(target, spec)?;
    let n_max = usize::try_from(n_hi).map_err(|_| CliError::Usage("--n-hi too large".into()))?;
    let series = build_series(spec, n_max)?;
    let est = estimate_constant(&series, &shape, n_lo, n_hi)?;
    let mut r = base_report("asympt", &spec, &["n", "exact", "shape", "c_hat"]);
    r.meta("target", serde_json::to_value(target).expect("serializes"));
    r.meta("branch", est.branch.formula());
    r.meta("n_min_valid", shape.n_min_valid);
    r.meta("n_lo", n_lo);
    r.meta("n_hi", n_hi);
    r.meta("drift", serde_json::Number::from_f64(est.drift).map_or(Value::Null, Value::Number));
    r.note(format!(
        "branch {}; drift |c_hat(n_hi)/c_hat(n_hi/2) - 1| = {}",
        est.branch,
        output::format_float(est.drift)
    ));
    for s in &est.samples {
        r.row(vec![s.n.into(), s.log_exact.exp().into(), s.log_shape.exp().into(), s.c_hat.into()]);
    }
    Ok(r)
}

fn cmd_hit(spec: WalkSpec, a: usize, k: usize, b: usize) -> CliResult<Report> {
    let q = HittingQuery::new(a, k, b)?;
    let series = build_series(spec, (b - 1).max(1))?;
    let mut r = base_report("hit", &spec, &["a", "k", "b", "hit_a_first", "hit_b_first"]);
    r.row(vec![
        a.into(),
        k.into(),
        b.into(),
        hit_before(&series, q)?.into(),
        hit_after(&series, q)?.into(),
    ]);
    Ok(r)
}

fn cmd_return(spec: WalkSpec, n_max: usize, tolerance: f64) -> CliResult<Report> {
    if !(tolerance > 0.0) {
        return Err(CliError::Usage(format!("--tolerance must be positive, got {tolerance}")));
    }
    let series = build_series(spec, n_max)?;
    let opts = TruncationOptions { min_terms: n_max, tolerance };
    let ret = return_prob(&series, opts)?;
    let method = serde_json::to_value(ret.method).expect("serializes");
    let method = method.as_str().unwrap_or_default().to_owned();
    let mut r = base_report("return", &spec, &["value", "lower", "upper", "method", "terms"]);
    r.meta("n_max", n_max);
    r.meta("tolerance", tolerance);
    if let Some(w) = &ret.warning {
        r.meta("warning", w.as_str());
        r.note(format!("warning: {w}"));
    }
    r.row(vec![ret.value.into(), ret.lower.into(), ret.upper.into(), method.into(), ret.terms.into()]);
    Ok(r)
}

fn sim_config(spec: WalkSpec, sim: &SimArgs) -> CliResult<SimConfig> {
    let seed = sim.seed.unwrap_or_else(rand::random);
    let mut config = SimConfig::new(spec, sim.excursions, seed);
    if let Some(w) = sim.workers {
        config.workers = w;
    }
    config.cap_steps = sim.cap_steps;
    config.cap_height = sim.cap_height;
    config.validate()?;
    Ok(config)
}

fn sim_meta(r: &mut Report, config: &SimConfig, result: &montecarlo::SimResult) {
    r.meta("seed", config.seed);
    r.meta("excursions", config.excursions);
    r.meta("cap_steps", config.cap_steps);
    r.meta("cap_height", config.cap_height);
    r.meta("censored_height", result.censored_height);
    r.meta("censored_steps", result.censored_steps);
    r.meta("returned", result.returned());
    r.note(format!(
        "seed={} total={} returned={} censored_height={} censored_steps={}",
        config.seed,
        result.total,
        result.returned(),
        result.censored_height,
        result.censored_steps
    ));
}

fn cmd_simulate(spec: WalkSpec, sim: &SimArgs) -> CliResult<Report> {
    let config = sim_config(spec, sim)?;
    let result = montecarlo::run(&config)?;
    let mut r = base_report("simulate", &spec, &["n", "count", "frequency"]);
    sim_meta(&mut r, &config, &result);
    for (i, &c) in result.counts.iter().enumerate() {
        r.row(vec![(i as u64 + 1).into(), c.into(), (c as f64 / result.total as f64).into()]);
    }
    Ok(r)
}

fn cmd_compare(spec: WalkSpec, sim: &SimArgs) -> CliResult<Report> {
    let config = sim_config(spec, sim)?;
    let bins = usize::try_from(config.cap_height - 1).map_err(|_| CliError::Usage("--cap-height too large".into()))?;
    let series = build_series(spec, bins)?;
    let table = MaxPmfTable::build(&series, bins)?;
    let result = montecarlo::run(&config)?;
    let cmp = montecarlo::compare(&result, &table)?;
    let mut r = base_report("compare", &spec, &["n", "exact", "empirical", "stderr", "z"]);
    sim_meta(&mut r, &config, &result);
    r.meta("eligible_bins", cmp.eligible_bins);
    r.meta("flagged", cmp.flagged.clone());
    r.meta("chi_square", cmp.chi_square);
    r.meta("step_censoring_slack", cmp.step_censoring_slack);
    r.meta("passed", cmp.passed());
    r.note(format!(
        "eligible_bins={} flagged={:?} chi_square={}",
        cmp.eligible_bins,
        cmp.flagged,
        output::format_float(cmp.chi_square)
    ));
    for b in &cmp.bins {
        r.row(vec![b.n.into(), b.exact.into(), b.empirical.into(), b.stderr.into(), Cell::Float(b.z)]);
    }
    Ok(r)
}

fn dispatch(command: &Command) -> CliResult<(Report, Format)> {
    Ok(match command {
        Command::Dist { walk, n_max, out } => (cmd_dist(walk.spec()?, *n_max)?, out.format),
        Command::Classify { walk, n_max, out } => (cmd_classify(walk.spec()?, *n_max)?, out.format),
        Command::Asympt { walk, target, n_lo, n_hi, out } => {
            (cmd_asympt(walk.spec()?, *target, *n_lo, *n_hi)?, out.format)
        }
        Command::Hit { walk, a, k, b, out } => (cmd_hit(walk.spec()?, *a, *k, *b)?, out.format),
        Command::Return { walk, n_max, tolerance, out } => {
            (cmd_return(walk.spec()?, *n_max, *tolerance)?, out.format)
        }
        Command::Simulate { walk, sim, out } => (cmd_simulate(walk.spec()?, sim)?, out.format),
        Command::Compare { walk, sim, out } => (cmd_compare(walk.spec()?, sim)?, out.format),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (report, format) = match dispatch(&cli.command) {
        Ok(v) => v,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = io::BufWriter::new(stdout.lock());
    let written = report
        .write(format, &mut out, &mut stderr.lock())
        .and_then(|_| out.flush());
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
