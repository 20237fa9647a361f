//! Command-line front end. Exit codes: 0 when every check or trial passes,
//! 1 when one fails, 2 on usage or configuration errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use neumann_core::harness::{extremality_search, summarize, Direction, SearchOptions, SearchResult, TrialOptions, TrialSummary};
use neumann_core::{EnergyReport, Kernel, NeumannKernel, Scheme};
use serde::Serialize;

use crate::config::{parse_domain, RunConfig, Tolerances};
use crate::error::CliError;
use crate::output::{emit, to_json, trials_csv};
use crate::parallel;
use crate::suites::{self, SuiteOptions};

/// JSON schema of the configuration files.
pub const CONFIG_SCHEMA: &str = include_str!("../../../schema/configuration.schema.json");

#[derive(Debug, Parser)]
#[command(name = "neumann", version, about = "Neumann functions, discrete Neumann energies and their checks")]
pub struct Cli {
    /// Worker threads (default: $NEUMANN_THREADS, else one per core)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the kernel at a pair of points, or over a point set
    KernelEval(KernelEvalArgs),
    /// Energy, quadratic form and expansion coefficients of a configuration
    Energy(EnergyArgs),
    /// Run the verification suite of a domain
    Verify(VerifyArgs),
    /// Random-angle trials against the symmetric configuration
    Trials(TrialsArgs),
    /// Simplex search for a configuration beating the symmetric one
    Search(SearchArgs),
    /// Print the configuration JSON schema
    Schema(SchemaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Theorem1,
    Theorem2,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Theorem1 => Scheme::Theorem1,
            SchemeArg::Theorem2 => Scheme::Theorem2,
        }
    }
}

#[derive(Debug, Args)]
pub struct KernelEvalArgs {
    /// disk, annulus:<mu> or ball<d>
    #[arg(long, conflicts_with = "config")]
    pub domain: Option<String>,
    /// Configuration with `points`; prints the kernel matrix
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated coordinates of x
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Comma-separated coordinates of y; omit for the diagonal value at x
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// disk, annulus:<mu> or ball<d>
    #[arg(long)]
    pub domain: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo samples of the Dirichlet-integral check (disk)
    #[arg(long, default_value_t = suites::DEFAULT_MC_SAMPLES)]
    pub samples: usize,
    /// Skip the Dirichlet-integral check
    #[arg(long)]
    pub no_dirichlet: bool,
    /// Tolerance override, key=value (repeatable)
    #[arg(long = "tol")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrialsArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Number of trials (default: `trials` in the config, else 1000)
    #[arg(long)]
    pub n: Option<usize>,
    /// Master seed (default: `seed` in the config, else 0)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rotate the equally spaced angles instead of drawing random ones
    #[arg(long)]
    pub equality: bool,
    /// CSV of trial records (default: stdout)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON summary (default: stderr)
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// SVG histogram of the gaps
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[arg(long = "tol")]
    pub tol: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long = "tol")]
    pub tol: Vec<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a check or trial failed.
pub fn run(cli: Cli) -> Result<bool, CliError> {
    let pool = parallel::pool(cli.threads)?;
    pool.install(|| match cli.command {
        Command::KernelEval(a) => kernel_eval(a),
        Command::Energy(a) => energy(a),
        Command::Verify(a) => verify(a),
        Command::Trials(a) => trials(a),
        Command::Search(a) => search(a),
        Command::Schema(a) => emit(a.output.as_deref(), CONFIG_SCHEMA.as_bytes()).map(|_| true),
    })
}

fn tolerances(base: &Tolerances, overrides: &[String]) -> Result<Tolerances, CliError> {
    let mut t = base.clone();
    for o in overrides {
        t.set(o)?;
    }
    Ok(t)
}

#[derive(Debug, Serialize)]
struct PairValue {
    domain: String,
    x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diag: Option<f64>,
}

#[derive(Debug, Serialize)]
struct KernelMatrix {
    domain: String,
    scale: f64,
    points: Vec<Vec<f64>>,
    /// `N(x_k, x_l)` off the diagonal, the regular part on it.
    values: Vec<Vec<f64>>,
}

fn kernel_eval(a: KernelEvalArgs) -> Result<bool, CliError> {
    if let Some(path) = &a.config {
        let r = RunConfig::load(path)?.resolve(None)?;
        let (pts, _) = r
            .explicit
            .ok_or_else(|| CliError::Config("kernel-eval needs `points` and `charges` in the config".into()))?;
        let k = NeumannKernel::new(r.domain).map_err(CliError::config)?;
        let mut values = Vec::with_capacity(pts.len());
        for (i, x) in pts.iter().enumerate() {
            let row = pts
                .iter()
                .enumerate()
                .map(|(j, y)| if i == j { k.diag(x) } else { k.value(x, y) })
                .collect::<Result<Vec<f64>, _>>()?;
            values.push(row);
        }
        let out = KernelMatrix {
            domain: r.domain.label(),
            scale: r.scale,
            points: pts.iter().map(<[f64]>::to_vec).collect(),
            values,
        };
        emit(a.output.as_deref(), &to_json(&out)?)?;
        return Ok(true);
    }
    let domain = parse_domain(
        a.domain
            .as_deref()
            .ok_or_else(|| CliError::Usage("kernel-eval needs --domain or --config".into()))?,
    )?;
    let x = a.x.ok_or_else(|| CliError::Usage("kernel-eval needs --x".into()))?;
    let k = NeumannKernel::new(domain).map_err(CliError::config)?;
    let check = |p: &[f64]| {
        if p.len() != domain.dim() {
            Err(CliError::Usage(format!("{} needs {} coordinates, got {}", domain.label(), domain.dim(), p.len())))
        } else if !domain.contains(p) {
            Err(CliError::Usage(format!("point {p:?} is outside {}", domain.label())))
        } else {
            Ok(())
        }
    };
    check(&x)?;
    let out = match a.y {
        Some(y) => {
            check(&y)?;
            let value = k.value(&x, &y)?;
            PairValue {
                domain: domain.label(),
                x,
                y: Some(y),
                value: Some(value),
                diag: None,
            }
        }
        None => {
            let diag = k.diag(&x)?;
            PairValue {
                domain: domain.label(),
                x,
                y: None,
                value: None,
                diag: Some(diag),
            }
        }
    };
    emit(a.output.as_deref(), &to_json(&out)?)?;
    Ok(true)
}

#[derive(Debug, Serialize)]
struct EnergyOutput {
    scale: f64,
    report: EnergyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    angles: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    en_xstar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
}

fn energy(a: EnergyArgs) -> Result<bool, CliError> {
    let cfg = RunConfig::load(&a.config)?;
    let r = cfg.resolve(None)?;
    let k = NeumannKernel::new(r.domain).map_err(CliError::config)?;
    let out = if let Some((pts, q)) = &r.explicit {
        EnergyOutput {
            scale: r.scale,
            report: EnergyReport::compute(&k, pts, q, cfg.scheme, cfg.seed)?,
            angles: None,
            en_xstar: None,
            gap: None,
        }
    } else if let Some(c) = &r.configuration {
        let x = c.realize()?;
        let report = EnergyReport::compute(&k, &x.points, &x.charges, Some(c.scheme), cfg.seed)?;
        let star = c.symmetrize()?.realize()?;
        let en_xstar = neumann_core::energy::neumann_energy(&k, &star.points, &star.charges)?;
        EnergyOutput {
            scale: r.scale,
            gap: Some(report.en - en_xstar),
            angles: Some(c.angles.clone()),
            en_xstar: Some(en_xstar),
            report,
        }
    } else {
        return Err(CliError::Config("energy needs `circles` or `points`".into()));
    };
    emit(a.output.as_deref(), &to_json(&out)?)?;
    Ok(true)
}

fn verify(a: VerifyArgs) -> Result<bool, CliError> {
    let domain = parse_domain(&a.domain)?;
    let opts = SuiteOptions {
        seed: a.seed,
        mc_samples: a.samples,
        dirichlet: !a.no_dirichlet,
        tolerances: tolerances(&Tolerances::default(), &a.tol)?,
    };
    let rep = suites::run(domain, &opts)?;
    emit(a.output.as_deref(), &to_json(&rep)?)?;
    Ok(rep.passed)
}

#[derive(Debug, Serialize)]
struct TrialsSummary {
    domain: String,
    scheme: Scheme,
    m: usize,
    seed: u64,
    tol_gap: f64,
    equality: bool,
    en_xstar: f64,
    #[serde(flatten)]
    summary: TrialSummary,
}

fn trials(a: TrialsArgs) -> Result<bool, CliError> {
    let cfg = RunConfig::load(&a.config)?;
    let r = cfg.resolve(a.scheme.map(Scheme::from))?;
    let base = r
        .configuration
        .ok_or_else(|| CliError::Config("trials need `circles` with `m` or `angles`".into()))?;
    let t = tolerances(&cfg.tolerances, &a.tol)?;
    let defaults = TrialOptions::default();
    let opts = TrialOptions {
        min_gap: t.min_gap.unwrap_or(defaults.min_gap),
        tol_gap: t.tol_gap.unwrap_or(defaults.tol_gap),
    };
    let n = a.n.or(cfg.trials).unwrap_or(1000);
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let k = NeumannKernel::new(r.domain).map_err(CliError::config)?;
    let records = if a.equality {
        parallel::equality_trials(&k, &base, n, seed, opts)?
    } else {
        parallel::trials(&k, &base, n, seed, opts)?.1
    };
    let summary = summarize(&records)?;
    let passed = if a.equality {
        records.iter().all(|r| r.gap.abs() <= opts.tol_gap)
    } else {
        summary.violations == 0
    };
    let out = TrialsSummary {
        domain: r.domain.label(),
        scheme: base.scheme,
        m: base.m(),
        seed,
        tol_gap: opts.tol_gap,
        equality: a.equality,
        en_xstar: records[0].en_xstar,
        summary,
    };
    emit(a.output.as_deref(), &trials_csv(&records)?)?;
    let json = to_json(&out)?;
    match &a.summary {
        Some(p) => emit(Some(p), &json)?,
        None => eprint!("{}", String::from_utf8_lossy(&json)),
    }
    if let Some(p) = &a.plot {
        plot_gaps(p, &records.iter().map(|r| r.gap).collect::<Vec<_>>(), &out)?;
    }
    Ok(passed)
}

#[cfg(feature = "plot")]
fn plot_gaps(path: &Path, gaps: &[f64], s: &TrialsSummary) -> Result<(), CliError> {
    let title = format!("{} {} m={} ({} trials)", s.domain, s.scheme.label(), s.m, s.summary.n_trials);
    crate::plot::gap_histogram(path, gaps, &title)
}

#[cfg(not(feature = "plot"))]
fn plot_gaps(_: &Path, _: &[f64], _: &TrialsSummary) -> Result<(), CliError> {
    Err(CliError::Usage("built without the `plot` feature".into()))
}

#[derive(Debug, Serialize)]
struct SearchOutput {
    domain: String,
    scheme: Scheme,
    seed: u64,
    tol: f64,
    #[serde(flatten)]
    result: SearchResult,
}

fn search(a: SearchArgs) -> Result<bool, CliError> {
    let cfg = RunConfig::load(&a.config)?;
    let r = cfg.resolve(None)?;
    let base = r
        .configuration
        .ok_or_else(|| CliError::Config("search needs `circles` with `m` or `angles`".into()))?;
    let t = tolerances(&cfg.tolerances, &a.tol)?;
    let opts = SearchOptions {
        restarts: a.restarts,
        tol: t.search_tol.unwrap_or(SearchOptions::default().tol),
        ..SearchOptions::default()
    };
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let k = NeumannKernel::new(r.domain).map_err(CliError::config)?;
    let result = extremality_search(&k, &base, Direction::for_scheme(base.scheme), seed, &opts)?;
    let ok = !result.violation;
    let out = SearchOutput {
        domain: r.domain.label(),
        scheme: base.scheme,
        seed,
        tol: opts.tol,
        result,
    };
    emit(a.output.as_deref(), &to_json(&out)?)?;
    Ok(ok)
}
