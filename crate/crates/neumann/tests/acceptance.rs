//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use neumann::suites::{self, dirichlet_system, one_circle_base, two_circle_base, SuiteOptions, DIRICHLET_RADII};
use neumann::{parallel, CliError};
use neumann_core::harness::{extremality_search, summarize, Direction, SearchOptions, TrialOptions};
use neumann_core::verification::{
    fourier_oracle_check, theta_derivative_check, theta_product_check, CheckReport, DirichletOptions,
};
use neumann_core::{Configuration, Domain, NeumannKernel, Nome};

type Outcome = Result<(bool, String), CliError>;

const SEED: u64 = 20240611;
const TRIALS: usize = 1000;

fn domains() -> Vec<Domain> {
    let mut v = vec![Domain::Disk, Domain::annulus(0.2).unwrap(), Domain::annulus(0.5).unwrap()];
    v.extend((3..=8).map(|d| Domain::ball(d).unwrap()));
    v
}

fn failures(checks: &[CheckReport]) -> String {
    let bad: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} {:.3e} > {:.0e}", c.name, c.max_residual, c.tolerance))
        .collect();
    if bad.is_empty() {
        format!("{} checks", checks.len())
    } else {
        bad.join("; ")
    }
}

fn worst(checks: &[CheckReport]) -> String {
    let w = checks
        .iter()
        .max_by(|a, b| (a.max_residual / a.tolerance).total_cmp(&(b.max_residual / b.tolerance)));
    match w {
        Some(c) => format!("worst {} {:.3e} (tol {:.0e})", c.name, c.max_residual, c.tolerance),
        None => "no checks".into(),
    }
}

fn inequality(ms: &[usize], base: fn(Domain, usize) -> Result<Configuration, CliError>) -> Outcome {
    let mut violations = 0;
    let mut runs = 0;
    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    for dom in domains() {
        let k = NeumannKernel::new(dom)?;
        for &m in ms {
            let (_, records) = parallel::trials(&k, &base(dom, m)?, TRIALS, SEED, TrialOptions::default())?;
            let s = summarize(&records)?;
            violations += s.violations;
            runs += s.n_trials;
            min_gap = min_gap.min(s.min_gap);
            max_gap = max_gap.max(s.max_gap);
            if s.violations > 0 {
                eprintln!("  {} m={m}: {} violations, argmin seed {}", dom.label(), s.violations, s.argmin_seed);
            }
        }
    }
    Ok((
        violations == 0,
        format!("{runs} trials, {violations} violations, gaps in [{min_gap:.3e}, {max_gap:.3e}]"),
    ))
}

fn theorem1() -> Outcome {
    inequality(&[2, 3, 4, 6], two_circle_base)
}

fn theorem2() -> Outcome {
    inequality(&[2, 4, 6], one_circle_base)
}

fn equality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for dom in domains() {
        let k = NeumannKernel::new(dom)?;
        let mut bases = Vec::new();
        for m in [2, 3, 4, 6] {
            bases.push(two_circle_base(dom, m)?);
        }
        for m in [2, 4, 6] {
            bases.push(one_circle_base(dom, m)?);
        }
        for base in &bases {
            let recs = parallel::equality_trials(&k, base, 100, SEED, TrialOptions::default())?;
            runs += recs.len();
            worst = recs.iter().fold(worst, |w, r| w.max(r.gap.abs()));
        }
    }
    Ok((worst <= 1e-12, format!("{runs} rotated configurations, max |gap| {worst:.3e}")))
}

/// Full suites without the Monte Carlo part, split by check name.
struct SuiteChecks {
    pde: Vec<CheckReport>,
    identities: Vec<CheckReport>,
}

fn suite_checks() -> Result<SuiteChecks, CliError> {
    let mut opts = SuiteOptions::new(SEED);
    opts.dirichlet = false;
    let mut out = SuiteChecks { pde: Vec::new(), identities: Vec::new() };
    for dom in domains() {
        for c in suites::run(dom, &opts)?.checks {
            let pde = ["fd-laplacian", "boundary-flux", "total-flux", "boundary-mean"]
                .iter()
                .any(|p| c.name.starts_with(p));
            let identity = ["qn-minus-en", "charge-weighted", "exchange-symmetry", "constant-shift"]
                .iter()
                .any(|p| c.name.starts_with(p));
            if pde {
                out.pde.push(c);
            } else if identity {
                out.identities.push(c);
            }
        }
    }
    Ok(out)
}

fn pde(checks: &[CheckReport]) -> Outcome {
    let thin: Vec<String> = checks
        .iter()
        .filter(|c| c.name.starts_with("fd-laplacian"))
        .fold(std::collections::BTreeMap::<String, usize>::new(), |mut acc, c| {
            *acc.entry(c.name.clone()).or_default() += c.probes;
            acc
        })
        .into_iter()
        .filter(|(_, n)| *n < 50)
        .map(|(name, n)| format!("{name} has {n} probes"))
        .collect();
    let ok = checks.iter().all(|c| c.passed) && thin.is_empty();
    let mut detail = if ok { worst(checks) } else { failures(checks) };
    if !thin.is_empty() {
        detail = format!("{detail}; {}", thin.join("; "));
    }
    Ok((ok, format!("{} checks over {} domains, {detail}", checks.len(), domains().len())))
}

fn theta() -> Outcome {
    let checks = [theta_product_check(1e-12)?, theta_derivative_check(1e-8)?];
    let ok = checks.iter().all(|c| c.passed);
    let detail = checks
        .iter()
        .map(|c| format!("{} {:.3e}", c.name, c.max_residual))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, detail))
}

fn fourier() -> Outcome {
    let mut checks = Vec::new();
    for mu in [0.2, 0.3, 0.5] {
        checks.push(fourier_oracle_check(Nome::new(mu)?, 20, SEED, 1e-8)?);
    }
    let ok = checks.iter().all(|c| c.passed);
    Ok((ok, if ok { worst(&checks) } else { failures(&checks) }))
}

fn dirichlet() -> Outcome {
    let k = NeumannKernel::new(Domain::Disk)?;
    let (pts, q) = dirichlet_system();
    let start = Instant::now();
    let rep = parallel::dirichlet(&k, &pts, &q, DirichletOptions::new(DIRICHLET_RADII.to_vec(), 1_000_000, SEED))?;
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(600);
    let monotone = rep.residuals.windows(2).all(|w| w[1].abs() < w[0].abs());
    let last = rep.residuals.last().copied().unwrap_or(f64::NAN);
    let ok = rep.passed() && monotone && in_time && (last / rep.qn).abs() <= 0.02;
    let res = rep.residuals.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ");
    Ok((
        ok,
        format!(
            "Qn {:.6}, residuals [{res}], final/|Qn| {:.2e}, {:.1}s",
            rep.qn,
            (last / rep.qn).abs(),
            elapsed.as_secs_f64()
        ),
    ))
}

fn identities(checks: &[CheckReport]) -> Outcome {
    let ok = checks.iter().all(|c| c.passed);
    Ok((ok, if ok { format!("{} checks, {}", checks.len(), worst(checks)) } else { failures(checks) }))
}

fn search() -> Outcome {
    let mut worst_gain: f64 = f64::NEG_INFINITY;
    let mut runs = 0;
    let mut violations = 0;
    for dom in [Domain::Disk, Domain::ball(3).unwrap()] {
        let k = NeumannKernel::new(dom)?;
        for base in [two_circle_base(dom, 3)?, one_circle_base(dom, 4)?] {
            let dir = Direction::for_scheme(base.scheme);
            let r = extremality_search(&k, &base, dir, SEED, &SearchOptions::default())?;
            runs += 1;
            // amount by which the search beat the symmetric value
            let gain = match dir {
                Direction::Minimize => -r.gap_to_symmetric,
                Direction::Maximize => r.gap_to_symmetric,
            };
            worst_gain = worst_gain.max(gain);
            if r.violation || gain > 1e-6 {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{runs} searches x 20 restarts, largest improvement over symmetric {worst_gain:.3e}"),
    ))
}

fn main() {
    let start = Instant::now();
    let suite = suite_checks();
    let (pde_checks, id_checks) = match &suite {
        Ok(s) => (Ok(s.pde.as_slice()), Ok(s.identities.as_slice())),
        Err(e) => (Err(e.to_string()), Err(e.to_string())),
    };

    let results: Vec<(&str, Outcome)> = vec![
        ("1 two-circle inequality", theorem1()),
        ("2 alternating inequality", theorem2()),
        ("3 equality case", equality()),
        (
            "4 kernel PDE certification",
            pde_checks.map_err(CliError::Output).and_then(pde),
        ),
        ("5 theta series vs product", theta()),
        ("6 annulus Fourier oracle", fourier()),
        ("7 Dirichlet asymptotics", dirichlet()),
        (
            "8 algebraic identities",
            id_checks.map_err(CliError::Output).and_then(identities),
        ),
        ("9 extremality search", search()),
    ];

    let mut all = true;
    for (name, r) in results {
        let (ok, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= ok;
        println!("{} [{name}] {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {} in {:.1}s", if all { "all passed" } else { "FAILED" }, start.elapsed().as_secs_f64());
    if !all {
        std::process::exit(1);
    }
}
