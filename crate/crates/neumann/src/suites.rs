//! Verification suites run by `neumann verify`.

use neumann_core::energy::neumann_energy;
use neumann_core::geometry::{sample_random_angles, symmetric_angles};
use neumann_core::kernels::Shifted;
use neumann_core::verification::{
    boundary_flux_check, boundary_mean_check, energy_identity_checks, fd_laplacian_check, fourier_oracle_check,
    interior_probes, theta_derivative_check, theta_product_check, total_flux_check, CheckReport, DirichletOptions,
    DirichletReport,
};
use neumann_core::{Circle, Configuration, Domain, NeumannKernel, PointSet, Scheme};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::CliError;
use crate::parallel;

pub const DIRICHLET_RADII: [f64; 3] = [0.1, 0.05, 0.025];
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
const PROBES_PER_SOURCE: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub mc_samples: usize,
    /// Run the Dirichlet-integral check (disk only).
    pub dirichlet: bool,
    pub tolerances: Tolerances,
}

impl SuiteOptions {
    pub fn new(seed: u64) -> Self {
        SuiteOptions {
            seed,
            mc_samples: DEFAULT_MC_SAMPLES,
            dirichlet: true,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub domain: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<DirichletReport>,
}

fn point(d: usize, head: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[..head.len()].copy_from_slice(head);
    v
}

/// Sources well inside the domain.
fn sources(domain: Domain) -> Vec<Vec<f64>> {
    match domain {
        Domain::Disk => vec![vec![0.3, 0.2], vec![-0.5, 0.1], vec![0.0, -0.6]],
        Domain::Annulus { mu } => {
            let r = 0.5 * (mu.value() + 1.0);
            [0.4, 2.5, 4.4].iter().map(|t: &f64| vec![r * t.cos(), r * t.sin()]).collect()
        }
        Domain::Ball { d } => {
            let d = d as usize;
            vec![point(d, &[0.3, 0.2]), point(d, &[-0.1, 0.35, 0.25]), point(d, &[0.0, 0.0, -0.45])]
        }
    }
}

/// Two circles with charges +1 and -1, the scheme of the neutral theorem.
pub fn two_circle_base(domain: Domain, m: usize) -> Result<Configuration, CliError> {
    let d = domain.dim();
    let (a, b) = match domain {
        Domain::Annulus { mu } => (mu.value() + 0.25 * (1.0 - mu.value()), mu.value() + 0.75 * (1.0 - mu.value())),
        _ => (0.3, 0.6),
    };
    Configuration::new(
        domain,
        vec![Circle::planar(a, d, 1.0), Circle::planar(b, d, -1.0)],
        symmetric_angles(m),
        Scheme::Theorem1,
    )
    .map_err(CliError::config)
}

/// One circle with alternating charges, the scheme of the second theorem.
pub fn one_circle_base(domain: Domain, m: usize) -> Result<Configuration, CliError> {
    let r = match domain {
        Domain::Annulus { mu } => 0.5 * (mu.value() + 1.0),
        _ => 0.5,
    };
    Configuration::new(
        domain,
        vec![Circle::planar(r, domain.dim(), 1.0)],
        symmetric_angles(m),
        Scheme::Theorem2,
    )
    .map_err(CliError::config)
}

/// The two-point disk system `+1 at 0.5`, `-1 at -0.5`.
pub fn dirichlet_system() -> (PointSet, Vec<f64>) {
    (
        PointSet::from_points(2, [[0.5, 0.0], [-0.5, 0.0]]).expect("two planar points"),
        vec![1.0, -1.0],
    )
}

pub fn run(domain: Domain, opts: &SuiteOptions) -> Result<SuiteReport, CliError> {
    let k = NeumannKernel::new(domain).map_err(CliError::config)?;
    let t = &opts.tolerances;
    let planar = domain.dim() == 2;
    let label = domain.label();
    let mut checks = Vec::new();

    // harmonicity away from the source
    let (h, lap_tol, margin) = if planar { (1e-3, 1e-4, 0.05) } else { (1e-4, 1e-3, 0.2) };
    let lap_tol = t.laplacian.unwrap_or(lap_tol);
    let ys = sources(domain);
    for (i, y) in ys.iter().enumerate() {
        let probes = interior_probes(domain, y, PROBES_PER_SOURCE, 0.3, margin, opts.seed.wrapping_add(i as u64))?;
        checks.push(fd_laplacian_check(&k, y, &probes, h, lap_tol)?);
    }

    // boundary flux: pointwise against -1/|dD| (per circle for the annulus)
    let flux_tol = t.flux.unwrap_or(1e-3);
    let n_flux = if planar { 256 } else { 200 };
    for y in &ys {
        checks.push(boundary_flux_check(&k, y, n_flux, 1e-4, flux_tol)?);
    }
    checks.push(total_flux_check(&k, &ys[0], if planar { 256 } else { 64 }, 1e-4, flux_tol)?);

    // boundary mean: zero for the disk, independent of the source otherwise
    let mean_tol = t.mean.unwrap_or(if domain == Domain::Disk { 1e-10 } else { 1e-6 });
    let mean_sources = match domain {
        Domain::Disk => PointSet::from_points(2, [[0.2, 0.0], [0.0, 0.5], [-0.6, 0.0]])?,
        _ => PointSet::from_points(domain.dim(), ys.iter().cloned())?,
    };
    checks.push(boundary_mean_check(&k, &mean_sources, if planar { 512 } else { 64 }, mean_tol)?);

    if let Domain::Annulus { mu } = domain {
        checks.push(fourier_oracle_check(mu, 20, opts.seed, t.fourier.unwrap_or(1e-8))?);
        checks.push(theta_product_check(t.theta.unwrap_or(1e-12))?);
        checks.push(theta_derivative_check(t.theta_derivative.unwrap_or(1e-8))?);
    }

    // algebraic identities on a random neutral configuration
    let base = two_circle_base(domain, 4)?;
    let cfg = base
        .with_angles(sample_random_angles(4, 1e-3, opts.seed)?)
        .map_err(CliError::config)?;
    let x = cfg.realize()?;
    checks.extend(energy_identity_checks(&k, &x.points, &x.charges, &[-3.0, 1.0, 10.0])?);
    let star = base.realize()?;
    let mut gap_shift: f64 = 0.0;
    let gap = neumann_energy(&k, &x.points, &x.charges)? - neumann_energy(&k, &star.points, &star.charges)?;
    for c in [-3.0, 1.0, 10.0] {
        let s = Shifted { inner: k, shift: c };
        let g = neumann_energy(&s, &x.points, &x.charges)? - neumann_energy(&s, &star.points, &star.charges)?;
        gap_shift = gap_shift.max((g - gap).abs());
    }
    checks.push(CheckReport::new(format!("constant-shift gap {label}"), gap_shift, 1e-12, 3));

    let dirichlet = if opts.dirichlet && domain == Domain::Disk {
        let (pts, q) = dirichlet_system();
        let mut o = DirichletOptions::new(DIRICHLET_RADII.to_vec(), opts.mc_samples, opts.seed);
        if let Some(tol) = t.dirichlet {
            o.final_tolerance = tol;
        }
        let rep = parallel::dirichlet(&k, &pts, &q, o)?;
        checks.push(rep.trend.clone());
        checks.push(rep.last.clone());
        Some(rep)
    } else {
        None
    };

    Ok(SuiteReport {
        domain: label,
        seed: opts.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
        dirichlet,
    })
}
