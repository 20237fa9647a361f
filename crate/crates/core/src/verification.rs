//! Numerical checks of the kernels against their defining properties, and
//! independent oracles.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::energy::{quadratic_form_qn, CompensatedSum};
use crate::error::{Error, Result};
use crate::geometry::{dist, norm, Domain, PointSet};
use crate::kernels::Kernel;
use crate::quadrature::gauss_legendre;
use crate::rng;
use crate::special::{mu_d_unchecked, w_d_unchecked, Nome};

/// Outcome of one numerical check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub probes: usize,
}

impl CheckReport {
    /// `passed` is `max_residual <= tolerance`; NaN fails.
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64, probes: usize) -> Self {
        CheckReport {
            name: name.into(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
            probes,
        }
    }
}

/// Seed of the fixed direction set used on spheres.
const SPHERE_SEED: u64 = 0x5eed_5eed;

fn axis(d: usize, i: usize, h: f64) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[i] = h;
    e
}

fn add(x: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(v).map(|(a, b)| a + t * b).collect()
}

/// `|sum_i (N(x + h e_i) + N(x - h e_i) - 2 N(x))| / h^2 / max(1, |N(x)|)`.
pub fn fd_laplacian_residual<K: Kernel + ?Sized>(kernel: &K, y: &[f64], x: &[f64], h: f64) -> Result<f64> {
    let d = x.len();
    let centre = kernel.value(x, y)?;
    let mut acc = CompensatedSum::new();
    for i in 0..d {
        let e = axis(d, i, 1.0);
        acc.add(kernel.value(&add(x, &e, h), y)?);
        acc.add(kernel.value(&add(x, &e, -h), y)?);
        acc.add(-2.0 * centre);
    }
    Ok((acc.value() / (h * h)).abs() / centre.abs().max(1.0))
}

/// Finite-difference Laplacian of `x -> N(x, y)` at every probe.
///
/// Probes must be at least `2h` inside the domain and at least `0.2` from
/// `y`.
pub fn fd_laplacian_check<K: Kernel + ?Sized>(
    kernel: &K,
    y: &[f64],
    probes: &PointSet,
    h: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    let dom = kernel.domain();
    let mut worst: f64 = 0.0;
    for x in probes.iter() {
        if dom.distance_to_boundary(x) < 2.0 * h {
            return Err(Error::Precondition(format!("probe {x:?} is within 2h of the boundary")));
        }
        if dist(x, y) < 0.2 {
            return Err(Error::Precondition(format!("probe {x:?} is within 0.2 of the source")));
        }
        let r = fd_laplacian_residual(kernel, y, x, h)?;
        worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
    }
    Ok(CheckReport::new(
        format!("fd-laplacian {}", dom.label()),
        worst,
        tolerance,
        probes.len(),
    ))
}

/// A boundary point with its outward unit normal and quadrature weight.
#[derive(Debug, Clone)]
struct BoundaryNode {
    x: Vec<f64>,
    normal: Vec<f64>,
    weight: f64,
    /// 0 outer, 1 inner circle of the annulus
    part: usize,
}

/// Nodes for integrating over the boundary. For the ball, nodes lie on the
/// great half-circle through `y`, weighted by the measure of the latitude
/// sphere they stand for; kernels are invariant under rotations fixing `y`.
fn boundary_nodes(dom: &Domain, y: &[f64], n: usize) -> Result<Vec<BoundaryNode>> {
    match *dom {
        Domain::Disk | Domain::Annulus { .. } => {
            let mut out = Vec::with_capacity(2 * n);
            let radii: &[(f64, f64, usize)] = match *dom {
                Domain::Annulus { mu } => &[(1.0, 1.0, 0), (mu.value(), -1.0, 1)],
                _ => &[(1.0, 1.0, 0)],
            };
            for &(r, sign, part) in radii {
                for j in 0..n {
                    let t = TAU * j as f64 / n as f64;
                    let (s, c) = t.sin_cos();
                    out.push(BoundaryNode {
                        x: vec![r * c, r * s],
                        normal: vec![sign * c, sign * s],
                        weight: TAU * r / n as f64,
                        part,
                    });
                }
            }
            Ok(out)
        }
        Domain::Ball { d } => {
            let d = d as usize;
            let (e1, e2) = frame(y)?;
            let (nodes, weights) = gauss_legendre(n);
            let ring = w_d_unchecked(d as u32 - 1);
            Ok(nodes
                .iter()
                .zip(&weights)
                .map(|(t, w)| {
                    let phi = 0.5 * PI * (t + 1.0);
                    let (s, c) = phi.sin_cos();
                    let x: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| c * a + s * b).collect();
                    BoundaryNode {
                        normal: x.clone(),
                        x,
                        weight: 0.5 * PI * w * ring * s.powi(d as i32 - 2),
                        part: 0,
                    }
                })
                .collect())
        }
    }
}

/// Unit vector along `y` and a unit vector orthogonal to it.
fn frame(y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = norm(y);
    if r == 0.0 {
        return Err(Error::Precondition("source at the centre has no preferred axis".into()));
    }
    let e1: Vec<f64> = y.iter().map(|v| v / r).collect();
    // least aligned coordinate axis, orthogonalized
    let i = (0..y.len())
        .min_by(|&a, &b| e1[a].abs().total_cmp(&e1[b].abs()))
        .unwrap_or(0);
    let mut e2: Vec<f64> = e1.iter().map(|v| -e1[i] * v).collect();
    e2[i] += 1.0;
    let n2 = norm(&e2);
    Ok((e1, e2.iter().map(|v| v / n2).collect()))
}

/// Quasi-uniform sample points on the unit sphere (fixed seed).
fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    let mut rng = rng::seeded(SPHERE_SEED);
    (0..n).map(|_| random_direction(&mut rng, d)).collect()
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let r = norm(&v);
        if r > 1e-12 {
            return v.iter().map(|c| c / r).collect();
        }
    }
}

/// Sample points per quasi-random draw in the Dirichlet estimator.
const BATCH: usize = 4;

fn qmc_dims(d: usize) -> usize {
    if d == 2 {
        5
    } else {
        d + 2
    }
}

/// Steps `phi^-1, ..., phi^-n` of the Kronecker sequence, with `phi` the
/// positive root of `x^(n+1) = x + 1`.
fn kronecker_steps(n: usize) -> Vec<f64> {
    let mut phi: f64 = 2.0;
    for _ in 0..64 {
        let f = phi.powi(n as i32 + 1) - phi - 1.0;
        let df = (n as f64 + 1.0) * phi.powi(n as i32) - 1.0;
        phi -= f / df;
    }
    (1..=n).map(|i| phi.powi(-(i as i32)).fract()).collect()
}

/// Outward normal derivative at a boundary point by the one-sided
/// second-order difference `(3 f(0) - 4 f(h) + f(2h)) / (2h)` along the
/// inward normal.
pub fn normal_derivative<K: Kernel + ?Sized>(
    kernel: &K,
    x: &[f64],
    normal: &[f64],
    y: &[f64],
    h: f64,
) -> Result<f64> {
    let f0 = kernel.boundary_value(x, y)?;
    let f1 = kernel.value(&add(x, normal, -h), y)?;
    let f2 = kernel.value(&add(x, normal, -2.0 * h), y)?;
    Ok((3.0 * f0 - 4.0 * f1 + f2) / (2.0 * h))
}

/// Normal derivatives at `n_samples` boundary points (per circle for the
/// annulus) against `-1 / s_{d-1}(dD)`.
pub fn boundary_flux_check<K: Kernel + ?Sized>(
    kernel: &K,
    y: &[f64],
    n_samples: usize,
    h: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    let dom = kernel.domain();
    let target = -1.0 / dom.boundary_measure();
    let pts: Vec<(Vec<f64>, Vec<f64>)> = match dom {
        Domain::Ball { d } => sphere_points(d as usize, n_samples)
            .into_iter()
            .map(|p| (p.clone(), p))
            .collect(),
        _ => boundary_nodes(&dom, y, n_samples)?
            .into_iter()
            .map(|b| (b.x, b.normal))
            .collect(),
    };
    let mut worst: f64 = 0.0;
    for (x, nrm) in &pts {
        let r = (normal_derivative(kernel, x, nrm, y, h)? - target).abs();
        worst = if r.is_nan() { f64::NAN } else { worst.max(r) };
    }
    Ok(CheckReport::new(
        format!("boundary-flux {}", dom.label()),
        worst,
        tolerance,
        pts.len(),
    ))
}

/// Integral of the outward normal derivative over the whole boundary.
pub fn total_flux<K: Kernel + ?Sized>(kernel: &K, y: &[f64], n_samples: usize, h: f64) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for b in boundary_nodes(&kernel.domain(), y, n_samples)? {
        acc.add(b.weight * normal_derivative(kernel, &b.x, &b.normal, y, h)?);
    }
    Ok(acc.value())
}

/// `|total flux + 1|`.
pub fn total_flux_check<K: Kernel + ?Sized>(
    kernel: &K,
    y: &[f64],
    n_samples: usize,
    h: f64,
    tolerance: f64,
) -> Result<CheckReport> {
    let t = total_flux(kernel, y, n_samples, h)?;
    Ok(CheckReport::new(
        format!("total-flux {}", kernel.domain().label()),
        (t + 1.0).abs(),
        tolerance,
        n_samples,
    ))
}

/// Mean of the outward normal derivative over each boundary circle of the
/// annulus, `[outer, inner]`.
pub fn annulus_circle_fluxes<K: Kernel + ?Sized>(kernel: &K, y: &[f64], n_samples: usize, h: f64) -> Result<[f64; 2]> {
    let dom = kernel.domain();
    if !matches!(dom, Domain::Annulus { .. }) {
        return Err(Error::Precondition("circle fluxes need an annulus".into()));
    }
    let mut sums = [0.0; 2];
    for b in boundary_nodes(&dom, y, n_samples)? {
        sums[b.part] += normal_derivative(kernel, &b.x, &b.normal, y, h)? / n_samples as f64;
    }
    Ok(sums)
}

/// Boundary average `(1 / |dD|) int_{dD} N(x, y) dsigma_x`.
pub fn boundary_mean<K: Kernel + ?Sized>(kernel: &K, y: &[f64], n_samples: usize) -> Result<f64> {
    let dom = kernel.domain();
    let mut acc = CompensatedSum::new();
    for b in boundary_nodes(&dom, y, n_samples)? {
        acc.add(b.weight * kernel.boundary_value(&b.x, y)?);
    }
    Ok(acc.value() / dom.boundary_measure())
}

/// Boundary means for several sources: zero for the disk, equal to each
/// other for the other domains.
pub fn boundary_mean_check<K: Kernel + ?Sized>(
    kernel: &K,
    ys: &PointSet,
    n_samples: usize,
    tolerance: f64,
) -> Result<CheckReport> {
    let dom = kernel.domain();
    let means = ys
        .iter()
        .map(|y| boundary_mean(kernel, y, n_samples))
        .collect::<Result<Vec<f64>>>()?;
    let residual = match dom {
        Domain::Disk => means.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        _ => {
            let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        }
    };
    Ok(CheckReport::new(
        format!("boundary-mean {}", dom.label()),
        residual,
        tolerance,
        ys.len(),
    ))
}

/// Neumann function of the annulus `{mu < |z| < 1}` by separation of
/// variables, up to an additive constant.
///
/// With `r<`, `r>` the smaller and larger radius, `phi` the angle between
/// the points and `s = 2 pi (1 + mu)`:
/// `(mu log r< - log r>) / s - log|1 - (r< / r>) e^(i phi)| / (2 pi)
///  + sum_k cos(k phi) / (2 pi k (1 - mu^2k))
///    ((r< r>)^k + mu^2k ((r< / r>)^k + (r> / r<)^k + (r< r>)^-k))`.
/// The free-space mode sum is kept in closed form, so equal radii pose no
/// problem; `n_modes` terms of the image sum are taken and an error is
/// returned if the truncation bound exceeds `tol`.
pub fn annulus_fourier_oracle(z1: Complex64, z2: Complex64, mu: Nome, n_modes: usize, tol: f64) -> Result<f64> {
    let m = mu.value();
    let (r1, r2) = (z1.norm(), z2.norm());
    for r in [r1, r2] {
        if !(r > m && r < 1.0) {
            return Err(crate::error::domain_err(format!("radius {r} outside ({m}, 1)")));
        }
    }
    if z1 == z2 {
        return Err(Error::Singular);
    }
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    let phi = (z1 * z2.conj()).arg();
    let s = TAU * (1.0 + m);
    let m2 = m * m;
    let qs = [lo * hi, m2 * lo / hi, m2 * hi / lo, m2 / (lo * hi)];
    let qmax = qs.iter().copied().fold(0.0, f64::max);
    let tail = 4.0 * qmax.powi(n_modes as i32 + 1) / (TAU * (n_modes as f64 + 1.0) * (1.0 - m2) * (1.0 - qmax));
    if !(qmax < 1.0) || !(tail <= tol) {
        return Err(Error::Convergence { terms: n_modes, tail });
    }
    let free = (Complex64::new(1.0, 0.0) - Complex64::from_polar(lo / hi, phi)).norm().ln();
    let mut acc = CompensatedSum::new();
    acc.add((m * lo.ln() - hi.ln()) / s);
    acc.add(-free / TAU);
    let mut p = [1.0; 4];
    let mut m2k = 1.0;
    for k in 1..=n_modes {
        for (pi, q) in p.iter_mut().zip(&qs) {
            *pi *= q;
        }
        m2k *= m2;
        let kf = k as f64;
        acc.add((kf * phi).cos() / (TAU * kf * (1.0 - m2k)) * (p[0] + p[1] + p[2] + p[3]));
    }
    Ok(acc.value())
}

/// `theta_1(z; q) = 2 q^(1/4) sin z prod_n (1 - q^2n)(1 - 2 q^2n cos 2z + q^4n)`
/// with `n_factors` factors.
pub fn theta1_triple_product(z: Complex64, q: Nome, n_factors: usize) -> Complex64 {
    let qv = q.value();
    let c2 = (z * 2.0).cos();
    let mut acc = z.sin() * (2.0 * qv.powf(0.25));
    let mut q2n = 1.0;
    for _ in 0..n_factors {
        q2n *= qv * qv;
        acc *= (1.0 - q2n) * (Complex64::new(1.0 + q2n * q2n, 0.0) - c2 * (2.0 * q2n));
    }
    acc
}

/// Monte Carlo settings for [`DirichletPlan`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DirichletOptions {
    /// Strictly decreasing excision radii.
    pub radii: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Central-difference step for the gradient.
    pub grad_step: f64,
    /// Samples per independent random stream.
    pub chunk_size: usize,
    /// Bound on `|residual(r_last)| / |Qn|`.
    pub final_tolerance: f64,
}

impl DirichletOptions {
    pub fn new(radii: Vec<f64>, samples: usize, seed: u64) -> Self {
        DirichletOptions {
            radii,
            samples,
            seed,
            grad_step: 1e-5,
            chunk_size: 1 << 14,
            final_tolerance: 0.02,
        }
    }
}

/// Per-radius sums of one chunk.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkSums {
    pub samples: usize,
    pub sums: Vec<f64>,
}

/// Prepared Dirichlet-integral estimate.
///
/// `I(u, D_r) = int_{D_r} |grad u|^2`, `D_r` the domain minus balls of
/// radius `r` about the charges, is estimated with a two-component mixture:
/// uniform points in `D` and points around a random charge with log-uniform
/// distance in `[r_min, R0]`, weighted by the balance heuristic. The same
/// samples serve every radius. Chunks use independent streams of the seed,
/// so the estimate does not depend on how chunks are scheduled.
#[derive(Debug, Clone)]
pub struct DirichletPlan {
    opts: DirichletOptions,
    domain: Domain,
    points: PointSet,
    charges: Vec<f64>,
    outer: f64,
    inner: f64,
    qn: f64,
    self_sq: f64,
    alpha: Vec<f64>,
    shift: Vec<f64>,
}

/// Result of [`DirichletPlan::finish`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DirichletReport {
    pub radii: Vec<f64>,
    pub integrals: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `I(u, D_r) - (sum delta^2) mu_d(r) / w_d - Qn`.
    pub residuals: Vec<f64>,
    pub qn: f64,
    /// Largest `|residual(r_{i+1})| / |residual(r_i)|`, must stay below 1.
    pub trend: CheckReport,
    /// `|residual(r_last)| / |Qn|`.
    pub last: CheckReport,
    /// Set when three standard errors exceed a residual.
    pub noise_dominated: bool,
}

impl DirichletReport {
    pub fn passed(&self) -> bool {
        self.trend.passed && self.last.passed
    }
}

impl DirichletPlan {
    pub fn new<K: Kernel + ?Sized>(kernel: &K, points: &PointSet, charges: &[f64], opts: DirichletOptions) -> Result<Self> {
        let domain = kernel.domain();
        let qn = quadratic_form_qn(kernel, points, charges)?;
        let total: f64 = charges.iter().sum();
        let scale: f64 = charges.iter().map(|q| q.abs()).sum();
        if total.abs() > crate::energy::NEUTRALITY_TOL * scale {
            return Err(Error::Precondition(format!("charges must sum to zero, got {total}")));
        }
        if opts.radii.is_empty() || opts.radii.windows(2).any(|w| !(w[1] < w[0])) || !(opts.radii[opts.radii.len() - 1] > 0.0) {
            return Err(Error::Precondition("radii must be positive and strictly decreasing".into()));
        }
        if opts.samples == 0 || opts.chunk_size == 0 || opts.chunk_size % BATCH != 0 {
            return Err(Error::Precondition(format!(
                "need a positive sample count and a chunk size divisible by {BATCH}"
            )));
        }
        let n = points.len();
        let mut half_gap = f64::INFINITY;
        for k in 0..n {
            for l in k + 1..n {
                half_gap = half_gap.min(0.5 * dist(points.get(k), points.get(l)));
            }
        }
        let to_boundary = points
            .iter()
            .map(|p| domain.distance_to_boundary(p))
            .fold(f64::INFINITY, f64::min);
        let limit = half_gap.min(to_boundary);
        if !(opts.radii[0] < limit) {
            return Err(Error::Precondition(format!(
                "largest radius {} must be below {limit} (half the closest pair distance and the distance to the boundary)",
                opts.radii[0]
            )));
        }
        let self_sq = charges.iter().map(|q| q * q).sum();
        let dims = qmc_dims(domain.dim());
        let alpha = kronecker_steps(dims);
        let mut shift_rng = rng::stream(opts.seed, u64::MAX);
        let shift = (0..dims).map(|_| shift_rng.random::<f64>()).collect();
        Ok(DirichletPlan {
            inner: opts.radii[opts.radii.len() - 1],
            outer: 0.99 * limit,
            opts,
            domain,
            points: points.clone(),
            charges: charges.to_vec(),
            qn,
            self_sq,
            alpha,
            shift,
        })
    }

    pub fn n_chunks(&self) -> usize {
        self.opts.samples.div_ceil(self.opts.chunk_size)
    }

    fn grad_sq<K: Kernel + ?Sized>(&self, kernel: &K, x: &[f64]) -> Result<f64> {
        // shorter stencil for points closer to the boundary than the step
        let h = self.opts.grad_step.min(0.5 * self.domain.distance_to_boundary(x));
        let d = x.len();
        let mut g2 = 0.0;
        let mut xp = x.to_vec();
        for i in 0..d {
            xp[i] = x[i] + h;
            let up = self.u(kernel, &xp)?;
            xp[i] = x[i] - h;
            let dn = self.u(kernel, &xp)?;
            xp[i] = x[i];
            let g = (up - dn) / (2.0 * h);
            g2 += g * g;
        }
        Ok(g2)
    }

    fn u<K: Kernel + ?Sized>(&self, kernel: &K, x: &[f64]) -> Result<f64> {
        let mut acc = CompensatedSum::new();
        for (p, q) in self.points.iter().zip(&self.charges) {
            acc.add(q * kernel.value(x, p)?);
        }
        Ok(acc.value())
    }

    /// Mixture density at `x`.
    fn density(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let uniform = self.uniform_density();
        let log_span = (self.outer / self.inner).ln();
        let n = self.points.len() as f64;
        let mut centred = 0.0;
        for p in self.points.iter() {
            let r = dist(x, p);
            if r >= self.inner && r <= self.outer {
                centred += 1.0 / (w_d_unchecked(d as u32) * r.powi(d as i32) * log_span * n);
            }
        }
        0.5 * uniform + 0.5 * centred
    }

    /// Density of the uniform component: the planar domains are sampled
    /// exactly through polar coordinates, the ball through its bounding cube.
    fn uniform_density(&self) -> f64 {
        match self.domain {
            Domain::Ball { d } => 0.5f64.powi(d as i32),
            _ => 1.0 / self.domain.volume(),
        }
    }

    /// Point `j` of the shifted Kronecker sequence.
    fn qmc_point(&self, j: u64) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.shift)
            .map(|(a, s)| {
                let v = s + (j as f64 * a).fract();
                v - v.floor()
            })
            .collect()
    }

    /// Uniform point from the first coordinates of `t`; may fall outside a
    /// ball (it then contributes zero).
    fn uniform_point(&self, t: &[f64]) -> Vec<f64> {
        let (lo2, d) = match self.domain {
            Domain::Disk => (0.0, 2),
            Domain::Annulus { mu } => (mu.value() * mu.value(), 2),
            Domain::Ball { d } => {
                return t[..d as usize].iter().map(|u| 2.0 * u - 1.0).collect();
            }
        };
        debug_assert_eq!(d, 2);
        let r = (lo2 + (1.0 - lo2) * t[0]).sqrt();
        let (s, c) = (TAU * t[1]).sin_cos();
        vec![r * c, r * s]
    }

    /// Sums over the points of chunk `index` of
    /// `(|grad u|^2 1[outside r] - g_r) / density`, where `g_r` is the
    /// self-field `sum_k delta_k^2 |grad mu_d(|x - x_k|) / w_d|^2` restricted
    /// to the shells `r <= |x - x_k| <= R0`. Its integral is known exactly and
    /// is added back in [`DirichletPlan::finish`].
    pub fn chunk<K: Kernel + ?Sized>(&self, kernel: &K, index: usize) -> Result<ChunkSums> {
        let start = index * self.opts.chunk_size;
        let count = self.opts.chunk_size.min(self.opts.samples.saturating_sub(start));
        let mut rng = rng::stream(self.opts.seed, index as u64);
        let mut sums: Vec<CompensatedSum> = vec![CompensatedSum::new(); self.opts.radii.len()];
        let d = self.domain.dim();
        let wd = w_d_unchecked(d as u32);
        let log_span = (self.outer / self.inner).ln();
        let n_points = self.points.len();
        let du = if d == 2 { 2 } else { d };
        let mut batch: Vec<Vec<f64>> = Vec::with_capacity(BATCH);
        let mut rho = vec![0.0; n_points];
        let mut done = 0;
        while done < count {
            // two reflected uniform points and an antithetic pair around a charge
            let t = self.qmc_point(((start + done) / BATCH) as u64);
            batch.clear();
            let x = self.uniform_point(&t);
            batch.push(x.iter().map(|c| -c).collect());
            batch.push(x);
            let k = ((t[du] * n_points as f64) as usize).min(n_points - 1);
            let r = self.inner * (t[du + 1] * log_span).exp();
            let w = if d == 2 {
                let (s, c) = (TAU * t[du + 2]).sin_cos();
                vec![c, s]
            } else {
                random_direction(&mut rng, d)
            };
            let c = self.points.get(k);
            batch.push(add(c, &w, r));
            batch.push(add(c, &w, -r));
            for x in batch.iter().take(count - done) {
                for (rk, p) in rho.iter_mut().zip(self.points.iter()) {
                    *rk = dist(x, p);
                }
                let nearest = rho.iter().copied().fold(f64::INFINITY, f64::min);
                if nearest < self.inner || !self.domain.contains(x) {
                    continue;
                }
                let q = self.density(x);
                let f = self.grad_sq(kernel, x)?;
                for (acc, &rad) in sums.iter_mut().zip(&self.opts.radii) {
                    let mut v = if nearest >= rad { f } else { 0.0 };
                    for (rk, dk) in rho.iter().zip(&self.charges) {
                        if *rk >= rad && *rk <= self.outer {
                            v -= dk * dk / (wd * wd * rk.powi(2 * d as i32 - 2));
                        }
                    }
                    acc.add(v / q);
                }
            }
            done += batch.len().min(count - done);
        }
        Ok(ChunkSums {
            samples: count,
            sums: sums.iter().map(CompensatedSum::value).collect(),
        })
    }

    /// Combines chunk sums (in chunk order) into the report.
    pub fn finish(&self, chunks: &[ChunkSums]) -> Result<DirichletReport> {
        if chunks.len() != self.n_chunks() {
            return Err(Error::Precondition(format!(
                "expected {} chunks, got {}",
                self.n_chunks(),
                chunks.len()
            )));
        }
        let nr = self.opts.radii.len();
        let total: usize = chunks.iter().map(|c| c.samples).sum();
        let d = self.domain.dim() as u32;
        let wd = w_d_unchecked(d);
        let mut integrals = Vec::with_capacity(nr);
        let mut std_errors = Vec::with_capacity(nr);
        let mut residuals = Vec::with_capacity(nr);
        for i in 0..nr {
            let mut acc = CompensatedSum::new();
            for c in chunks {
                acc.add(c.sums[i]);
            }
            let mean = acc.value() / total as f64;
            // spread of per-sample chunk means around the pooled mean
            let mut var = 0.0;
            let mut weight = 0.0;
            for c in chunks {
                let m = c.sums[i] / c.samples as f64;
                var += c.samples as f64 * (m - mean) * (m - mean);
                weight += c.samples as f64;
            }
            let se = if chunks.len() > 1 {
                (var / weight / (chunks.len() - 1) as f64).sqrt()
            } else {
                f64::NAN
            };
            let r = self.opts.radii[i];
            let shells = self.self_sq * (mu_d_unchecked(r, d) - mu_d_unchecked(self.outer, d)) / wd;
            integrals.push(mean + shells);
            std_errors.push(se);
            residuals.push(mean - self.self_sq * mu_d_unchecked(self.outer, d) / wd - self.qn);
        }
        let mut ratio: f64 = 0.0;
        for w in residuals.windows(2) {
            let q = w[1].abs() / w[0].abs();
            ratio = if q.is_nan() { f64::NAN } else { ratio.max(q) };
        }
        let last = residuals[nr - 1].abs() / self.qn.abs();
        let noise_dominated = residuals.iter().zip(&std_errors).any(|(r, s)| 3.0 * s > r.abs());
        let label = self.domain.label();
        Ok(DirichletReport {
            radii: self.opts.radii.clone(),
            integrals,
            std_errors,
            residuals,
            qn: self.qn,
            trend: CheckReport::new(format!("dirichlet-trend {label}"), ratio, 1.0, total),
            last: CheckReport::new(
                format!("dirichlet-final {label}"),
                last,
                self.opts.final_tolerance,
                total,
            ),
            noise_dominated,
        })
    }
}

/// Sequential driver for [`DirichletPlan`].
pub fn dirichlet_asymptotics_check<K: Kernel + ?Sized>(
    kernel: &K,
    points: &PointSet,
    charges: &[f64],
    opts: DirichletOptions,
) -> Result<DirichletReport> {
    let plan = DirichletPlan::new(kernel, points, charges, opts)?;
    let chunks = (0..plan.n_chunks())
        .map(|i| plan.chunk(kernel, i))
        .collect::<Result<Vec<_>>>()?;
    plan.finish(&chunks)
}

/// `n` seeded points of `domain` at least `min_source_dist` from `y` and
/// `min_boundary_dist` from the boundary, with uniform directions and
/// uniform radii.
pub fn interior_probes(
    domain: Domain,
    y: &[f64],
    n: usize,
    min_source_dist: f64,
    min_boundary_dist: f64,
    seed: u64,
) -> Result<PointSet> {
    let d = domain.dim();
    let inner = match domain {
        Domain::Annulus { mu } => mu.value(),
        _ => 0.0,
    };
    let (lo, hi) = (inner + min_boundary_dist, 1.0 - min_boundary_dist);
    if !(lo < hi) {
        return Err(Error::Precondition(format!("no room for probes {min_boundary_dist} inside the boundary")));
    }
    let mut rng = rng::seeded(seed);
    let mut out = PointSet::new(d);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1000) {
            return Err(Error::Precondition(format!(
                "could not place {n} probes {min_source_dist} away from the source"
            )));
        }
        let dir = random_direction(&mut rng, d);
        let r = rng.random_range(lo..hi);
        let x: Vec<f64> = dir.iter().map(|v| r * v).collect();
        if dist(&x, y) >= min_source_dist {
            out.push(&x)?;
        }
    }
    Ok(out)
}

/// The annulus kernel minus the Fourier oracle at `n_pairs` seeded pairs;
/// the residual is the spread of these differences (the oracle is only
/// fixed up to a constant).
pub fn fourier_oracle_check(mu: Nome, n_pairs: usize, seed: u64, tolerance: f64) -> Result<CheckReport> {
    let m = mu.value();
    let mut rng = rng::seeded(seed);
    let mut pick = || {
        let r = rng.random_range(m + 0.05..0.95);
        Complex64::from_polar(r, rng.random_range(0.0..TAU))
    };
    let mut diffs = Vec::with_capacity(n_pairs + 1);
    for _ in 0..=n_pairs {
        let (z1, z2) = (pick(), pick());
        let k = crate::kernels::neumann_annulus(z1, z2, mu)?;
        diffs.push(k - annulus_fourier_oracle(z1, z2, mu, 4096, 1e-13)?);
    }
    let spread = diffs.iter().map(|v| (v - diffs[0]).abs()).fold(0.0, f64::max);
    Ok(CheckReport::new(format!("fourier-oracle annulus{m}"), spread, tolerance, n_pairs))
}

/// `theta_1` series against the triple product over
/// `z in [0, pi] x [-log(1/q)/2, log(1/q)/2] i`, `q in {0.1, 0.3, 0.5, 0.7, 0.9}`.
pub fn theta_product_check(tolerance: f64) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut probes = 0;
    for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let nome = Nome::new(q)?;
        let h = 0.5 * (1.0 / q).ln();
        for i in 0..=16 {
            for j in 0..=8 {
                let z = Complex64::new(PI * i as f64 / 16.0, -h + 2.0 * h * j as f64 / 8.0);
                let s = crate::special::theta1(z, nome, crate::special::THETA_TOL)?;
                worst = worst.max((s - theta1_triple_product(z, nome, 400)).norm());
                probes += 1;
            }
        }
    }
    Ok(CheckReport::new("theta1 series-vs-product", worst, tolerance, probes))
}

/// `theta_1'(0)` against a central difference of the series with step 1e-5.
pub fn theta_derivative_check(tolerance: f64) -> Result<CheckReport> {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let nome = Nome::new(q)?;
        let up = crate::special::theta1(Complex64::new(h, 0.0), nome, 1e-15)?;
        let dn = crate::special::theta1(Complex64::new(-h, 0.0), nome, 1e-15)?;
        let fd = (up - dn).re / (2.0 * h);
        worst = worst.max((fd - crate::special::theta1_prime_at_zero(nome, 1e-15)?).abs());
    }
    Ok(CheckReport::new("theta1 derivative-at-zero", worst, tolerance, 5))
}

/// Algebraic identities of one neutral point set: `Qn - En` against the
/// summed diagonal (1e-14), `sum delta_k a_k = Qn` (1e-13), kernel
/// exchange symmetry over the pairs (1e-10), and under a kernel constant
/// `c` the invariance of `Qn` and the shift `En -> En - c sum delta^2`
/// (1e-12). Residuals are relative to `max(1, |Qn|)` resp. `max(1, |N|)`.
pub fn energy_identity_checks<K: Kernel + Clone>(
    kernel: &K,
    points: &PointSet,
    charges: &[f64],
    shifts: &[f64],
) -> Result<Vec<CheckReport>> {
    use crate::energy::{expansion_coefficients, neumann_energy, self_energy};
    let label = kernel.domain().label();
    let en = neumann_energy(kernel, points, charges)?;
    let se = self_energy(kernel, points, charges)?;
    let qn = quadratic_form_qn(kernel, points, charges)?;
    let scale = qn.abs().max(1.0);
    let a = expansion_coefficients(kernel, points, charges)?;
    let mut sum = CompensatedSum::new();
    for (a, q) in a.iter().zip(charges) {
        sum.add(a * q);
    }
    let mut sym: f64 = 0.0;
    for (i, x) in points.iter().enumerate() {
        for y in points.iter().skip(i + 1) {
            let v = kernel.value(x, y)?;
            sym = sym.max((v - kernel.value(y, x)?).abs() / v.abs().max(1.0));
        }
    }
    let sq: f64 = charges.iter().map(|q| q * q).sum();
    let mut shift_en: f64 = 0.0;
    let mut shift_qn: f64 = 0.0;
    for &c in shifts {
        let k = crate::kernels::Shifted { inner: kernel.clone(), shift: c };
        let en_c = neumann_energy(&k, points, charges)?;
        shift_en = shift_en.max((en_c - en + c * sq).abs() / en.abs().max(1.0));
        shift_qn = shift_qn.max((quadratic_form_qn(&k, points, charges)? - qn).abs() / scale);
    }
    let n = points.len();
    Ok(vec![
        CheckReport::new(format!("qn-minus-en {label}"), (qn - en - se).abs() / scale, 1e-14, n),
        CheckReport::new(format!("charge-weighted-coefficients {label}"), (sum.value() - qn).abs() / scale, 1e-13, n),
        CheckReport::new(format!("exchange-symmetry {label}"), sym, 1e-10, n * (n - 1) / 2),
        CheckReport::new(format!("constant-shift qn {label}"), shift_qn, 1e-12, shifts.len()),
        CheckReport::new(format!("constant-shift en {label}"), shift_en, 1e-12, shifts.len()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::NeumannKernel;
    use approx::assert_abs_diff_eq;

    fn disk() -> NeumannKernel {
        NeumannKernel::new(Domain::Disk).unwrap()
    }

    #[test]
    fn disk_laplacian_on_a_circle_of_probes() {
        let probes = PointSet::from_points(
            2,
            (0..64).map(|j| {
                let t = TAU * j as f64 / 64.0;
                [0.7 * t.cos(), 0.7 * t.sin()]
            }),
        )
        .unwrap();
        let y = [0.3, 0.0];
        let probes = PointSet::from_points(2, probes.iter().filter(|p| dist(p, &y) >= 0.2)).unwrap();
        let rep = fd_laplacian_check(&disk(), &y, &probes, 1e-3, 1e-4).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(fd_laplacian_check(&disk(), &y, &PointSet::from_points(2, [[0.35, 0.0]]).unwrap(), 1e-3, 1e-4).is_err());
    }

    #[test]
    fn disk_flux_and_mean() {
        let rep = boundary_flux_check(&disk(), &[0.4, 0.0], 256, 1e-4, 1e-3).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_abs_diff_eq!(total_flux(&disk(), &[0.4, 0.0], 256, 1e-4).unwrap(), -1.0, epsilon = 1e-3);
        let ys = PointSet::from_points(2, [[0.2, 0.0], [0.0, 0.5], [-0.6, 0.0]]).unwrap();
        let rep = boundary_mean_check(&disk(), &ys, 512, 1e-10).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn fourier_oracle_is_symmetric_and_converged() {
        let mu = Nome::new(0.3).unwrap();
        let z1 = Complex64::from_polar(0.45, 0.3);
        let z2 = Complex64::from_polar(0.75, -2.0);
        let a = annulus_fourier_oracle(z1, z2, mu, 128, 1e-12).unwrap();
        let b = annulus_fourier_oracle(z2, z1, mu, 128, 1e-12).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        let c = annulus_fourier_oracle(z1, z2, mu, 256, 1e-12).unwrap();
        assert!((a - c).abs() <= 1e-10);
        assert!(matches!(
            annulus_fourier_oracle(z1, z2, mu, 2, 1e-12),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn triple_product_agrees_with_the_series() {
        let q = Nome::new(0.3).unwrap();
        for z in [Complex64::new(0.3, 0.1), Complex64::new(-1.2, 0.5), Complex64::new(2.0, -0.4)] {
            let s = crate::special::theta1(z, q, 1e-15).unwrap();
            let p = theta1_triple_product(z, q, 60);
            assert!((s - p).norm() <= 1e-13, "{z}: {s} vs {p}");
        }
    }

    #[test]
    fn dirichlet_estimate_is_reproducible_and_monotone() {
        let pts = PointSet::from_points(2, [[0.5, 0.0], [-0.5, 0.0]]).unwrap();
        let opts = DirichletOptions {
            chunk_size: 2000,
            ..DirichletOptions::new(vec![0.1, 0.05, 0.025], 8000, 3)
        };
        let a = dirichlet_asymptotics_check(&disk(), &pts, &[1.0, -1.0], opts.clone()).unwrap();
        let b = dirichlet_asymptotics_check(&disk(), &pts, &[1.0, -1.0], opts).unwrap();
        assert_eq!(a, b);
        assert!(a.integrals.windows(2).all(|w| w[1] >= w[0]));
        let bad = DirichletOptions::new(vec![0.6], 10, 1);
        assert!(dirichlet_asymptotics_check(&disk(), &pts, &[1.0, -1.0], bad).is_err());
    }

    /// Ball kernel with the first double-sum coefficient scaled by 1.01.
    #[derive(Debug)]
    struct Corrupted(u32);

    impl Kernel for Corrupted {
        fn domain(&self) -> Domain {
            Domain::Ball { d: self.0 }
        }
        fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
            let form = crate::kernels::BallForm {
                first_coefficient_scale: 1.01,
                closed_only: true,
                ..crate::kernels::BallForm::FROZEN
            };
            crate::kernels::ball_value_with(x, y, self.0, form)
        }
        fn diag(&self, _: &[f64]) -> Result<f64> {
            unreachable!()
        }
        fn boundary_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
            self.value(x, y)
        }
    }

    fn ball_probes(d: usize, y: &[f64], n: usize, seed: u64) -> PointSet {
        let mut rng = rng::seeded(seed);
        let mut out = PointSet::new(d);
        while out.len() < n {
            let dir = random_direction(&mut rng, d);
            let r = rng.random_range(0.1..0.8);
            let x: Vec<f64> = dir.iter().map(|v| r * v).collect();
            if dist(&x, y) >= 0.3 {
                out.push(&x).unwrap();
            }
        }
        out
    }

    #[test]
    fn ball_laplacian_and_sensitivity() {
        for d in 3..=8usize {
            let mut y = vec![0.0; d];
            y[0] = 0.3;
            y[1] = 0.2;
            let k = NeumannKernel::new(Domain::ball(d as u32).unwrap()).unwrap();
            let probes = ball_probes(d, &y, 50, d as u64);
            let rep = fd_laplacian_check(&k, &y, &probes, 1e-4, 1e-3).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        let y = [0.3, 0.2, 0.0, 0.0, 0.0];
        let probes = ball_probes(5, &y, 50, 1);
        let k = NeumannKernel::new(Domain::ball(5).unwrap()).unwrap();
        assert!(fd_laplacian_check(&k, &y, &probes, 1e-3, 1e-3).unwrap().passed);
        // a 1% change in one coefficient leaves a Laplacian of a few 1e-4;
        // at h = 1e-4 the truncation error of the intact kernel is far below it
        let intact = fd_laplacian_check(&k, &y, &probes, 1e-4, 1e-3).unwrap();
        let corrupted = fd_laplacian_check(&Corrupted(5), &y, &probes, 1e-4, 1e-3).unwrap();
        assert!(corrupted.max_residual >= 1e-4, "{corrupted:?}");
        assert!(corrupted.max_residual >= 10.0 * intact.max_residual);
    }

    #[test]
    fn laplacian_truncation_is_second_order() {
        let k = NeumannKernel::new(Domain::ball(4).unwrap()).unwrap();
        let y = [0.3, 0.2, 0.0, 0.0];
        let x = [-0.1, -0.2, 0.1, 0.0];
        let coarse = fd_laplacian_residual(&k, &y, &x, 2e-3).unwrap();
        let fine = fd_laplacian_residual(&k, &y, &x, 1e-3).unwrap();
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn ball_flux_and_mean() {
        for d in 3..=8u32 {
            let k = NeumannKernel::new(Domain::ball(d).unwrap()).unwrap();
            let mut y = vec![0.0; d as usize];
            y[0] = 0.2;
            let rep = boundary_flux_check(&k, &y, 200, 1e-4, 1e-3).unwrap();
            assert!(rep.passed, "{rep:?}");
            let t = total_flux(&k, &y, 64, 1e-4).unwrap();
            assert_abs_diff_eq!(t, -1.0, epsilon = 1e-3);
            let mut y2 = vec![0.0; d as usize];
            y2[1] = 0.4;
            let ys = PointSet::from_points(d as usize, [y.clone(), y2]).unwrap();
            let rep = boundary_mean_check(&k, &ys, 64, 1e-6).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn annulus_flux_and_mean() {
        for mu in [0.2, 0.3, 0.5] {
            let k = NeumannKernel::new(Domain::annulus(mu).unwrap()).unwrap();
            let y = [0.4, 0.5];
            let rep = boundary_flux_check(&k, &y, 128, 1e-4, 1e-3).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert_abs_diff_eq!(total_flux(&k, &y, 256, 1e-4).unwrap(), -1.0, epsilon = 1e-3);
            let ys = PointSet::from_points(2, [[0.4, 0.5], [-0.7, 0.1], [0.0, -0.6]]).unwrap();
            let rep = boundary_mean_check(&k, &ys, 512, 1e-6).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        // the theta form sends all flux through the inner circle
        let mu = Nome::new(0.3).unwrap();
        let t = crate::kernels::AnnulusThetaKernel::new(mu);
        let [outer, inner] = annulus_circle_fluxes(&t, &[0.4, 0.5], 256, 1e-4).unwrap();
        assert_abs_diff_eq!(outer, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(inner, -1.0 / (TAU * 0.3), epsilon = 1e-5);
    }

    #[test]
    fn annulus_kernel_matches_the_fourier_oracle() {
        let mut rng = rng::seeded(21);
        for mu in [0.2, 0.3, 0.5] {
            let q = Nome::new(mu).unwrap();
            let mut pick = || {
                let r = rng.random_range(mu + 0.05..0.95);
                Complex64::from_polar(r, rng.random_range(0.0..TAU))
            };
            let (a1, a2) = (pick(), pick());
            let base = crate::kernels::neumann_annulus(a1, a2, q).unwrap()
                - annulus_fourier_oracle(a1, a2, q, 4096, 1e-13).unwrap();
            for _ in 0..20 {
                let (z1, z2) = (pick(), pick());
                let diff = crate::kernels::neumann_annulus(z1, z2, q).unwrap()
                    - annulus_fourier_oracle(z1, z2, q, 4096, 1e-13).unwrap();
                assert!((diff - base).abs() <= 1e-8, "mu={mu} {z1} {z2}: {}", diff - base);
            }
        }
    }

    #[test]
    fn suite_building_blocks() {
        for mu in [0.2, 0.3, 0.5] {
            let rep = fourier_oracle_check(Nome::new(mu).unwrap(), 20, 4, 1e-8).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        assert!(theta_product_check(1e-12).unwrap().passed);
        assert!(theta_derivative_check(1e-8).unwrap().passed);
        let dom = Domain::annulus(0.4).unwrap();
        let y = [0.0, 0.7];
        let probes = interior_probes(dom, &y, 60, 0.3, 0.05, 1).unwrap();
        assert_eq!(probes.len(), 60);
        for p in probes.iter() {
            assert!(dom.distance_to_boundary(p) >= 0.05 && dist(p, &y) >= 0.3);
        }
        let pts = PointSet::from_points(2, [[0.5, 0.0], [-0.5, 0.0], [0.0, 0.3]]).unwrap();
        for rep in energy_identity_checks(&disk(), &pts, &[1.0, -2.0, 1.0], &[-3.0, 1.0, 10.0]).unwrap() {
            assert!(rep.passed, "{rep:?}");
        }
    }
}
