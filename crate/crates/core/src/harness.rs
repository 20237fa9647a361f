//! Randomized trials and simplex search comparing the energy of a
//! configuration with that of its symmetrization.
//!
//! For the two-circle neutral scheme the symmetric configuration should
//! minimize the energy over all angle sets, for the alternating scheme it
//! should maximize it. Trials draw random angle sets and record the gap
//! `En(X) - En(X*)`; the search runs Nelder-Mead over the angles looking for
//! a configuration that beats `X*`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::f64::consts::TAU;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};

use crate::energy::neumann_energy;
use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, sample_random_angles_with, Configuration, Scheme, DEFAULT_MIN_GAP};
use crate::kernels::Kernel;
use crate::optim::{nelder_mead, Minimum, NelderMeadOptions};
use crate::rng;

/// Default slack on the sign of a trial gap.
pub const TOL_GAP: f64 = 1e-9;

/// Default slack on the search contract.
pub const SEARCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialOptions {
    /// Smallest circular gap between sampled angles.
    pub min_gap: f64,
    pub tol_gap: f64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            min_gap: DEFAULT_MIN_GAP,
            tol_gap: TOL_GAP,
        }
    }
}

/// One trial: random angles `X`, their symmetrization `X*` and the gap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialRecord {
    pub index: usize,
    /// Seed of the generator that drew the angles; rerunning
    /// [`TrialRunner::trial_with_seed`] with it reproduces the trial.
    pub seed: u64,
    pub angles: Vec<f64>,
    pub en_x: f64,
    pub en_xstar: f64,
    /// `en_x - en_xstar`.
    pub gap: f64,
    pub scheme: Scheme,
    pub passed: bool,
}

/// Whether `gap` has the sign the scheme predicts, up to `tol`.
pub fn gap_passes(scheme: Scheme, gap: f64, tol: f64) -> bool {
    match scheme {
        Scheme::Theorem1 => gap >= -tol,
        Scheme::Theorem2 => gap <= tol,
    }
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: usize) -> u64 {
    rng::stream(master, index as u64).next_u64()
}

/// `En` of the realized configuration.
pub fn configuration_energy<K: Kernel + ?Sized>(kernel: &K, config: &Configuration) -> Result<f64> {
    check_kernel(kernel, config)?;
    let r = config.realize()?;
    neumann_energy(kernel, &r.points, &r.charges)
}

fn check_kernel<K: Kernel + ?Sized>(kernel: &K, config: &Configuration) -> Result<()> {
    if kernel.domain() != config.domain {
        return Err(Error::Config(format!(
            "kernel is for {} but the configuration lives in {}",
            kernel.domain().label(),
            config.domain.label()
        )));
    }
    Ok(())
}

/// Runs trials against one base configuration; the symmetric energy is
/// computed once.
#[derive(Debug, Clone)]
pub struct TrialRunner<'a, K: ?Sized> {
    kernel: &'a K,
    base: Configuration,
    en_xstar: f64,
    opts: TrialOptions,
}

impl<'a, K: Kernel + ?Sized> TrialRunner<'a, K> {
    pub fn new(kernel: &'a K, base: &Configuration, opts: TrialOptions) -> Result<Self> {
        base.validate()?;
        check_kernel(kernel, base)?;
        if base.m() < 2 {
            return Err(Error::Precondition("trials need at least two half-planes".into()));
        }
        if !(opts.tol_gap >= 0.0) {
            return Err(Error::Precondition(format!("tol_gap must be non-negative, got {}", opts.tol_gap)));
        }
        let en_xstar = configuration_energy(kernel, &base.symmetrize()?)?;
        Ok(TrialRunner {
            kernel,
            base: base.clone(),
            en_xstar,
            opts,
        })
    }

    pub fn symmetric_energy(&self) -> f64 {
        self.en_xstar
    }

    pub fn base(&self) -> &Configuration {
        &self.base
    }

    /// Trial `index` of the run seeded with `master`.
    pub fn trial(&self, index: usize, master: u64) -> Result<TrialRecord> {
        self.trial_with_seed(index, trial_seed(master, index))
    }

    pub fn trial_with_seed(&self, index: usize, seed: u64) -> Result<TrialRecord> {
        let wrap = |e: Error| Error::Trial {
            index,
            seed,
            source: Box::new(e),
        };
        let mut rng = rng::seeded(seed);
        let angles = sample_random_angles_with(self.base.m(), self.opts.min_gap, &mut rng).map_err(wrap)?;
        self.record(index, seed, angles).map_err(wrap)
    }

    /// Equally spaced angles rotated by a random offset; the gap should
    /// vanish.
    pub fn equality_trial(&self, index: usize, master: u64) -> Result<TrialRecord> {
        let seed = trial_seed(master, index);
        let offset = rng::seeded(seed).random::<f64>() * TAU;
        let m = self.base.m();
        let mut angles: Vec<f64> = (0..m)
            .map(|j| normalize_angle(offset + TAU * j as f64 / m as f64))
            .collect();
        angles.sort_by(f64::total_cmp);
        self.record(index, seed, angles).map_err(|e| Error::Trial {
            index,
            seed,
            source: Box::new(e),
        })
    }

    fn record(&self, index: usize, seed: u64, angles: Vec<f64>) -> Result<TrialRecord> {
        let en_x = configuration_energy(self.kernel, &self.base.with_angles(angles.clone())?)?;
        let gap = en_x - self.en_xstar;
        Ok(TrialRecord {
            index,
            seed,
            angles,
            en_x,
            en_xstar: self.en_xstar,
            gap,
            scheme: self.base.scheme,
            passed: gap_passes(self.base.scheme, gap, self.opts.tol_gap),
        })
    }
}

/// `n_trials` seeded trials, in index order. The first failing evaluation
/// aborts the run.
pub fn run_trials<K: Kernel + ?Sized>(
    kernel: &K,
    base: &Configuration,
    n_trials: usize,
    seed: u64,
    opts: TrialOptions,
) -> Result<Vec<TrialRecord>> {
    if n_trials == 0 {
        return Err(Error::Precondition("need at least one trial".into()));
    }
    let runner = TrialRunner::new(kernel, base, opts)?;
    (0..n_trials).map(|i| runner.trial(i, seed)).collect()
}

/// Aggregate of a trial run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialSummary {
    pub n_trials: usize,
    pub violations: usize,
    pub pass_rate: f64,
    pub min_gap: f64,
    pub max_gap: f64,
    /// Seed of the trial with the smallest gap.
    pub argmin_seed: u64,
    pub argmin_index: usize,
}

pub fn summarize(records: &[TrialRecord]) -> Result<TrialSummary> {
    let first = records
        .first()
        .ok_or_else(|| Error::Precondition("no trial records".into()))?;
    let mut min = first;
    let mut max_gap = first.gap;
    let mut violations = 0;
    for r in records {
        if r.gap < min.gap {
            min = r;
        }
        max_gap = max_gap.max(r.gap);
        if !r.passed {
            violations += 1;
        }
    }
    Ok(TrialSummary {
        n_trials: records.len(),
        violations,
        pass_rate: (records.len() - violations) as f64 / records.len() as f64,
        min_gap: min.gap,
        max_gap,
        argmin_seed: min.seed,
        argmin_index: min.index,
    })
}

/// Whether sorted `angles` are `2 pi j / m + c` for some `c`, to `tol`.
pub fn is_rotation_of_symmetric(angles: &[f64], tol: f64) -> bool {
    let m = angles.len();
    if m == 0 {
        return false;
    }
    angles.iter().enumerate().all(|(j, &t)| {
        let diff = normalize_angle(t - angles[0] - TAU * j as f64 / m as f64);
        diff.min(TAU - diff) <= tol
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    Minimize,
    Maximize,
}

impl Direction {
    /// The direction in which the scheme's symmetric configuration is
    /// extremal.
    pub fn for_scheme(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Theorem1 => Direction::Minimize,
            Scheme::Theorem2 => Direction::Maximize,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub restarts: usize,
    /// Standard deviation of the random starting logits.
    pub start_spread: f64,
    pub simplex: NelderMeadOptions,
    /// Allowed excess beyond the symmetric energy.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 20,
            start_spread: 1.0,
            simplex: NelderMeadOptions::default(),
            tol: SEARCH_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchResult {
    pub direction: Direction,
    /// Best angles found, with `theta_0 = 0`.
    pub angles: Vec<f64>,
    pub en: f64,
    pub en_symmetric: f64,
    /// `en - en_symmetric`.
    pub gap_to_symmetric: f64,
    /// Whether `en` beats the symmetric energy by more than the tolerance.
    pub violation: bool,
    pub restarts: usize,
    pub best_restart: usize,
    pub evaluations: usize,
    /// False if some restart stopped on its evaluation budget.
    pub converged: bool,
}

/// Angles `0 = theta_0 < ... < theta_{m-1}` whose gaps are
/// `2 pi softmax(0, params)`; `m = params.len() + 1`.
pub fn gauge_angles(params: &[f64]) -> Vec<f64> {
    let top = params.iter().copied().fold(0.0, f64::max);
    let mut weights = Vec::with_capacity(params.len() + 1);
    weights.push((-top).exp());
    weights.extend(params.iter().map(|p| (p - top).exp()));
    let total: f64 = weights.iter().sum();
    let mut angles = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        angles.push(acc);
        acc += TAU * w / total;
    }
    angles
}

/// One simplex run from `start` (gap logits, see [`gauge_angles`]).
/// Coincident points and collapsed angles count as `+inf`; any other
/// evaluation error is returned.
pub fn search_from<K: Kernel + ?Sized>(
    kernel: &K,
    base: &Configuration,
    direction: Direction,
    start: &[f64],
    opts: &NelderMeadOptions,
) -> Result<Minimum> {
    check_kernel(kernel, base)?;
    if start.len() + 1 != base.m() {
        return Err(Error::Dimension {
            expected: base.m() - 1,
            found: start.len(),
        });
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let objective = |v: &[f64]| {
        let en = base
            .with_angles(gauge_angles(v))
            .and_then(|c| configuration_energy(kernel, &c));
        match en {
            Ok(e) => direction.sign() * e,
            Err(Error::Singular | Error::Config(_)) => f64::INFINITY,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        }
    };
    let mut best = nelder_mead(objective, start, opts);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    best.value *= direction.sign();
    Ok(best)
}

/// Multi-start simplex search for a configuration beating the symmetric
/// one in `direction`, which must match the scheme.
pub fn extremality_search<K: Kernel + ?Sized>(
    kernel: &K,
    base: &Configuration,
    direction: Direction,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    base.validate()?;
    if direction != Direction::for_scheme(base.scheme) {
        return Err(Error::Precondition(format!(
            "{} is extremal under {:?}, not {direction:?}",
            base.scheme.label(),
            Direction::for_scheme(base.scheme)
        )));
    }
    if base.m() < 2 || opts.restarts == 0 {
        return Err(Error::Precondition("search needs m >= 2 and at least one restart".into()));
    }
    let en_symmetric = configuration_energy(kernel, &base.symmetrize()?)?;
    let mut best: Option<(usize, Minimum)> = None;
    let mut evaluations = 0;
    let mut converged = true;
    for r in 0..opts.restarts {
        let mut rng = rng::stream(seed, r as u64);
        let start: Vec<f64> = (1..base.m())
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                opts.start_spread * z
            })
            .collect();
        let run = search_from(kernel, base, direction, &start, &opts.simplex)?;
        evaluations += run.evaluations;
        converged &= run.converged;
        let better = match &best {
            None => true,
            Some((_, b)) => direction.sign() * run.value < direction.sign() * b.value,
        };
        if better {
            best = Some((r, run));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    let gap = run.value - en_symmetric;
    Ok(SearchResult {
        direction,
        angles: gauge_angles(&run.x),
        en: run.value,
        en_symmetric,
        gap_to_symmetric: gap,
        violation: direction.sign() * gap < -opts.tol,
        restarts: opts.restarts,
        best_restart,
        evaluations,
        converged,
    })
}

/// Energy of `(0, phi)` for `n_grid` angles `phi = 2 pi i / (n_grid + 1)`;
/// `m` must be 2.
pub fn angle_scan<K: Kernel + ?Sized>(kernel: &K, base: &Configuration, n_grid: usize) -> Result<Vec<(f64, f64)>> {
    if base.m() != 2 {
        return Err(Error::Precondition(format!("scan needs m = 2, got {}", base.m())));
    }
    (1..=n_grid)
        .map(|i| {
            let phi = TAU * i as f64 / (n_grid + 1) as f64;
            let en = configuration_energy(kernel, &base.with_angles(alloc::vec![0.0, phi])?)?;
            Ok((phi, en))
        })
        .collect()
}
