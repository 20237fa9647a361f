//! Thread pool setup and the parallel drivers. Work items carry their own
//! seeded streams and results are collected in index order, so output does
//! not depend on the number of threads.

use neumann_core::harness::{TrialOptions, TrialRecord, TrialRunner};
use neumann_core::verification::{DirichletOptions, DirichletPlan, DirichletReport};
use neumann_core::{Configuration, Kernel, PointSet};
use rayon::prelude::*;

use crate::error::CliError;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "NEUMANN_THREADS";

/// Pool with `threads` workers, else `$NEUMANN_THREADS`, else one per core.
pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let n = match threads {
        Some(n) => n,
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a number, got `{v}`")))?,
            _ => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn trials<K: Kernel + Sync + ?Sized>(
    kernel: &K,
    base: &Configuration,
    n_trials: usize,
    seed: u64,
    opts: TrialOptions,
) -> Result<(f64, Vec<TrialRecord>), CliError> {
    if n_trials == 0 {
        return Err(CliError::Usage("need at least one trial".into()));
    }
    let runner = TrialRunner::new(kernel, base, opts).map_err(CliError::config)?;
    let records = (0..n_trials)
        .into_par_iter()
        .map(|i| runner.trial(i, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((runner.symmetric_energy(), records))
}

/// Rotated equally spaced angles; every gap should vanish.
pub fn equality_trials<K: Kernel + Sync + ?Sized>(
    kernel: &K,
    base: &Configuration,
    n_trials: usize,
    seed: u64,
    opts: TrialOptions,
) -> Result<Vec<TrialRecord>, CliError> {
    let runner = TrialRunner::new(kernel, base, opts).map_err(CliError::config)?;
    Ok((0..n_trials)
        .into_par_iter()
        .map(|i| runner.equality_trial(i, seed))
        .collect::<Result<Vec<_>, _>>()?)
}

pub fn dirichlet<K: Kernel + Sync + ?Sized>(
    kernel: &K,
    points: &PointSet,
    charges: &[f64],
    opts: DirichletOptions,
) -> Result<DirichletReport, CliError> {
    let plan = DirichletPlan::new(kernel, points, charges, opts)?;
    let chunks = (0..plan.n_chunks())
        .into_par_iter()
        .map(|i| plan.chunk(kernel, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(plan.finish(&chunks)?)
}
