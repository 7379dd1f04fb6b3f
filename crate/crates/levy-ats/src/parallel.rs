//! Thread-pool drivers whose results do not depend on the thread count.

use levy_ats_core::sde::PathKernel;
use levy_ats_core::validate::McPlan;
use levy_ats_core::{ClampReport, CurvePair, PathEnsemble, ShortRateModel, ValidationReport};
use rayon::prelude::*;

use crate::error::{CliError, Result};

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

/// Same output as [`levy_ats_core::sde::simulate`], bit for bit.
pub fn simulate(
    pool: &rayon::ThreadPool,
    model: &ShortRateModel,
    horizon: f64,
    steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(CliError::Usage("need at least one path".into()));
    }
    let kernel = PathKernel::new(model, horizon, steps, seed)?;
    let n = kernel.times().len();
    let mut rates = vec![0.0; n * n_paths];
    let mut integrated = vec![0.0; n * n_paths];
    let reports: Vec<ClampReport> = pool.install(|| {
        rates
            .par_chunks_mut(n)
            .zip(integrated.par_chunks_mut(n))
            .enumerate()
            .map(|(i, (r, q))| kernel.run(i as u64, r, q))
            .collect()
    });
    let mut clamps = ClampReport::default();
    for r in &reports {
        clamps.merge(r);
    }
    Ok(PathEnsemble {
        times: kernel.times().to_vec(),
        n_paths,
        rates,
        integrated_rate: integrated,
        master_seed: seed,
        path_streams: (0..n_paths as u64).collect(),
        clamps,
        model: *model,
    })
}

/// Same output as [`levy_ats_core::validate::martingale_mc_test`], bit for bit.
#[allow(clippy::too_many_arguments)]
pub fn martingale_mc_test(
    pool: &rayon::ThreadPool,
    model: &ShortRateModel,
    pair: &CurvePair,
    maturity: f64,
    checkpoints: &[f64],
    n_paths: u64,
    steps: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let plan = McPlan::new(model, pair, maturity, checkpoints, n_paths, steps, seed)?;
    let parts: Vec<_> = pool.install(|| (0..plan.chunks()).into_par_iter().map(|c| plan.run_chunk(c)).collect());
    Ok(plan.finish(&parts))
}
