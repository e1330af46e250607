//! Rayon drivers. Results are collected in input order, so they equal the
//! serial functions in `licds_core::selection`.

use licds_core::selection::{score_point, sort_ranking, summarize};
use licds_core::{Dynamics, LicdsParams, ModelScore, SelectionError};
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::CliError;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "LICDS_THREADS";

/// A pool sized by `LICDS_THREADS`, or rayon's default when unset.
pub fn pool() -> Result<ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Config(e.to_string()))
}

/// Parallel [`licds_core::score_model`].
pub fn score_model(
    f_hat: &dyn Dynamics,
    init_points: &[Vec<f64>],
    params: &LicdsParams,
) -> Result<ModelScore, SelectionError> {
    if init_points.is_empty() {
        return Err(SelectionError::NoInitialPoints);
    }
    summarize(
        init_points
            .par_iter()
            .map(|x0| score_point(f_hat, x0, params))
            .collect(),
    )
}

/// Scores every candidate; points and candidates run concurrently.
pub fn score_models(
    candidates: &[(String, &dyn Dynamics)],
    init_points: &[Vec<f64>],
    params: &LicdsParams,
) -> Result<Vec<ModelScore>, SelectionError> {
    if candidates.len() < 2 {
        return Err(SelectionError::TooFewCandidates(candidates.len()));
    }
    candidates
        .par_iter()
        .map(|(name, f)| {
            score_model(*f, init_points, params).map_err(|e| match e {
                SelectionError::AllPointsFailed(source) => SelectionError::Candidate {
                    name: name.clone(),
                    source,
                },
                other => other,
            })
        })
        .collect()
}

/// Parallel [`licds_core::rank_models`].
pub fn rank_models(
    candidates: &[(String, &dyn Dynamics)],
    init_points: &[Vec<f64>],
    params: &LicdsParams,
) -> Result<Vec<(String, f64)>, SelectionError> {
    let scores = score_models(candidates, init_points, params)?;
    let mut ranking: Vec<(String, f64)> = candidates
        .iter()
        .zip(&scores)
        .map(|((name, _), s)| (name.clone(), s.mean_cost))
        .collect();
    sort_ranking(&mut ranking);
    Ok(ranking)
}
