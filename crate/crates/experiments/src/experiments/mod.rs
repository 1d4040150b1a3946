//! Experiment drivers. Each one appends rows, values and checks to a
//! [`Report`](crate::report::Report).

pub mod bandlimited;
pub mod constants;
pub mod doughnut;
pub mod invariants;
pub mod pseudocusps;
pub mod realize;
pub mod sphere;

use anyhow::Result;
use rayon::prelude::*;
use std::time::Instant;

use singmap_core::gaussian::RngStream;
use singmap_core::kac_rice::{McEstimate, ResultRecord};

/// Stream labels, one per experiment, so that runs never share draws.
pub(crate) mod tag {
    pub const BANDLIMITED: u64 = 1;
    pub const DOUGHNUT: u64 = 2;
    pub const SPHERE: u64 = 3;
    pub const CONSTANTS: u64 = 4;
    pub const PSEUDOCUSPS: u64 = 5;
    pub const REALIZE: u64 = 6;
    pub const ORACLE: u64 = 7;
    pub const INVARIANTS: u64 = 8;
}

/// Stream for trial `trial` at parameter `param` of experiment `tag`.
pub(crate) fn trial_stream(seed: u64, tag: u64, param: u64, trial: u64) -> RngStream {
    RngStream::from_seed(seed).derive(tag).derive2(param, trial)
}

/// Seed for a Monte Carlo estimate at parameter `param`.
pub(crate) fn mc_seed(seed: u64, tag: u64, param: u64) -> u64 {
    RngStream::from_seed(seed)
        .derive(tag)
        .derive2(param, u64::MAX)
        .stream_id
}

/// Runs `trials` independent trials on the current pool, in trial order.
pub(crate) fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

pub(crate) fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, u64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_millis() as u64))
}

pub(crate) fn record(
    formula_id: &str,
    model: &str,
    parameters: serde_json::Value,
    query: serde_json::Value,
    e: &McEstimate,
    ms: u64,
) -> ResultRecord {
    ResultRecord::new(formula_id, model, parameters, query, e, ms)
}

/// Relative gap `|a / b - 1|`.
pub(crate) fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}
