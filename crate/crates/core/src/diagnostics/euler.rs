//! Forward Euler-Maruyama simulation with ε-ball acceptance at the endpoint.
//!
//! Every attempt uses its own ChaCha8 stream, indexed by the attempt number,
//! so the accepted set does not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::models::Drift;

const CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerOracleConfig {
    /// Euler step; must divide the horizon.
    pub step: f64,
    /// Endpoint tolerance. `f64::INFINITY` accepts every path.
    pub radius: f64,
    /// Maximum number of forward paths to simulate.
    pub attempts: usize,
    /// Stop once this many paths have been accepted.
    pub target_accepted: Option<usize>,
    /// Keep every `stride`-th grid value of accepted paths.
    pub stride: usize,
    pub seed: u64,
}

impl EulerOracleConfig {
    pub fn new(step: f64, radius: f64, attempts: usize, seed: u64) -> Self {
        Self {
            step,
            radius,
            attempts,
            target_accepted: None,
            stride: 1,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerOracleResult {
    /// Times of the retained grid points, `0` and `T` included.
    pub times: Vec<f64>,
    /// Accepted paths on `times`, in attempt order.
    pub paths: Vec<Vec<f64>>,
    pub attempts: usize,
    pub acceptance_rate: f64,
}

impl EulerOracleResult {
    /// Values of every accepted path at the retained time closest to `t`.
    pub fn marginal(&self, t: f64) -> Vec<f64> {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map_or(0, |(i, _)| i);
        self.paths.iter().map(|p| p[idx]).collect()
    }
}

fn simulate<D: Drift + ?Sized>(drift: &D, start: f64, step: f64, steps: usize, rng: &mut ChaCha8Rng, path: &mut [f64]) {
    let sd = step.sqrt();
    let mut x = start;
    path[0] = x;
    for p in path.iter_mut().skip(1).take(steps) {
        let z: f64 = rng.sample(StandardNormal);
        x += drift.value(x) * step + sd * z;
        *p = x;
    }
}

/// Simulates `dX = b(X) dt + dW` from `start` on `[0, horizon]` and keeps
/// the paths with `|X_T - end| ≤ radius`.
pub fn euler_eball<D: Drift + Sync + ?Sized>(
    drift: &D,
    start: f64,
    end: f64,
    horizon: f64,
    config: &EulerOracleConfig,
) -> Result<EulerOracleResult> {
    let EulerOracleConfig {
        step,
        radius,
        attempts,
        target_accepted,
        stride,
        seed,
    } = *config;
    if !(horizon.is_finite() && horizon > 0.0 && step.is_finite() && step > 0.0) {
        return domain("horizon and step must be positive and finite");
    }
    let steps = (horizon / step).round();
    if steps < 1.0 || (steps * step - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return domain(format!("step {step} does not divide horizon {horizon}"));
    }
    let steps = steps as usize;
    if radius.is_nan() || radius < 0.0 || stride == 0 || attempts == 0 || !start.is_finite() || !end.is_finite() {
        return domain("radius must be non-negative, stride and attempts positive, endpoints finite");
    }
    let kept: Vec<usize> = (0..=steps).step_by(stride).chain((!steps.is_multiple_of(stride)).then_some(steps)).collect();
    let times: Vec<f64> = kept.iter().map(|&m| m as f64 * step).collect();

    let mut paths = Vec::new();
    let mut simulated = 0;
    let wanted = target_accepted.unwrap_or(usize::MAX);
    while simulated < attempts && paths.len() < wanted {
        let stop = (simulated + CHUNK).min(attempts);
        let accepted: Vec<(usize, Vec<f64>)> = (simulated..stop)
            .into_par_iter()
            .map_init(
                || vec![0.0; steps + 1],
                |path, attempt| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(attempt as u64);
                    simulate(drift, start, step, steps, &mut rng, path);
                    ((path[steps] - end).abs() <= radius)
                        .then(|| (attempt, kept.iter().map(|&m| path[m]).collect()))
                },
            )
            .flatten()
            .collect();
        simulated = stop;
        for (attempt, path) in accepted {
            paths.push(path);
            if paths.len() == wanted {
                simulated = attempt + 1;
                break;
            }
        }
    }
    if paths.is_empty() {
        return Err(Error::NoAcceptance { attempts: simulated });
    }
    Ok(EulerOracleResult {
        times,
        acceptance_rate: paths.len() as f64 / simulated as f64,
        paths,
        attempts: simulated,
    })
}
