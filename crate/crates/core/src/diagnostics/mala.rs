//! Metropolis-adjusted Langevin baseline with step-size adaptation during
//! warm-up.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::BasisContext;
use crate::error::{domain, Error, Result};
use crate::models::{euler_energy_gradient, Drift};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MalaConfig {
    /// Total iterations, warm-up included.
    pub iterations: usize,
    /// Fraction of iterations used to adapt the step size and then discarded.
    pub warmup_fraction: f64,
    pub target_acceptance: f64,
    pub initial_step: f64,
    pub seed: u64,
}

impl MalaConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        Self {
            iterations,
            warmup_fraction: 0.2,
            target_acceptance: 0.6,
            initial_step: 0.01,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MalaResult {
    /// Post-warm-up states.
    pub chain: Vec<Vec<f64>>,
    /// Acceptance rate after warm-up.
    pub acceptance_rate: f64,
    /// Step size frozen at the end of warm-up.
    pub step: f64,
}

/// MALA for the density `exp(-U)`. `target(x, grad)` returns `U(x)` and
/// writes `∇U(x)` into `grad`.
pub fn mala<F>(mut target: F, x0: &[f64], config: &MalaConfig) -> Result<MalaResult>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let MalaConfig {
        iterations,
        warmup_fraction,
        target_acceptance,
        initial_step,
        seed,
    } = *config;
    if !(0.0..1.0).contains(&warmup_fraction)
        || !(target_acceptance > 0.0 && target_acceptance < 1.0)
        || !(initial_step.is_finite() && initial_step > 0.0)
    {
        return domain("invalid MALA configuration");
    }
    let d = x0.len();
    let warmup = (warmup_fraction * iterations as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; d];
    let mut energy = target(&x, &mut grad);
    let finite = |e: f64, g: &[f64]| e.is_finite() && g.iter().all(|v| v.is_finite());
    if !finite(energy, &grad) {
        return Err(Error::NonFinite(0));
    }
    let mut y = vec![0.0; d];
    let mut grad_y = vec![0.0; d];
    let mut log_step = initial_step.ln();
    let mut chain = Vec::with_capacity(iterations - warmup);
    let mut accepted = 0usize;

    for iter in 0..iterations {
        let h = log_step.exp();
        let sd = (2.0 * h).sqrt();
        for ((yi, xi), gi) in y.iter_mut().zip(&x).zip(&grad) {
            let z: f64 = rng.sample(StandardNormal);
            *yi = xi - h * gi + sd * z;
        }
        let energy_y = target(&y, &mut grad_y);
        if !finite(energy_y, &grad_y) {
            return Err(Error::NonFinite(iter + 1));
        }
        // log q(x | y) - log q(y | x) with q(b | a) ∝ exp(-|b - a + h∇U(a)|² / 4h)
        let mut log_q = 0.0;
        for i in 0..d {
            let fwd = y[i] - x[i] + h * grad[i];
            let bwd = x[i] - y[i] + h * grad_y[i];
            log_q += (fwd * fwd - bwd * bwd) / (4.0 * h);
        }
        let log_ratio = energy - energy_y + log_q;
        let accept_prob = log_ratio.min(0.0).exp();
        let u: f64 = rng.random();
        let accept = u < accept_prob;
        if accept {
            std::mem::swap(&mut x, &mut y);
            std::mem::swap(&mut grad, &mut grad_y);
            energy = energy_y;
        }
        if iter < warmup {
            log_step += (accept_prob - target_acceptance) / ((iter + 1) as f64).powf(0.6);
        } else {
            accepted += usize::from(accept);
            chain.push(x.clone());
        }
    }
    let kept = iterations - warmup;
    Ok(MalaResult {
        chain,
        acceptance_rate: if kept > 0 { accepted as f64 / kept as f64 } else { 0.0 },
        step: log_step.exp(),
    })
}

/// MALA on the bridge coefficients with the left-point Euler energy.
pub fn mala_baseline<D: Drift + ?Sized>(
    ctx: &BasisContext,
    drift: &D,
    xi0: &[f64],
    config: &MalaConfig,
) -> Result<MalaResult> {
    if xi0.len() != ctx.dim() {
        return domain(format!("initial state has length {}, expected {}", xi0.len(), ctx.dim()));
    }
    let mut grid = Vec::new();
    mala(|xi, grad| euler_energy_gradient(ctx, drift, xi, grad, &mut grid), xi0, config)
}
