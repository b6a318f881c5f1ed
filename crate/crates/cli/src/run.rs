//! Builds the model named by a [`RunConfig`] and runs the chosen sampler.

use std::time::Instant;

use zigzag_bridge::models::{level_velocities, uniform_velocities, BridgeModel, Drift, LinearDrift, LogisticModel, SineDrift};
use zigzag_bridge::models::BoundedDrift;
use zigzag_bridge::samplers::{
    zigzag_fully_local, zigzag_local, zigzag_standard, zigzag_subsampled, Algorithm, RunOptions, RunRng, Skeleton,
};
use zigzag_bridge::{BasisContext, Result};

use crate::config::{ModelSpec, RunConfig, VelocitySpec};

pub struct RunOutcome {
    pub ctx: BasisContext,
    pub skeleton: Skeleton,
    pub initial_velocities: Vec<f64>,
    pub wall_time_secs: f64,
}

pub fn initial_velocities(ctx: &BasisContext, spec: VelocitySpec) -> Result<Vec<f64>> {
    match spec {
        VelocitySpec::Uniform => Ok(uniform_velocities(ctx)),
        VelocitySpec::Level { rho } => level_velocities(ctx, rho),
    }
}

fn run_subsampled<D: Drift + BoundedDrift>(
    model: &BridgeModel<D>,
    algorithm: Algorithm,
    opts: &RunOptions,
    xi0: &[f64],
    theta0: &[f64],
    rng: &mut RunRng,
) -> Result<Skeleton> {
    match algorithm {
        Algorithm::Subsampled => zigzag_subsampled(model, opts, xi0, theta0, rng),
        Algorithm::FullyLocal => zigzag_fully_local(model, opts, xi0, theta0, rng),
        other => unreachable!("{other} is rejected by validation for this model"),
    }
}

/// Runs the sampler from `ξ = 0`. The configuration must already be valid.
pub fn execute(config: &RunConfig) -> Result<RunOutcome> {
    let ctx = config.context()?;
    let theta0 = initial_velocities(&ctx, config.velocities)?;
    let xi0 = vec![0.0; ctx.dim()];
    let opts = RunOptions::new(config.final_clock);
    let mut rng = RunRng::new(config.seed);
    let start = Instant::now();
    let skeleton = match config.model {
        ModelSpec::Linear { alpha, beta } => {
            let model = BridgeModel::new(ctx.clone(), LinearDrift::new(alpha, beta)?, config.estimator)?;
            match config.algorithm {
                Algorithm::Standard => zigzag_standard(&model, &opts, &xi0, &theta0, &mut rng)?,
                Algorithm::Local => zigzag_local(&model, &opts, &xi0, &theta0, &mut rng)?,
                a => run_subsampled(&model, a, &opts, &xi0, &theta0, &mut rng)?,
            }
        }
        ModelSpec::Sine { alpha } => {
            let model = BridgeModel::new(ctx.clone(), SineDrift::new(alpha)?, config.estimator)?;
            run_subsampled(&model, config.algorithm, &opts, &xi0, &theta0, &mut rng)?
        }
        ModelSpec::Logistic { r, capacity, beta } => {
            let drift = LogisticModel::new(r, capacity, beta)?.drift();
            let model = BridgeModel::new(ctx.clone(), drift, config.estimator)?;
            run_subsampled(&model, config.algorithm, &opts, &xi0, &theta0, &mut rng)?
        }
    };
    Ok(RunOutcome {
        ctx,
        skeleton,
        initial_velocities: theta0,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}
