//! Run configuration and the JSON sidecar written next to each skeleton.

use serde::{Deserialize, Serialize};
use zigzag_bridge::models::{EstimatorConfig, EstimatorVariant, LogisticModel};
use zigzag_bridge::samplers::{Algorithm, RunStats};
use zigzag_bridge::BasisContext;

use crate::UsageError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `b(x) = α + βx`.
    Linear { alpha: f64, beta: f64 },
    /// `b(x) = α sin(x)`.
    Sine { alpha: f64 },
    /// Stochastic logistic growth `dY = rY(1 - Y/K) dt + βY dW`, sampled
    /// after the Lamperti transform.
    Logistic { r: f64, capacity: f64, beta: f64 },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Linear { .. } => "linear",
            ModelSpec::Sine { .. } => "sine",
            ModelSpec::Logistic { .. } => "logistic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VelocitySpec {
    Uniform,
    /// Magnitude `ρ^i` at level `i`.
    Level { rho: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub levels: u32,
    pub horizon: f64,
    /// Start point in the model's own coordinates.
    pub u: f64,
    /// End point in the model's own coordinates.
    pub v: f64,
    pub algorithm: Algorithm,
    pub estimator: EstimatorConfig,
    pub final_clock: f64,
    pub burnin: f64,
    pub sample_step: f64,
    pub velocities: VelocitySpec,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), UsageError> {
        let usage = |m: String| Err(UsageError(m));
        if !(self.final_clock.is_finite() && self.final_clock > 0.0) {
            return usage(format!("--clock must be positive, got {}", self.final_clock));
        }
        if !(self.burnin >= 0.0 && self.burnin < self.final_clock) {
            return usage(format!("--burnin must lie in [0, clock), got {}", self.burnin));
        }
        if !(self.sample_step.is_finite() && self.sample_step > 0.0) {
            return usage(format!("--step must be positive, got {}", self.sample_step));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return usage(format!("--T must be positive, got {}", self.horizon));
        }
        if self.algorithm.needs_exact_rates() && !matches!(self.model, ModelSpec::Linear { .. }) {
            return usage(format!(
                "algorithm {} needs exactly samplable rates, which only the linear model provides",
                self.algorithm
            ));
        }
        if let VelocitySpec::Level { rho } = self.velocities {
            if !(rho.is_finite() && rho > 0.0) {
                return usage(format!("--rho must be positive, got {rho}"));
            }
        }
        self.estimator.validate().map_err(|e| UsageError(e.to_string()))?;
        self.context().map_err(|e| UsageError(e.to_string()))?;
        Ok(())
    }

    /// Endpoints in the space where the bridge is sampled.
    pub fn sampled_endpoints(&self) -> zigzag_bridge::Result<(f64, f64)> {
        match self.model {
            ModelSpec::Logistic { r, capacity, beta } => {
                let m = LogisticModel::new(r, capacity, beta)?;
                Ok((m.lamperti(self.u)?, m.lamperti(self.v)?))
            }
            _ => Ok((self.u, self.v)),
        }
    }

    pub fn context(&self) -> zigzag_bridge::Result<BasisContext> {
        let (u, v) = self.sampled_endpoints()?;
        BasisContext::new(self.levels, self.horizon, u, v)
    }
}

/// Convenience constructor for estimator settings from CLI flags.
pub fn estimator(variant: EstimatorVariant, scale: Option<f64>, cap: Option<usize>) -> EstimatorConfig {
    let mut e = EstimatorConfig::new(variant);
    if let Some(s) = scale {
        e.scale = s;
    }
    if let Some(c) = cap {
        e.cap = c;
    }
    e
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkeletonFormat {
    FullState,
    Reflections,
}

/// Metadata written as `<skeleton stem>.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub version: String,
    pub config: RunConfig,
    pub skeleton_file: String,
    pub format: SkeletonFormat,
    /// Initial velocities, needed to replay a reflection log.
    pub initial_velocities: Vec<f64>,
    pub stats: RunStats,
    pub wall_time_secs: f64,
}
