//! Zig-Zag samplers and skeleton post-processing.
//!
//! Four variants are provided:
//!
//! * [`zigzag_standard`]: exact rates, every clock redrawn after each flip.
//! * [`zigzag_subsampled`]: dominating bounds plus thinning against an
//!   unbiased rate estimate.
//! * [`zigzag_local`]: exact rates, only the flipped coordinate's
//!   neighbourhood is redrawn.
//! * [`zigzag_fully_local`]: bounds and estimates with lazily advanced
//!   per-coordinate positions, recording reflection tuples only.
//!
//! Rates are supplied through [`ExactRates`] or [`SubsampledRates`]. Every run
//! draws from a [`RunRng`], whose exponential clocks, subsample points and
//! thinning uniforms come from separate streams of one seed.

mod fully_local;
mod lazy;
mod local;
mod queue;
pub mod skeleton;
mod standard;
mod subsampled;

pub use fully_local::zigzag_fully_local;
pub use local::zigzag_local;
pub use skeleton::{discretize, FullStateRows, Record, Reflection, ReflectionLog, Skeleton};
pub use standard::zigzag_standard;
pub use subsampled::zigzag_subsampled;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::poisson::RateSpec;

/// Coordinates with exactly samplable switching rates.
///
/// `rate(k, ξ, θ)` returns `s ↦ λ_k(ξ + sθ, θ)`. It may read only the entries
/// of `xi` listed in `neighbours(k)`, and neighbourhoods must be symmetric:
/// `j ∈ N_k` iff `k ∈ N_j`.
pub trait ExactRates {
    fn dim(&self) -> usize;
    fn rate(&self, k: usize, xi: &[f64], theta: &[f64]) -> RateSpec;
    fn neighbours(&self, k: usize) -> &[usize];
}

/// Coordinates whose rates are handled by thinning an unbiased estimate
/// against a dominating bound.
///
/// `bound(k, ξ, θ)` returns `s ↦ λ̄_k(s)` valid while no velocity in
/// `bound_neighbours(k)` changes, and may read only those entries of `xi`.
/// `estimate(k, ξ, points)` returns an unbiased estimate of `∂_k ψ(ξ)` and may
/// read only the entries listed by `estimate_support`. Bound neighbourhoods
/// must be symmetric.
pub trait SubsampledRates {
    fn dim(&self) -> usize;
    fn bound(&self, k: usize, xi: &[f64], theta: &[f64], scratch: &mut Vec<f64>) -> RateSpec;
    fn bound_neighbours(&self, k: usize) -> &[usize];
    fn draw_subsample(&self, k: usize, rng: &mut ChaCha8Rng, points: &mut Vec<f64>);
    /// `Ñ_k(U)`: the coordinates `estimate` reads for these points, `k` included.
    fn estimate_support(&self, k: usize, points: &[f64], out: &mut Vec<usize>);
    fn estimate(&self, k: usize, xi: &[f64], points: &[f64]) -> f64;
}

/// Sampler variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Standard,
    Subsampled,
    Local,
    FullyLocal,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::Subsampled => "subsampled",
            Self::Local => "local",
            Self::FullyLocal => "fully-local",
        }
    }

    /// Whether the variant needs exactly samplable rates.
    pub fn needs_exact_rates(self) -> bool {
        matches!(self, Self::Standard | Self::Local)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "subsampled" => Ok(Self::Subsampled),
            "local" => Ok(Self::Local),
            "fully-local" => Ok(Self::FullyLocal),
            other => domain(format!("unknown algorithm {other:?}")),
        }
    }
}

/// Per-run random streams derived from one seed.
#[derive(Clone, Debug)]
pub struct RunRng {
    pub clocks: ChaCha8Rng,
    pub subsample: ChaCha8Rng,
    pub thinning: ChaCha8Rng,
}

impl RunRng {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            clocks: stream(0),
            subsample: stream(1),
            thinning: stream(2),
        }
    }
}

/// Run configuration shared by all variants.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub final_clock: f64,
    /// Fully local sampler only: also record the full state at every flip.
    pub record_dense: bool,
}

impl RunOptions {
    pub fn new(final_clock: f64) -> Self {
        Self {
            final_clock,
            record_dense: false,
        }
    }
}

/// Event counts for a finished run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Proposed events popped before the final clock.
    pub proposals: u64,
    /// Velocity flips.
    pub flips: u64,
    /// True when every rate vanished for good before the final clock.
    pub exhausted: bool,
}

/// Relative slack allowed before an estimate above its bound is an error.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

fn check_domination(coordinate: usize, clock: f64, estimate: f64, bound: f64) -> Result<()> {
    if estimate > bound + VIOLATION_TOLERANCE * (1.0 + bound) {
        return Err(Error::BoundViolation {
            coordinate,
            clock,
            estimate,
            bound,
        });
    }
    Ok(())
}

fn check_inputs(dim: usize, xi0: &[f64], theta0: &[f64], opts: &RunOptions) -> Result<()> {
    if !(opts.final_clock.is_finite() && opts.final_clock > 0.0) {
        return domain(format!("final clock must be positive, got {}", opts.final_clock));
    }
    if xi0.len() != dim || theta0.len() != dim {
        return domain(format!(
            "initial state has lengths ({}, {}), expected {dim}",
            xi0.len(),
            theta0.len()
        ));
    }
    if xi0.iter().any(|x| !x.is_finite()) {
        return domain("initial position must be finite");
    }
    if theta0.iter().any(|t| !(t.is_finite() && *t != 0.0)) {
        return domain("velocities must be finite and nonzero");
    }
    Ok(())
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn streams_are_distinct_and_reproducible() {
        use rand::Rng;
        let mut a = RunRng::new(3);
        let mut b = RunRng::new(3);
        let x: u64 = a.clocks.random();
        assert_eq!(x, b.clocks.random::<u64>());
        assert_ne!(a.subsample.random::<u64>(), a.thinning.random::<u64>());
    }

    #[test]
    fn algorithm_names_round_trip() {
        for alg in [
            Algorithm::Standard,
            Algorithm::Subsampled,
            Algorithm::Local,
            Algorithm::FullyLocal,
        ] {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("zigzag".parse::<Algorithm>().is_err());
    }

    #[test]
    fn rejects_bad_configuration() {
        let target = IndependentGaussian::new(vec![0.0], vec![1.0]);
        let mut rng = RunRng::new(0);
        assert!(zigzag_standard(&target, &RunOptions::new(0.0), &[0.0], &[1.0], &mut rng).is_err());
        assert!(zigzag_standard(&target, &RunOptions::new(1.0), &[0.0], &[0.0], &mut rng).is_err());
        assert!(zigzag_local(&target, &RunOptions::new(1.0), &[0.0, 1.0], &[1.0], &mut rng).is_err());
        assert!(zigzag_subsampled(&target, &RunOptions::new(-1.0), &[0.0], &[1.0], &mut rng).is_err());
        assert!(zigzag_fully_local(&target, &RunOptions::new(f64::NAN), &[0.0], &[1.0], &mut rng).is_err());
    }

    #[test]
    fn domination_check_tolerance() {
        assert!(check_domination(0, 0.0, 1.0, 1.0).is_ok());
        assert!(check_domination(0, 0.0, 1.0 + 1e-12, 1.0).is_ok());
        assert!(matches!(
            check_domination(2, 0.5, 1.1, 1.0),
            Err(Error::BoundViolation { coordinate: 2, .. })
        ));
    }

    // 2D Gaussian rate check from the standard worked example.
    #[test]
    fn gaussian_rates_at_a_state() {
        let target = IndependentGaussian::new(vec![0.0, 0.0], vec![1.0, 1.0]);
        let xi = [1.0, -2.0];
        let theta = [1.0, 1.0];
        assert_eq!(ExactRates::rate(&target, 0, &xi, &theta).eval(0.0), 1.0);
        assert_eq!(ExactRates::rate(&target, 1, &xi, &theta).eval(0.0), 0.0);
        // moving toward the mean gives zero rate
        assert_eq!(ExactRates::rate(&target, 0, &[2.0, 0.0], &[-1.0, 1.0]).eval(0.0), 0.0);
    }

    #[test]
    fn all_variants_are_deterministic() {
        let target = IndependentGaussian::new(vec![0.0, 1.0, -1.0], vec![1.0, 0.5, 2.0]);
        let opts = RunOptions::new(200.0);
        let xi0 = [0.0; 3];
        let theta0 = [1.0; 3];
        let run = |alg: Algorithm| {
            let mut rng = RunRng::new(17);
            match alg {
                Algorithm::Standard => zigzag_standard(&target, &opts, &xi0, &theta0, &mut rng),
                Algorithm::Local => zigzag_local(&target, &opts, &xi0, &theta0, &mut rng),
                Algorithm::Subsampled => zigzag_subsampled(&target, &opts, &xi0, &theta0, &mut rng),
                Algorithm::FullyLocal => zigzag_fully_local(&target, &opts, &xi0, &theta0, &mut rng),
            }
            .unwrap()
        };
        for alg in [
            Algorithm::Standard,
            Algorithm::Subsampled,
            Algorithm::Local,
            Algorithm::FullyLocal,
        ] {
            assert_eq!(run(alg), run(alg));
        }
    }
}
