//! Bridge targets over Faber-Schauder coefficients.
//!
//! For a unit-diffusivity SDE `dX = b(X) dt + dW` pinned at `X(0) = u` and
//! `X(T) = v`, the energy of the truncated coefficient vector is
//!
//! ```text
//! ψ(ξ) = ½|ξ|² + ½ ∫_0^T (b² + b')(X_s) ds
//! ```
//!
//! up to an additive constant, so that
//! `∂_k ψ = ξ_k + ½ ∫_{S_k} φ_k(s) (2bb' + b'')(X_s) ds`.
//! Because `φ_k` vanishes off its support, the integral depends only on the
//! coefficients in `N_k`. An unbiased estimate replaces the integral by
//! `|S_k|` times the integrand at uniform points of `S_k`.
//!
//! [`BridgeModel`] combines a basis, a drift and an estimator configuration
//! and plugs into the samplers: exact rates for the linear drift, bounds and
//! estimates for every drift with a [`BoundedDrift`] implementation.

mod gaussian;
mod linear;
mod logistic;
mod sine;

pub use gaussian::GaussianTarget;
pub use linear::{linear_rate, LinearDrift};
pub use logistic::{envelope_infima, logistic_bound, LogisticDrift, LogisticModel};
pub use sine::{sine_bound, sine_bound_constant, SineDrift};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisContext, DyadicIndex};
use crate::error::{domain, Error, Result};
use crate::poisson::RateSpec;
use crate::samplers::{ExactRates, SubsampledRates};

/// Drift `b` of a unit-diffusivity SDE with its first two derivatives.
pub trait Drift {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn second_derivative(&self, x: f64) -> f64;

    /// `b² + b'`, the integrand of the path energy.
    fn energy_density(&self, x: f64) -> f64 {
        let b = self.value(x);
        b * b + self.derivative(x)
    }

    /// `2bb' + b''`, the integrand of the energy gradient.
    fn gradient_density(&self, x: f64) -> f64 {
        2.0 * self.value(x) * self.derivative(x) + self.second_derivative(x)
    }
}

/// Which coefficients a drift's rate bound for `k` reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundNeighbourhood {
    /// Only `ξ_k`.
    Own,
    /// Every ancestor and descendant of `k`.
    Dependency,
}

/// Drift with a dominating rate bound for the subsampled gradient estimate.
pub trait BoundedDrift: Drift {
    /// Bound `s ↦ λ̄_k(s)` for the state `(ξ, θ)`, valid for every estimator
    /// variant and every subsample until a velocity in the bound
    /// neighbourhood changes.
    fn bound(
        &self,
        ctx: &BasisContext,
        k: usize,
        xi: &[f64],
        theta: &[f64],
        scratch: &mut Vec<f64>,
    ) -> RateSpec;

    fn bound_neighbourhood(&self) -> BoundNeighbourhood;
}

/// Subsampling scheme for the gradient estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorVariant {
    /// One uniform point on the support.
    Single,
    /// Average over independent uniform points.
    V1,
    /// One uniform point in each of several equal strata of the support.
    V2,
}

impl std::str::FromStr for EstimatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "v1" => Ok(Self::V1),
            "v2" => Ok(Self::V2),
            other => domain(format!("unknown estimator {other:?}")),
        }
    }
}

impl std::fmt::Display for EstimatorVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Single => "single",
            Self::V1 => "v1",
            Self::V2 => "v2",
        })
    }
}

/// Estimator variant and replication rule. For `V1` and `V2` the number of
/// points at coefficient `k` is `min(cap, ⌈scale · |S_k| / (T 2^{-(N+1)})⌉)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub variant: EstimatorVariant,
    pub scale: f64,
    pub cap: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::new(EstimatorVariant::Single)
    }
}

impl EstimatorConfig {
    pub fn new(variant: EstimatorVariant) -> Self {
        Self {
            variant,
            scale: 1.0,
            cap: 32,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0) || self.cap == 0 {
            return domain("estimator replication must be at least one point");
        }
        Ok(())
    }

    /// Number of points used at `level`.
    pub fn replicates(&self, ctx: &BasisContext, level: u32) -> usize {
        match self.variant {
            EstimatorVariant::Single => 1,
            EstimatorVariant::V1 | EstimatorVariant::V2 => {
                let cells = (1u64 << (ctx.levels() + 1 - level)) as f64;
                ((self.scale * cells).ceil() as usize).clamp(1, self.cap)
            }
        }
    }

    /// Draws the evaluation points for coefficient `k`. With one point all
    /// variants consume the generator identically.
    pub fn draw_points(&self, ctx: &BasisContext, k: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
        let (lo, hi) = ctx.slot_support(k);
        let width = hi - lo;
        let r = self.replicates(ctx, DyadicIndex::from_slot(k).level());
        out.clear();
        for q in 0..r {
            let u: f64 = rng.random();
            let s = match self.variant {
                EstimatorVariant::Single | EstimatorVariant::V1 => lo + u * width,
                EstimatorVariant::V2 => lo + (q as f64 + u) * width / r as f64,
            };
            out.push(s.min(hi));
        }
    }
}

/// Unbiased estimate of `∂_k ψ(ξ)` from evaluation points in `S_k`:
/// `ξ_k + ½|S_k| · mean_r φ_k(U_r)(2bb' + b'')(X(U_r))`.
pub fn gradient_estimate<D: Drift + ?Sized>(
    ctx: &BasisContext,
    drift: &D,
    k: usize,
    xi: &[f64],
    points: &[f64],
) -> Result<f64> {
    if xi.len() != ctx.dim() || k >= ctx.dim() {
        return domain("coefficient vector or index does not match the basis");
    }
    if points.is_empty() {
        return domain("at least one evaluation point is required");
    }
    let (lo, hi) = ctx.slot_support(k);
    if let Some(p) = points.iter().find(|p| !(lo..=hi).contains(*p)) {
        return domain(format!("evaluation point {p} outside support [{lo}, {hi}]"));
    }
    Ok(estimate_unchecked(ctx, drift, k, xi, points))
}

fn estimate_unchecked<D: Drift + ?Sized>(
    ctx: &BasisContext,
    drift: &D,
    k: usize,
    xi: &[f64],
    points: &[f64],
) -> f64 {
    let (lo, hi) = ctx.slot_support(k);
    let sum: f64 = points
        .iter()
        .map(|&s| ctx.phi_slot(k, s) * drift.gradient_density(ctx.expand_at(xi, s)))
        .sum();
    xi[k] + 0.5 * (hi - lo) * sum / points.len() as f64
}

/// Energy and gradient with the path integral replaced by a left-point sum
/// over the `2^{N+1}` dyadic cells. Writes the gradient into `grad`.
pub fn euler_energy_gradient<D: Drift + ?Sized>(
    ctx: &BasisContext,
    drift: &D,
    xi: &[f64],
    grad: &mut [f64],
    grid: &mut Vec<f64>,
) -> f64 {
    grid.resize(ctx.grid_len(), 0.0);
    ctx.fill_grid(xi, grid);
    let step = ctx.grid_step();
    grad.copy_from_slice(xi);
    let mut energy = 0.5 * xi.iter().map(|x| x * x).sum::<f64>();
    for (m, &x) in grid[..grid.len() - 1].iter().enumerate() {
        let t = m as f64 * step;
        energy += 0.5 * step * drift.energy_density(x);
        let g = 0.5 * step * drift.gradient_density(x);
        for level in 0..=ctx.levels() {
            let slot = ctx.cell_slot(level, t);
            grad[slot] += g * ctx.phi_slot(slot, t);
        }
    }
    energy
}

/// Unit velocity magnitude for every coefficient.
pub fn uniform_velocities(ctx: &BasisContext) -> Vec<f64> {
    vec![1.0; ctx.dim()]
}

/// Velocity magnitude `ρ^i` for coefficients at level `i`.
pub fn level_velocities(ctx: &BasisContext, rho: f64) -> Result<Vec<f64>> {
    if !(rho.is_finite() && rho > 0.0) {
        return domain(format!("velocity ratio must be positive, got {rho}"));
    }
    Ok((0..ctx.dim())
        .map(|k| rho.powi(DyadicIndex::from_slot(k).level() as i32))
        .collect())
}

/// A drift bound to a basis with an estimator configuration.
#[derive(Clone, Debug)]
pub struct BridgeModel<D> {
    ctx: BasisContext,
    drift: D,
    estimator: EstimatorConfig,
    own: Vec<usize>,
}

impl<D: Drift> BridgeModel<D> {
    pub fn new(ctx: BasisContext, drift: D, estimator: EstimatorConfig) -> Result<Self> {
        estimator.validate()?;
        let own = (0..ctx.dim()).collect();
        Ok(Self {
            ctx,
            drift,
            estimator,
            own,
        })
    }

    pub fn ctx(&self) -> &BasisContext {
        &self.ctx
    }

    pub fn drift(&self) -> &D {
        &self.drift
    }

    pub fn estimator(&self) -> &EstimatorConfig {
        &self.estimator
    }

    pub fn gradient_estimate(&self, k: usize, xi: &[f64], points: &[f64]) -> Result<f64> {
        gradient_estimate(&self.ctx, &self.drift, k, xi, points)
    }
}

impl ExactRates for BridgeModel<LinearDrift> {
    fn dim(&self) -> usize {
        self.ctx.dim()
    }

    fn rate(&self, k: usize, xi: &[f64], theta: &[f64]) -> RateSpec {
        let r = linear_rate(&self.ctx, &self.drift, k, xi, theta);
        RateSpec::affine(r.a, r.b)
    }

    fn neighbours(&self, k: usize) -> &[usize] {
        self.ctx.graph().neighbours(k)
    }
}

impl<D: BoundedDrift> SubsampledRates for BridgeModel<D> {
    fn dim(&self) -> usize {
        self.ctx.dim()
    }

    fn bound(&self, k: usize, xi: &[f64], theta: &[f64], scratch: &mut Vec<f64>) -> RateSpec {
        self.drift.bound(&self.ctx, k, xi, theta, scratch)
    }

    fn bound_neighbours(&self, k: usize) -> &[usize] {
        match self.drift.bound_neighbourhood() {
            BoundNeighbourhood::Own => &self.own[k..=k],
            BoundNeighbourhood::Dependency => self.ctx.graph().neighbours(k),
        }
    }

    fn draw_subsample(&self, k: usize, rng: &mut ChaCha8Rng, points: &mut Vec<f64>) {
        self.estimator.draw_points(&self.ctx, k, rng, points);
    }

    fn estimate_support(&self, k: usize, points: &[f64], out: &mut Vec<usize>) {
        out.clear();
        out.push(k);
        for &s in points {
            out.extend((0..=self.ctx.levels()).map(|level| self.ctx.cell_slot(level, s)));
        }
        out.sort_unstable();
        out.dedup();
    }

    fn estimate(&self, k: usize, xi: &[f64], points: &[f64]) -> f64 {
        estimate_unchecked(&self.ctx, &self.drift, k, xi, points)
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use rand::SeedableRng;
    use rand_distr::StandardNormal;

    fn normal_vector(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn replication_rule() {
        let ctx = BasisContext::new(6, 50.0, 0.0, 0.0).unwrap();
        let single = EstimatorConfig::new(EstimatorVariant::Single);
        let v1 = EstimatorConfig::new(EstimatorVariant::V1);
        assert_eq!(single.replicates(&ctx, 0), 1);
        assert_eq!(v1.replicates(&ctx, 0), 32);
        assert_eq!(v1.replicates(&ctx, 3), 16);
        assert_eq!(v1.replicates(&ctx, 6), 2);
        let half = EstimatorConfig { scale: 0.5, ..v1 };
        assert_eq!(half.replicates(&ctx, 6), 1);
        assert!(EstimatorConfig { cap: 0, ..v1 }.validate().is_err());
        assert!(EstimatorConfig { scale: 0.0, ..v1 }.validate().is_err());
    }

    #[test]
    fn points_lie_in_support_and_strata() {
        let ctx = BasisContext::new(4, 3.0, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut points = Vec::new();
        for variant in [EstimatorVariant::Single, EstimatorVariant::V1, EstimatorVariant::V2] {
            let cfg = EstimatorConfig::new(variant);
            for k in 0..ctx.dim() {
                cfg.draw_points(&ctx, k, &mut rng, &mut points);
                let (lo, hi) = ctx.slot_support(k);
                assert_eq!(points.len(), cfg.replicates(&ctx, DyadicIndex::from_slot(k).level()));
                assert!(points.iter().all(|p| (lo..=hi).contains(p)));
                if variant == EstimatorVariant::V2 {
                    let r = points.len() as f64;
                    for (q, p) in points.iter().enumerate() {
                        let stratum = ((p - lo) / (hi - lo) * r).floor() as usize;
                        assert_eq!(stratum.min(points.len() - 1), q);
                    }
                }
            }
        }
    }

    #[test]
    fn single_point_variants_share_draws() {
        let ctx = BasisContext::new(2, 1.0, 0.0, 0.0).unwrap();
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        for (o, variant) in out.iter_mut().zip([EstimatorVariant::Single, EstimatorVariant::V1, EstimatorVariant::V2]) {
            let cfg = EstimatorConfig { scale: 0.01, ..EstimatorConfig::new(variant) };
            cfg.draw_points(&ctx, 0, &mut ChaCha8Rng::seed_from_u64(4), o);
        }
        assert_eq!(out[0], out[1]);
        assert_eq!(out[0], out[2]);
    }

    #[test]
    fn estimate_rejects_points_outside_support() {
        let ctx = BasisContext::new(2, 1.0, 0.0, 0.0).unwrap();
        let xi = vec![0.0; ctx.dim()];
        let drift = SineDrift::new(0.7).unwrap();
        assert!(gradient_estimate(&ctx, &drift, 3, &xi, &[0.5]).is_err());
        assert!(gradient_estimate(&ctx, &drift, 3, &xi, &[0.1]).is_ok());
        assert!(gradient_estimate(&ctx, &drift, 3, &xi, &[]).is_err());
    }

    #[test]
    fn estimate_support_covers_what_estimate_reads() {
        let ctx = BasisContext::new(5, 10.0, 1.0, -1.0).unwrap();
        let model = BridgeModel::new(ctx.clone(), SineDrift::new(0.7).unwrap(), EstimatorConfig::new(EstimatorVariant::V2)).unwrap();
        let xi = normal_vector(ctx.dim(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (mut points, mut support) = (Vec::new(), Vec::new());
        for k in 0..ctx.dim() {
            model.draw_subsample(k, &mut rng, &mut points);
            model.estimate_support(k, &points, &mut support);
            assert!(support.contains(&k));
            let mut masked = vec![f64::NAN; ctx.dim()];
            for &j in &support {
                masked[j] = xi[j];
            }
            assert_eq!(model.estimate(k, &masked, &points), model.estimate(k, &xi, &points));
            // every coefficient read lies in the dependency neighbourhood
            assert!(support.iter().all(|j| ctx.graph().neighbours(k).contains(j)));
        }
    }

    #[test]
    fn euler_gradient_matches_finite_differences() {
        let ctx = BasisContext::new(3, 4.0, -1.0, 1.5).unwrap();
        let drift = SineDrift::new(0.9).unwrap();
        let xi = normal_vector(ctx.dim(), 5);
        let mut grad = vec![0.0; ctx.dim()];
        let mut grid = Vec::new();
        euler_energy_gradient(&ctx, &drift, &xi, &mut grad, &mut grid);
        let mut scratch = vec![0.0; ctx.dim()];
        for k in 0..ctx.dim() {
            let h = 1e-6;
            let mut plus = xi.clone();
            plus[k] += h;
            let mut minus = xi.clone();
            minus[k] -= h;
            let ep = euler_energy_gradient(&ctx, &drift, &plus, &mut scratch, &mut grid);
            let em = euler_energy_gradient(&ctx, &drift, &minus, &mut scratch, &mut grid);
            assert!(((ep - em) / (2.0 * h) - grad[k]).abs() < 1e-6);
        }
    }

    #[test]
    fn level_velocity_profile() {
        let ctx = BasisContext::new(3, 1.0, 0.0, 0.0).unwrap();
        let v = level_velocities(&ctx, 0.5).unwrap();
        assert_eq!(v[0], 1.0);
        assert_eq!(v[1], 0.5);
        assert_eq!(v[14], 0.125);
        assert!(level_velocities(&ctx, 0.0).is_err());
        assert!(uniform_velocities(&ctx).iter().all(|&x| x == 1.0));
    }

    // v2 ≤ v1 ≤ single in variance, all with the same mean.
    #[test]
    fn replicated_estimators_reduce_variance() {
        let ctx = BasisContext::new(4, 8.0, 0.0, 0.0).unwrap();
        let drift = SineDrift::new(0.7).unwrap();
        let xi = normal_vector(ctx.dim(), 9);
        for k in [0, 1, 5, 12] {
            let oracle = partial_by_quadrature(&ctx, &drift, k, &xi);
            let mut stats = Vec::new();
            for variant in [EstimatorVariant::Single, EstimatorVariant::V1, EstimatorVariant::V2] {
                let model = BridgeModel::new(ctx.clone(), drift, EstimatorConfig::new(variant)).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(11);
                let mut points = Vec::new();
                let draws: Vec<f64> = (0..10_000)
                    .map(|_| {
                        model.draw_subsample(k, &mut rng, &mut points);
                        model.estimate(k, &xi, &points)
                    })
                    .collect();
                let m = draws.iter().sum::<f64>() / draws.len() as f64;
                let v = draws.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (draws.len() - 1) as f64;
                let se = (v / draws.len() as f64).sqrt();
                assert!((m - oracle).abs() < 4.0 * se + 1e-12, "{variant} k={k} {m} {oracle}");
                stats.push(v);
            }
            assert!(stats[1] <= stats[0] && stats[2] <= stats[1], "{stats:?}");
        }
    }

    #[test]
    fn fine_scale_integral_terms_shrink() {
        let ctx = BasisContext::new(6, 50.0, 0.0, 0.0).unwrap();
        let drift = SineDrift::new(0.7).unwrap();
        let mut per_level = vec![0.0; 7];
        let reps = 20;
        for seed in 0..reps {
            let xi = normal_vector(ctx.dim(), 100 + seed);
            for k in 0..ctx.dim() {
                let level = DyadicIndex::from_slot(k).level() as usize;
                let term = partial_by_quadrature(&ctx, &drift, k, &xi) - xi[k];
                per_level[level] += term.abs() / (1usize << level) as f64 / reps as f64;
            }
        }
        assert!(per_level.windows(2).all(|w| w[1] < w[0]), "{per_level:?}");
    }
}
