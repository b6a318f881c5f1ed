//! Linear drift `b(x) = α + βx`.
//!
//! Here `2bb' + b'' = 2β(α + βx)` is linear in the path, so the gradient is
//! affine in the coefficients and the switching rate along the flow is an
//! exactly samplable positive-part affine function of time.

use super::{BoundNeighbourhood, BoundedDrift, Drift};
use crate::basis::{BasisContext, DyadicIndex};
use crate::error::{domain, Result};
use crate::poisson::{AffineRate, RateSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearDrift {
    pub alpha: f64,
    pub beta: f64,
}

impl LinearDrift {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return domain("linear drift parameters must be finite");
        }
        Ok(Self { alpha, beta })
    }
}

impl Drift for LinearDrift {
    fn value(&self, x: f64) -> f64 {
        self.alpha + self.beta * x
    }

    fn derivative(&self, _: f64) -> f64 {
        self.beta
    }

    fn second_derivative(&self, _: f64) -> f64 {
        0.0
    }
}

/// Switching rate of coefficient `k` as `(a + b s)^+` in elapsed time `s`,
/// with `a = θ_k c₀` and `b = θ_k c₁` where `∂_k ψ(ξ + sθ) = c₀ + c₁ s`.
pub fn linear_rate(ctx: &BasisContext, drift: &LinearDrift, k: usize, xi: &[f64], theta: &[f64]) -> AffineRate {
    let (alpha, beta) = (drift.alpha, drift.beta);
    let summary = ctx.overlaps(k);
    let neighbours = ctx.graph().neighbours(k);
    let products = ctx.products(k);
    let (mut x_overlap, mut v_overlap) = (0.0, 0.0);
    for (&j, &p) in neighbours.iter().zip(products) {
        x_overlap += p * xi[j];
        v_overlap += p * theta[j];
    }
    let pinned = summary.start_weight * ctx.start() + summary.end_weight * ctx.end() / ctx.horizon().sqrt();
    let c0 = beta * beta * (pinned + x_overlap) + alpha * beta * summary.integral + xi[k];
    let c1 = beta * beta * v_overlap + theta[k];
    AffineRate {
        a: theta[k] * c0,
        b: theta[k] * c1,
    }
}

impl BoundedDrift for LinearDrift {
    /// `|θ_k| |S_k| Φ̄_k |β| (|α| + |β| (max|X| + s max|V|)) + (θ_k ξ_k(s))^+`
    /// with `X` and `V = Σ φ_j θ_j` taken over the support of `k`.
    fn bound(&self, ctx: &BasisContext, k: usize, xi: &[f64], theta: &[f64], scratch: &mut Vec<f64>) -> RateSpec {
        let level = DyadicIndex::from_slot(k).level();
        let scale = theta[k].abs() * ctx.support_len(level) * ctx.peak(level) * self.beta.abs();
        let (x_lo, x_hi) = ctx.local_extrema(k, xi, true, scratch);
        let (v_lo, v_hi) = ctx.local_extrema(k, theta, false, scratch);
        let x_max = x_lo.abs().max(x_hi.abs());
        let v_max = v_lo.abs().max(v_hi.abs());
        let mut spec = RateSpec::new();
        spec.push(AffineRate {
            a: scale * (self.alpha.abs() + self.beta.abs() * x_max),
            b: scale * self.beta.abs() * v_max,
        });
        spec.push(AffineRate {
            a: theta[k] * xi[k],
            b: theta[k] * theta[k],
        });
        spec
    }

    fn bound_neighbourhood(&self) -> BoundNeighbourhood {
        BoundNeighbourhood::Dependency
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::test_support::partial_by_quadrature;
    use crate::models::{gradient_estimate, BridgeModel, EstimatorConfig, EstimatorVariant};
    use crate::samplers::{ExactRates, SubsampledRates};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn ou_context() -> BasisContext {
        BasisContext::new(6, 10.0, -1.0, 2.0).unwrap()
    }

    fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn brownian_bridge_rate() {
        let ctx = BasisContext::new(3, 1.0, 0.3, -0.2).unwrap();
        let drift = LinearDrift::new(0.0, 0.0).unwrap();
        let xi: Vec<f64> = (0..ctx.dim()).map(|k| k as f64 * 0.1 - 0.5).collect();
        let theta: Vec<f64> = (0..ctx.dim()).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        for k in 0..ctx.dim() {
            let r = linear_rate(&ctx, &drift, k, &xi, &theta);
            assert_eq!(r.a, theta[k] * xi[k]);
            assert_eq!(r.b, theta[k] * theta[k]);
        }
    }

    #[test]
    fn rate_matches_quadrature_along_the_flow() {
        let ctx = ou_context();
        let drift = LinearDrift::new(-5.0, -1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xi = normal_vector(&mut rng, ctx.dim());
        let theta: Vec<f64> = (0..ctx.dim()).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        for k in [0, 1, 2, 6, 40, 126] {
            let r = linear_rate(&ctx, &drift, k, &xi, &theta);
            assert!(r.a.is_finite() && r.b.is_finite());
            let at_zero = theta[k] * partial_by_quadrature(&ctx, &drift, k, &xi);
            assert!((r.a - at_zero).abs() < 1e-8 * (1.0 + at_zero.abs()), "{k}: {} {at_zero}", r.a);
            for _ in 0..20 {
                let s: f64 = rng.random_range(0.0..3.0);
                let moved: Vec<f64> = xi.iter().zip(&theta).map(|(x, t)| x + s * t).collect();
                let oracle = (theta[k] * partial_by_quadrature(&ctx, &drift, k, &moved)).max(0.0);
                assert!((r.eval(s) - oracle).abs() < 1e-8 * (1.0 + oracle));
            }
        }
    }

    #[test]
    fn all_rates_finite_in_ou_setup() {
        let ctx = ou_context();
        let model = BridgeModel::new(ctx.clone(), LinearDrift::new(-5.0, -1.0).unwrap(), EstimatorConfig::default()).unwrap();
        let xi = vec![0.0; ctx.dim()];
        let theta = vec![1.0; ctx.dim()];
        for k in 0..ctx.dim() {
            let spec = ExactRates::rate(&model, k, &xi, &theta);
            assert!(spec.eval(0.0).is_finite() && spec.eval(1.0).is_finite());
        }
    }

    #[test]
    fn estimator_is_unbiased() {
        let ctx = BasisContext::new(4, 5.0, 0.5, -0.5).unwrap();
        let drift = LinearDrift::new(1.0, -0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xi = normal_vector(&mut rng, ctx.dim());
        for k in 0..ctx.dim() {
            let oracle = partial_by_quadrature(&ctx, &drift, k, &xi);
            let avg = crate::models::test_support::grid_average(&ctx, &drift, k, &xi, 10_000);
            assert!((avg - oracle).abs() <= 1e-3 * oracle.abs().max(1.0), "{k}: {avg} {oracle}");
        }
    }

    #[test]
    fn subsampled_bound_dominates() {
        let ctx = ou_context();
        let drift = LinearDrift::new(-5.0, -1.0).unwrap();
        let model = BridgeModel::new(ctx.clone(), drift, EstimatorConfig::new(EstimatorVariant::V1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut scratch = Vec::new();
        for _ in 0..20_000 {
            let xi: Vec<f64> = normal_vector(&mut rng, ctx.dim()).iter().map(|x| 3.0 * x).collect();
            let theta: Vec<f64> = (0..ctx.dim()).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let k = rng.random_range(0..ctx.dim());
            let s: f64 = rng.random_range(0.0..5.0);
            let bound = SubsampledRates::bound(&model, k, &xi, &theta, &mut scratch).eval(s);
            let moved: Vec<f64> = xi.iter().zip(&theta).map(|(x, t)| x + s * t).collect();
            let (lo, hi) = ctx.slot_support(k);
            let u = lo + (hi - lo) * rng.random::<f64>();
            let est = (theta[k] * gradient_estimate(&ctx, &drift, k, &moved, &[u]).unwrap()).max(0.0);
            assert!(est <= bound * (1.0 + 1e-12) + 1e-12);
        }
    }
}
