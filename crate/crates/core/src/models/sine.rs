//! Sine drift `b(x) = α sin x`.
//!
//! `2bb' + b'' = α² sin 2x - α sin x` is bounded by `α² + α`, so the
//! integral part of each rate is bounded by a constant that depends only on
//! the level of the coefficient.

use super::{BoundNeighbourhood, BoundedDrift, Drift};
use crate::basis::{BasisContext, DyadicIndex};
use crate::error::{domain, Result};
use crate::poisson::{AffineRate, RateSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineDrift {
    pub alpha: f64,
}

impl SineDrift {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return domain(format!("sine amplitude must be finite and non-negative, got {alpha}"));
        }
        Ok(Self { alpha })
    }
}

impl Drift for SineDrift {
    fn value(&self, x: f64) -> f64 {
        self.alpha * x.sin()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.alpha * x.cos()
    }

    fn second_derivative(&self, x: f64) -> f64 {
        -self.alpha * x.sin()
    }

    fn gradient_density(&self, x: f64) -> f64 {
        self.alpha * self.alpha * (2.0 * x).sin() - self.alpha * x.sin()
    }
}

/// `a₁ = Φ̄ |S| (α² + α) / 2` for coefficients at `level`.
pub fn sine_bound_constant(ctx: &BasisContext, drift: &SineDrift, level: u32) -> f64 {
    let alpha = drift.alpha;
    0.5 * ctx.peak(level) * ctx.support_len(level) * (alpha * alpha + alpha)
}

/// `λ̄_k(s) = |θ_k| a₁ + (θ_k (ξ_k + θ_k s))^+`.
pub fn sine_bound(ctx: &BasisContext, drift: &SineDrift, k: usize, xi: &[f64], theta: &[f64]) -> RateSpec {
    let a1 = sine_bound_constant(ctx, drift, DyadicIndex::from_slot(k).level());
    let mut spec = RateSpec::new();
    spec.push(AffineRate {
        a: theta[k].abs() * a1,
        b: 0.0,
    });
    spec.push(AffineRate {
        a: theta[k] * xi[k],
        b: theta[k] * theta[k],
    });
    spec
}

impl BoundedDrift for SineDrift {
    fn bound(&self, ctx: &BasisContext, k: usize, xi: &[f64], theta: &[f64], _: &mut Vec<f64>) -> RateSpec {
        sine_bound(ctx, self, k, xi, theta)
    }

    fn bound_neighbourhood(&self) -> BoundNeighbourhood {
        BoundNeighbourhood::Own
    }
}
