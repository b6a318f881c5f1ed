//! Stochastic logistic growth `dY = rY(1 - Y/K) dt + βY dW`.
//!
//! The transform `X = -log(Y)/β` gives unit diffusivity with drift
//! `b(x) = c₁ + c₂ e^{-βx}`, `c₁ = β/2 - r/β`, `c₂ = r/(βK)`, and
//! `2bb' + b'' = a₁ e^{-βx} - a₂ e^{-2βx}` with `a₁ = 2r²/(βK)` and
//! `a₂ = a₁/K`.
//!
//! The rate bound uses the linear envelope `X_s + tV_s ≥ b⁽¹⁾ + b⁽²⁾t` over
//! the support of `k`, where `b⁽¹⁾` and `b⁽²⁾` are the infima of the path and of
//! `V = Σ φ_j θ_j` on that support. Each exponential term is then bounded by
//! an exponential in time, and the bound is the superposition
//! `(θ_k ξ_k(t))^+ + max(0, c₂ e^{β* t}) + max(0, c₃ e^{2β* t})` with
//! `β* = -βb⁽²⁾`.

use super::{BoundNeighbourhood, BoundedDrift, Drift};
use crate::basis::{BasisContext, DyadicIndex};
use crate::error::{domain, Result};
use crate::poisson::{AffineRate, ExpRate, RateSpec};

/// Logistic growth parameters in the original state space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticModel {
    pub r: f64,
    pub capacity: f64,
    pub beta: f64,
}

impl LogisticModel {
    pub fn new(r: f64, capacity: f64, beta: f64) -> Result<Self> {
        for (name, value) in [("r", r), ("K", capacity), ("beta", beta)] {
            if !(value.is_finite() && value > 0.0) {
                return domain(format!("logistic parameter {name} must be positive, got {value}"));
            }
        }
        Ok(Self { r, capacity, beta })
    }

    /// `x = -log(y)/β`.
    pub fn lamperti(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y > 0.0) {
            return domain(format!("logistic state must be positive, got {y}"));
        }
        Ok(-y.ln() / self.beta)
    }

    /// `y = e^{-βx}`.
    pub fn inverse_lamperti(&self, x: f64) -> f64 {
        (-self.beta * x).exp()
    }

    pub fn drift(&self) -> LogisticDrift {
        let (r, k, beta) = (self.r, self.capacity, self.beta);
        let a1 = 2.0 * r * r / (beta * k);
        LogisticDrift {
            beta,
            c1: 0.5 * beta - r / beta,
            c2: r / (beta * k),
            a1,
            a2: a1 / k,
        }
    }
}

/// Drift of the transformed process.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticDrift {
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl LogisticDrift {
    /// Builds the drift directly from `(c₁, c₂, β)`.
    pub fn from_transformed(c1: f64, c2: f64, beta: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite()) {
            return domain("transformed logistic parameters must be finite");
        }
        if !(beta.is_finite() && beta > 0.0) {
            return domain(format!("beta must be positive, got {beta}"));
        }
        Ok(Self {
            beta,
            c1,
            c2,
            a1: c2 * beta * (beta - 2.0 * c1),
            a2: 2.0 * beta * c2 * c2,
        })
    }
}

impl Drift for LogisticDrift {
    fn value(&self, x: f64) -> f64 {
        self.c1 + self.c2 * (-self.beta * x).exp()
    }

    fn derivative(&self, x: f64) -> f64 {
        -self.beta * self.c2 * (-self.beta * x).exp()
    }

    fn second_derivative(&self, x: f64) -> f64 {
        self.beta * self.beta * self.c2 * (-self.beta * x).exp()
    }

    fn gradient_density(&self, x: f64) -> f64 {
        let e = (-self.beta * x).exp();
        e * (self.a1 - self.a2 * e)
    }
}

/// `(b⁽¹⁾, b⁽²⁾)`: infima over the support of `k` of the pinned path and of
/// `Σ φ_j θ_j`. Both functions are piecewise linear with breakpoints on the
/// dyadic grid, so the minima are exact.
pub fn envelope_infima(
    ctx: &BasisContext,
    k: usize,
    xi: &[f64],
    theta: &[f64],
    scratch: &mut Vec<f64>,
) -> (f64, f64) {
    let (b1, _) = ctx.local_extrema(k, xi, true, scratch);
    let (b2, _) = ctx.local_extrema(k, theta, false, scratch);
    (b1, b2)
}

pub fn logistic_bound(
    ctx: &BasisContext,
    drift: &LogisticDrift,
    k: usize,
    xi: &[f64],
    theta: &[f64],
    scratch: &mut Vec<f64>,
) -> RateSpec {
    let level = DyadicIndex::from_slot(k).level();
    let (b1, b2) = envelope_infima(ctx, k, xi, theta, scratch);
    let beta = drift.beta;
    let growth = -beta * b2;
    let z1 = drift.a1 * (-beta * b1).exp();
    let z2 = drift.a2 * (-2.0 * beta * b1).exp();
    let scale = 0.5 * theta[k] * ctx.peak(level) * ctx.support_len(level);
    let mut spec = RateSpec::new();
    spec.push(AffineRate {
        a: theta[k] * xi[k],
        b: theta[k] * theta[k],
    });
    spec.push(ExpRate {
        c: scale * z1,
        gamma: growth,
    });
    spec.push(ExpRate {
        c: -scale * z2,
        gamma: 2.0 * growth,
    });
    spec
}

impl BoundedDrift for LogisticDrift {
    fn bound(&self, ctx: &BasisContext, k: usize, xi: &[f64], theta: &[f64], scratch: &mut Vec<f64>) -> RateSpec {
        logistic_bound(ctx, self, k, xi, theta, scratch)
    }

    fn bound_neighbourhood(&self) -> BoundNeighbourhood {
        BoundNeighbourhood::Dependency
    }
}
