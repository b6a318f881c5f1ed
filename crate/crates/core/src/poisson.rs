//! First-event simulation for inhomogeneous Poisson processes.
//!
//! Three rate families are supported, each inverted in closed form:
//! positive-part affine rates `(a + b s)^+`, truncated exponentials
//! `max(0, c e^{γ s})`, and finite superpositions of those two. A first event
//! time solves `∫_0^τ λ(s) ds = E` for an `Exp(1)` deviate `E`; when the total
//! mass of the rate is below `E` the result is `f64::INFINITY`.

use arrayvec::ArrayVec;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{domain, Result};

/// Maximum number of components in a [`RateSpec`].
pub const MAX_COMPONENTS: usize = 4;

/// `λ(s) = (a + b s)^+`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineRate {
    pub a: f64,
    pub b: f64,
}

/// `λ(s) = max(0, c e^{γ s})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpRate {
    pub c: f64,
    pub gamma: f64,
}

fn check_deviate(e: f64) -> Result<()> {
    if !(e.is_finite() && e >= 0.0) {
        return domain(format!("exponential deviate must be finite and non-negative, got {e}"));
    }
    Ok(())
}

impl AffineRate {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return domain(format!("affine rate parameters must be finite, got ({a}, {b})"));
        }
        Ok(Self { a, b })
    }

    pub fn constant(rate: f64) -> Result<Self> {
        Self::new(rate, 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        (self.a + self.b * s).max(0.0)
    }

    /// `∫_0^s (a + b x)^+ dx`.
    pub fn integral(&self, s: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if b == 0.0 {
            return a.max(0.0) * s;
        }
        if b > 0.0 {
            let start = (-a / b).max(0.0);
            if s <= start {
                return 0.0;
            }
            let w = s - start;
            let rate0 = a.max(0.0);
            return rate0 * w + 0.5 * b * w * w;
        }
        if a <= 0.0 {
            return 0.0;
        }
        let w = s.min(a / -b);
        a * w + 0.5 * b * w * w
    }

    /// Total mass `∫_0^∞ λ`, infinite unless the rate eventually vanishes.
    pub fn total_mass(&self) -> f64 {
        match (self.a > 0.0, self.b) {
            (_, b) if b > 0.0 => f64::INFINITY,
            (true, 0.0) => f64::INFINITY,
            (true, b) => self.a * self.a / (2.0 * -b),
            (false, _) => 0.0,
        }
    }

    /// Smallest `τ` with `∫_0^τ λ = e`, or infinity.
    pub fn first_event(&self, e: f64) -> Result<f64> {
        check_deviate(e)?;
        let (a, b) = (self.a, self.b);
        if !(a.is_finite() && b.is_finite()) {
            return domain("affine rate parameters must be finite");
        }
        if b == 0.0 {
            return Ok(if a > 0.0 { e / a } else { f64::INFINITY });
        }
        if b > 0.0 {
            let start = (-a / b).max(0.0);
            let rate0 = a.max(0.0);
            let root = (rate0 * rate0 + 2.0 * b * e).sqrt();
            let denom = rate0 + root;
            if denom == 0.0 {
                return Ok(start);
            }
            return Ok(start + 2.0 * e / denom);
        }
        if a <= 0.0 || e > self.total_mass() {
            return Ok(f64::INFINITY);
        }
        let mut disc = a * a + 2.0 * b * e;
        if disc < 0.0 {
            if disc < -1e-14 * (1.0 + a * a) {
                return Ok(f64::INFINITY);
            }
            disc = 0.0;
        }
        Ok(2.0 * e / (a + disc.sqrt()))
    }
}

impl ExpRate {
    pub fn new(c: f64, gamma: f64) -> Result<Self> {
        if !(c.is_finite() && gamma.is_finite()) {
            return domain(format!("exponential rate parameters must be finite, got ({c}, {gamma})"));
        }
        Ok(Self { c, gamma })
    }

    pub fn eval(&self, s: f64) -> f64 {
        if self.c <= 0.0 {
            0.0
        } else {
            self.c * (self.gamma * s).exp()
        }
    }

    pub fn integral(&self, s: f64) -> f64 {
        if self.c <= 0.0 {
            0.0
        } else if self.gamma == 0.0 {
            self.c * s
        } else {
            self.c * (self.gamma * s).exp_m1() / self.gamma
        }
    }

    pub fn total_mass(&self) -> f64 {
        if self.c <= 0.0 {
            0.0
        } else if self.gamma >= 0.0 {
            f64::INFINITY
        } else {
            self.c / -self.gamma
        }
    }

    pub fn first_event(&self, e: f64) -> Result<f64> {
        check_deviate(e)?;
        let (c, gamma) = (self.c, self.gamma);
        if !(c.is_finite() && gamma.is_finite()) {
            return domain("exponential rate parameters must be finite");
        }
        if c <= 0.0 {
            return Ok(f64::INFINITY);
        }
        if gamma == 0.0 {
            return Ok(e / c);
        }
        if gamma < 0.0 && e >= c / -gamma {
            return Ok(f64::INFINITY);
        }
        Ok((gamma * e / c).ln_1p() / gamma)
    }
}

/// One component of a superposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateComponent {
    Affine(AffineRate),
    Exp(ExpRate),
}

impl RateComponent {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Self::Affine(r) => r.eval(s),
            Self::Exp(r) => r.eval(s),
        }
    }

    pub fn integral(&self, s: f64) -> f64 {
        match self {
            Self::Affine(r) => r.integral(s),
            Self::Exp(r) => r.integral(s),
        }
    }

    pub fn first_event(&self, e: f64) -> Result<f64> {
        match self {
            Self::Affine(r) => r.first_event(e),
            Self::Exp(r) => r.first_event(e),
        }
    }
}

impl From<AffineRate> for RateComponent {
    fn from(r: AffineRate) -> Self {
        Self::Affine(r)
    }
}

impl From<ExpRate> for RateComponent {
    fn from(r: ExpRate) -> Self {
        Self::Exp(r)
    }
}

/// A superposition of up to [`MAX_COMPONENTS`] rates. A single-component
/// spec is just that rate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RateSpec {
    components: ArrayVec<RateComponent, MAX_COMPONENTS>,
}

impl RateSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn affine(a: f64, b: f64) -> Self {
        let mut spec = Self::new();
        spec.push(AffineRate { a, b });
        spec
    }

    /// Appends a component.
    ///
    /// # Panics
    /// Panics when more than [`MAX_COMPONENTS`] components are pushed.
    pub fn push(&mut self, component: impl Into<RateComponent>) {
        self.components.push(component.into());
    }

    pub fn components(&self) -> &[RateComponent] {
        &self.components
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.components.iter().map(|c| c.eval(s)).sum()
    }

    pub fn integral(&self, s: f64) -> f64 {
        self.components.iter().map(|c| c.integral(s)).sum()
    }

    /// Superposition first event drawing one deviate per component from `rng`.
    pub fn first_event<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, Option<usize>)> {
        first_event_superposition(&self.components, rng)
    }
}

impl FromIterator<RateComponent> for RateSpec {
    fn from_iter<I: IntoIterator<Item = RateComponent>>(iter: I) -> Self {
        let mut spec = Self::new();
        for c in iter {
            spec.push(c);
        }
        spec
    }
}

pub fn first_event_affine(rate: AffineRate, e: f64) -> Result<f64> {
    rate.first_event(e)
}

pub fn first_event_exp(rate: ExpRate, e: f64) -> Result<f64> {
    rate.first_event(e)
}

/// Minimum of independent component first events for the given deviates,
/// with the index of the component that fired. Ties go to the lowest index;
/// `None` when every component is infinite.
pub fn first_event_with_deviates(
    rates: &[RateComponent],
    deviates: &[f64],
) -> Result<(f64, Option<usize>)> {
    if rates.is_empty() {
        return domain("superposition needs at least one component");
    }
    if rates.len() != deviates.len() {
        return domain("one deviate is required per component");
    }
    let mut best = (f64::INFINITY, None);
    for (idx, (rate, &e)) in rates.iter().zip(deviates).enumerate() {
        let tau = rate.first_event(e)?;
        if tau < best.0 {
            best = (tau, Some(idx));
        }
    }
    Ok(best)
}

/// As [`first_event_with_deviates`], drawing `Exp(1)` deviates from `rng`.
pub fn first_event_superposition<R: Rng + ?Sized>(
    rates: &[RateComponent],
    rng: &mut R,
) -> Result<(f64, Option<usize>)> {
    if rates.is_empty() {
        return domain("superposition needs at least one component");
    }
    if rates.len() <= MAX_COMPONENTS {
        let deviates: ArrayVec<f64, MAX_COMPONENTS> =
            rates.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
        return first_event_with_deviates(rates, &deviates);
    }
    let deviates: Vec<f64> = rates.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    first_event_with_deviates(rates, &deviates)
}
