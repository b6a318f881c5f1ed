//! Multivariate Gaussian target with a sparse precision matrix.
//!
//! `ψ(ξ) = ½ (ξ - μ)ᵀ Q (ξ - μ)`. The exact rate of coordinate `k` is
//! affine along the flow. For subsampling, the off-diagonal part of
//! `(Q(ξ - μ))_k` is estimated from one uniformly chosen off-diagonal entry,
//! scaled by the number of such entries; the bound keeps the diagonal term
//! exact and dominates the rest by absolute values.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};
use crate::poisson::{AffineRate, RateSpec};
use crate::samplers::{ExactRates, SubsampledRates};

#[derive(Clone, Debug)]
pub struct GaussianTarget {
    mean: Vec<f64>,
    diagonal: Vec<f64>,
    // off-diagonal entries of each row
    off: Vec<Vec<(usize, f64)>>,
    // row pattern including the diagonal, sorted
    pattern: Vec<Vec<usize>>,
}

impl GaussianTarget {
    /// From a dense symmetric positive-definite precision matrix.
    pub fn new(mean: Vec<f64>, precision: &[Vec<f64>]) -> Result<Self> {
        let d = mean.len();
        if precision.len() != d || precision.iter().any(|row| row.len() != d) {
            return domain("precision matrix must be square and match the mean");
        }
        let mut diagonal = Vec::with_capacity(d);
        let mut off = Vec::with_capacity(d);
        let mut pattern = Vec::with_capacity(d);
        for (k, row) in precision.iter().enumerate() {
            if !(row[k].is_finite() && row[k] > 0.0) {
                return domain(format!("precision diagonal entry {k} must be positive"));
            }
            diagonal.push(row[k]);
            let mut entries = Vec::new();
            let mut pat = Vec::new();
            for (j, &q) in row.iter().enumerate() {
                if (q - precision[j][k]).abs() > 1e-12 * (1.0 + q.abs()) {
                    return domain("precision matrix must be symmetric");
                }
                if j == k {
                    pat.push(j);
                } else if q != 0.0 {
                    entries.push((j, q));
                    pat.push(j);
                }
            }
            off.push(entries);
            pattern.push(pat);
        }
        Ok(Self {
            mean,
            diagonal,
            off,
            pattern,
        })
    }

    /// Independent coordinates `N(μ_k, σ_k²)`.
    pub fn independent(mean: Vec<f64>, sd: &[f64]) -> Result<Self> {
        let d = mean.len();
        let precision: Vec<Vec<f64>> = (0..d)
            .map(|k| (0..d).map(|j| if j == k { 1.0 / (sd[k] * sd[k]) } else { 0.0 }).collect())
            .collect();
        Self::new(mean, &precision)
    }

    /// Tridiagonal precision with constant diagonal and off-diagonal.
    pub fn tridiagonal(mean: Vec<f64>, diagonal: f64, off_diagonal: f64) -> Result<Self> {
        let d = mean.len();
        let precision: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|j| match k.abs_diff(j) {
                        0 => diagonal,
                        1 => off_diagonal,
                        _ => 0.0,
                    })
                    .collect()
            })
            .collect();
        Self::new(mean, &precision)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn gradient(&self, k: usize, xi: &[f64]) -> f64 {
        self.diagonal[k] * (xi[k] - self.mean[k])
            + self.off[k]
                .iter()
                .map(|&(j, q)| q * (xi[j] - self.mean[j]))
                .sum::<f64>()
    }
}

impl ExactRates for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn rate(&self, k: usize, xi: &[f64], theta: &[f64]) -> RateSpec {
        let slope = self.diagonal[k] * theta[k] + self.off[k].iter().map(|&(j, q)| q * theta[j]).sum::<f64>();
        RateSpec::affine(theta[k] * self.gradient(k, xi), theta[k] * slope)
    }

    fn neighbours(&self, k: usize) -> &[usize] {
        &self.pattern[k]
    }
}

impl SubsampledRates for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn bound(&self, k: usize, xi: &[f64], theta: &[f64], _: &mut Vec<f64>) -> RateSpec {
        let m = self.off[k].len() as f64;
        let q = self.diagonal[k];
        let mut spec = RateSpec::affine(theta[k] * q * (xi[k] - self.mean[k]), theta[k] * theta[k] * q);
        if !self.off[k].is_empty() {
            let (mut a, mut b) = (0.0, 0.0);
            for &(j, qj) in &self.off[k] {
                a += qj.abs() * (xi[j] - self.mean[j]).abs();
                b += qj.abs() * theta[j].abs();
            }
            let scale = theta[k].abs() * m;
            spec.push(AffineRate {
                a: scale * a,
                b: scale * b,
            });
        }
        spec
    }

    fn bound_neighbours(&self, k: usize) -> &[usize] {
        &self.pattern[k]
    }

    fn draw_subsample(&self, _: usize, rng: &mut ChaCha8Rng, points: &mut Vec<f64>) {
        points.clear();
        points.push(rng.random());
    }

    fn estimate_support(&self, k: usize, points: &[f64], out: &mut Vec<usize>) {
        out.clear();
        out.push(k);
        if let Some(&(j, _)) = self.pick(k, points) {
            out.push(j);
        }
    }

    fn estimate(&self, k: usize, xi: &[f64], points: &[f64]) -> f64 {
        let diag = self.diagonal[k] * (xi[k] - self.mean[k]);
        match self.pick(k, points) {
            Some(&(j, q)) => diag + self.off[k].len() as f64 * q * (xi[j] - self.mean[j]),
            None => diag,
        }
    }
}

impl GaussianTarget {
    fn pick(&self, k: usize, points: &[f64]) -> Option<&(usize, f64)> {
        let m = self.off[k].len();
        if m == 0 {
            return None;
        }
        let idx = ((points[0] * m as f64) as usize).min(m - 1);
        self.off[k].get(idx)
    }
}
