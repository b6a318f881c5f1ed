//! Kolmogorov-Smirnov statistics and normal QQ data.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};

fn sorted(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return domain("sample is empty");
    }
    if sample.iter().any(|x| x.is_nan()) {
        return domain("sample contains NaN");
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// `sup_x |F_n(x) - F(x)|` against a continuous reference CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let s = sorted(sample)?;
    let n = s.len() as f64;
    Ok(s.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}

/// `sup_x |F_a(x) - F_b(x)|` between two empirical distributions.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sorted sample against standard-normal quantiles at `(k - ½)/n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QqData {
    /// `(normal quantile, empirical quantile)` pairs.
    pub pairs: Vec<(f64, f64)>,
    /// Pearson correlation of the pairs.
    pub correlation: f64,
}

pub fn qq_data(chain: &[f64]) -> Result<QqData> {
    if chain.len() < 2 {
        return domain("QQ data needs at least two points");
    }
    let s = sorted(chain)?;
    let n = s.len() as f64;
    let normal = Normal::standard();
    let pairs: Vec<(f64, f64)> = s
        .iter()
        .enumerate()
        .map(|(k, &x)| (normal.inverse_cdf((k as f64 + 0.5) / n), x))
        .collect();
    let correlation = pearson(&pairs)?;
    Ok(QqData { pairs, correlation })
}

fn pearson(pairs: &[(f64, f64)]) -> Result<f64> {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{StandardNormal, StudentT};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn ks_extremes() {
        let a = normals(500, 1);
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|x| x + 100.0).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap(), 1.0);
        assert!(ks_two_sample(&[], &a).is_err());
        assert!(ks_one_sample(&[], |x| x).is_err());
    }

    #[test]
    fn ks_one_sample_normal() {
        let normal = Normal::standard();
        let mut below = 0;
        for seed in 0..20 {
            let d = ks_one_sample(&normals(10_000, seed), |x| normal.cdf(x)).unwrap();
            if d < 0.02 {
                below += 1;
            }
        }
        assert!(below >= 19, "{below}");
    }

    #[test]
    fn ks_two_sample_brute_force() {
        let a = normals(300, 2);
        let b: Vec<f64> = normals(200, 3).iter().map(|x| 0.3 + x).collect();
        let mut grid: Vec<f64> = a.iter().chain(&b).copied().collect();
        grid.sort_by(f64::total_cmp);
        let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&y| y <= x).count() as f64 / s.len() as f64;
        let brute = grid.iter().map(|&x| (ecdf(&a, x) - ecdf(&b, x)).abs()).fold(0.0, f64::max);
        assert!((ks_two_sample(&a, &b).unwrap() - brute).abs() < 1e-15);
    }

    #[test]
    fn ks_two_sample_handles_ties() {
        assert_eq!(ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn ks_two_sample_is_symmetric() {
        for seed in 0..20 {
            let a = normals(100 + seed as usize, seed);
            let b = normals(150, seed + 100);
            assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
        }
    }

    #[test]
    fn qq_of_exact_quantiles_is_linear() {
        let n = 1000;
        let normal = Normal::standard();
        let q: Vec<f64> = (0..n).map(|k| normal.inverse_cdf((k as f64 + 0.5) / n as f64)).collect();
        let data = qq_data(&q).unwrap();
        assert!((data.correlation - 1.0).abs() < 1e-6);
        assert_eq!(data.pairs.len(), n);
        assert!(matches!(qq_data(&[1.0; 10]), Err(Error::ZeroVariance)));
    }

    #[test]
    fn qq_detects_heavy_tails() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = StudentT::new(2.0).unwrap();
        let sample: Vec<f64> = (0..10_000).map(|_| rng.sample(t)).collect();
        assert!(qq_data(&sample).unwrap().correlation < 0.99);
        assert!(qq_data(&normals(10_000, 6)).unwrap().correlation > 0.999);
    }
}
