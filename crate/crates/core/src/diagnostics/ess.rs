//! Effective sample size by non-overlapping batch means.

use serde::Serialize;

use crate::error::{domain, Error, Result};

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// `b · s² / var(batch means)` over `b` batches of `⌊n/b⌋` samples, with the
/// trailing remainder dropped. Infinite when the batch means coincide.
pub fn ess_batch_means(chain: &[f64], batches: usize) -> Result<f64> {
    if batches < 2 {
        return domain(format!("at least two batches are required, got {batches}"));
    }
    let size = chain.len() / batches;
    if size < 2 {
        return domain(format!(
            "chain of length {} is too short for {batches} batches",
            chain.len()
        ));
    }
    if chain.iter().any(|x| !x.is_finite()) {
        return domain("chain contains non-finite values");
    }
    let used = &chain[..size * batches];
    let (_, var) = mean_var(used);
    if var == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let means: Vec<f64> = used
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let (_, var_means) = mean_var(&means);
    if var_means == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(batches as f64 * var / var_means)
}

/// Default batch count `⌊√n⌋`.
pub fn default_batches(n: usize) -> usize {
    (n as f64).sqrt().floor() as usize
}

/// Per-coordinate ESS with summaries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssReport {
    pub per_coordinate: Vec<f64>,
    /// Coordinates whose estimate exceeded the sample count and was clamped.
    pub clamped: Vec<bool>,
    pub samples: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub wall_time_secs: f64,
    pub mean_per_sec: f64,
    pub median_per_sec: f64,
    pub min_per_sec: f64,
}

impl EssReport {
    /// Builds the report from a chain of state vectors, one batch-means ESS
    /// per coordinate with `⌊√n⌋` batches.
    pub fn from_chain(chain: &[Vec<f64>], wall_time_secs: f64) -> Result<Self> {
        let n = chain.len();
        let d = chain.first().map_or(0, Vec::len);
        if d == 0 {
            return domain("chain is empty");
        }
        let batches = default_batches(n);
        let mut per_coordinate = Vec::with_capacity(d);
        let mut clamped = Vec::with_capacity(d);
        let mut column = Vec::with_capacity(n);
        for k in 0..d {
            column.clear();
            column.extend(chain.iter().map(|x| x[k]));
            let ess = ess_batch_means(&column, batches)?;
            clamped.push(ess > n as f64);
            per_coordinate.push(ess.min(n as f64));
        }
        let mut sorted = per_coordinate.clone();
        sorted.sort_by(f64::total_cmp);
        let median = if d % 2 == 1 {
            sorted[d / 2]
        } else {
            0.5 * (sorted[d / 2 - 1] + sorted[d / 2])
        };
        let mean = sorted.iter().sum::<f64>() / d as f64;
        let min = sorted[0];
        let rate = |x: f64| if wall_time_secs > 0.0 { x / wall_time_secs } else { f64::NAN };
        Ok(Self {
            per_coordinate,
            clamped,
            samples: n,
            mean,
            median,
            min,
            wall_time_secs,
            mean_per_sec: rate(mean),
            median_per_sec: rate(median),
            min_per_sec: rate(min),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn iid_chain_has_full_ess() {
        let n = 10_000;
        let mut within = 0;
        for seed in 0..50 {
            let ess = ess_batch_means(&normals(n, seed), 100).unwrap();
            if (0.8 * n as f64..=1.2 * n as f64).contains(&ess) {
                within += 1;
            }
        }
        // batch-means with 100 batches has relative sd about 0.14
        assert!(within >= 40, "{within}");
    }

    #[test]
    fn ar1_chain_matches_integrated_autocorrelation() {
        let n = 100_000;
        let rho = 0.5;
        let z = normals(n, 7);
        let mut x = vec![0.0; n];
        for i in 1..n {
            x[i] = rho * x[i - 1] + z[i];
        }
        let ess = ess_batch_means(&x, default_batches(n)).unwrap();
        let expected = (1.0 - rho) / (1.0 + rho);
        assert!((ess / n as f64 / expected - 1.0).abs() < 0.25, "{}", ess / n as f64);
    }

    #[test]
    fn remainder_is_dropped() {
        let chain: Vec<f64> = (0..99).map(|i| ((i * 37) % 11) as f64).collect();
        let a = ess_batch_means(&chain, 10).unwrap();
        let b = ess_batch_means(&chain[..90], 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(ess_batch_means(&[1.0; 100], 10), Err(Error::ZeroVariance)));
        assert!(ess_batch_means(&[1.0, 2.0, 3.0], 10).is_err());
        assert!(ess_batch_means(&normals(100, 1), 1).is_err());
    }

    #[test]
    fn report_summaries() {
        let chain: Vec<Vec<f64>> = normals(4000, 3).chunks(2).map(|c| c.to_vec()).collect();
        let r = EssReport::from_chain(&chain, 2.0).unwrap();
        assert_eq!(r.per_coordinate.len(), 2);
        assert!(r.min <= r.median && r.median <= r.per_coordinate.iter().cloned().fold(0.0, f64::max));
        assert!(r.per_coordinate.iter().all(|&e| e > 0.0 && e <= 2000.0));
        assert_eq!(r.mean_per_sec, r.mean / 2.0);
        assert!(EssReport::from_chain(&[], 1.0).is_err());
    }

    proptest! {
        #[test]
        fn affine_invariance(a in -5.0f64..5.0, b in -10.0f64..10.0, seed in 0u64..1000) {
            let x = normals(500, seed);
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            if a.abs() > 1e-3 {
                let ex = ess_batch_means(&x, 22).unwrap();
                let ey = ess_batch_means(&y, 22).unwrap();
                prop_assert!((ex - ey).abs() <= 1e-9 * ex);
            }
        }
    }
}
