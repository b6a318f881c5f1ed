//! Standard Zig-Zag: all clocks redrawn after every flip.

use super::skeleton::{FullStateRows, Record, Skeleton};
use super::{check_inputs, Algorithm, ExactRates, RunOptions, RunRng, RunStats};
use crate::error::Result;

pub fn zigzag_standard<P: ExactRates + ?Sized>(
    provider: &P,
    opts: &RunOptions,
    xi0: &[f64],
    theta0: &[f64],
    rng: &mut RunRng,
) -> Result<Skeleton> {
    let d = provider.dim();
    check_inputs(d, xi0, theta0, opts)?;
    let mut xi = xi0.to_vec();
    let mut theta = theta0.to_vec();
    let mut rows = FullStateRows::new(d);
    let mut stats = RunStats::default();
    let mut clock = 0.0;
    rows.push(clock, &xi);
    loop {
        let mut best = (f64::INFINITY, usize::MAX);
        for k in 0..d {
            let (tau, _) = provider.rate(k, &xi, &theta).first_event(&mut rng.clocks)?;
            if tau < best.0 {
                best = (tau, k);
            }
        }
        let (tau, flip) = best;
        if !tau.is_finite() {
            stats.exhausted = true;
            break;
        }
        if clock + tau > opts.final_clock {
            break;
        }
        for (x, t) in xi.iter_mut().zip(&theta) {
            *x += t * tau;
        }
        clock += tau;
        theta[flip] = -theta[flip];
        stats.proposals += 1;
        stats.flips += 1;
        rows.push(clock, &xi);
    }
    let remaining = opts.final_clock - clock;
    for (x, t) in xi.iter_mut().zip(&theta) {
        *x += t * remaining;
    }
    rows.push(opts.final_clock, &xi);
    Ok(Skeleton {
        algorithm: Algorithm::Standard,
        final_clock: opts.final_clock,
        stats,
        record: Record::FullState(rows),
        dense: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::discretize;
    use crate::samplers::test_support::{mean_and_var, IndependentGaussian};

    #[test]
    fn one_dimensional_gaussian_moments() {
        let target = IndependentGaussian::new(vec![0.0], vec![1.0]);
        let mut rng = RunRng::new(2024);
        let skel = zigzag_standard(&target, &RunOptions::new(5000.0), &[0.0], &[1.0], &mut rng).unwrap();
        let chain = discretize(&skel, 10.0, 0.5).unwrap();
        let (m, v) = mean_and_var(chain.iter().map(|x| x[0]));
        assert!(m.abs() < 0.05, "{m}");
        assert!((0.9..=1.1).contains(&v), "{v}");
    }

    #[test]
    fn each_event_flips_exactly_one_velocity() {
        let target = IndependentGaussian::new(vec![0.0, 2.0, -1.0], vec![1.0, 1.0, 0.3]);
        let theta0 = [1.0, -0.5, 2.0];
        let mut rng = RunRng::new(5);
        let skel = zigzag_standard(&target, &RunOptions::new(50.0), &[0.0; 3], &theta0, &mut rng).unwrap();
        let Record::FullState(rows) = &skel.record else { panic!("expected full-state rows") };
        let times = rows.times();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        let velocity = |l: usize| -> Vec<f64> {
            let dt = times[l + 1] - times[l];
            (0..3).map(|k| (rows.row(l + 1)[k] - rows.row(l)[k]) / dt).collect()
        };
        let mut theta = theta0.to_vec();
        for l in 0..rows.len() - 1 {
            let v = velocity(l);
            let flipped: Vec<usize> = (0..3).filter(|&k| (v[k] - theta[k]).abs() > 1e-6).collect();
            if l == 0 {
                assert!(flipped.is_empty());
            } else {
                assert_eq!(flipped.len(), 1);
                assert!((v[flipped[0]] + theta[flipped[0]]).abs() < 1e-6);
                theta[flipped[0]] = -theta[flipped[0]];
            }
        }
        assert_eq!(skel.stats.flips as usize, skel.event_count());
    }
}
