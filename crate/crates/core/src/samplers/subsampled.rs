//! Zig-Zag with subsampling: events are proposed from dominating bounds and
//! accepted with probability `λ̃ / λ̄`, where `λ̃` is built from an unbiased
//! gradient estimate at the proposed time.

use rand::Rng;

use super::skeleton::{FullStateRows, Record, Skeleton};
use super::{check_domination, check_inputs, Algorithm, RunOptions, RunRng, RunStats, SubsampledRates};
use crate::error::Result;
use crate::poisson::RateSpec;

pub fn zigzag_subsampled<P: SubsampledRates + ?Sized>(
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
    let mut scratch = Vec::new();
    let mut points = Vec::new();
    let mut bounds = vec![RateSpec::new(); d];
    let mut drawn_at = vec![0.0; d];
    let mut proposed = vec![f64::INFINITY; d];
    let mut clock = 0.0;
    rows.push(clock, &xi);

    let mut redraw = |k: usize, clock: f64, xi: &[f64], theta: &[f64], bounds: &mut [RateSpec],
                      drawn_at: &mut [f64], proposed: &mut [f64], scratch: &mut Vec<f64>|
     -> Result<()> {
        bounds[k] = provider.bound(k, xi, theta, scratch);
        drawn_at[k] = clock;
        proposed[k] = clock + bounds[k].first_event(&mut rng.clocks)?.0;
        Ok(())
    };

    for k in 0..d {
        redraw(k, clock, &xi, &theta, &mut bounds, &mut drawn_at, &mut proposed, &mut scratch)?;
    }
    loop {
        let (next, k) = proposed
            .iter()
            .enumerate()
            .fold((f64::INFINITY, usize::MAX), |best, (j, &t)| if t < best.0 { (t, j) } else { best });
        if !next.is_finite() {
            stats.exhausted = true;
            break;
        }
        if next > opts.final_clock {
            break;
        }
        for (x, t) in xi.iter_mut().zip(&theta) {
            *x += t * (next - clock);
        }
        clock = next;
        stats.proposals += 1;

        provider.draw_subsample(k, &mut rng.subsample, &mut points);
        let estimate = (theta[k] * provider.estimate(k, &xi, &points)).max(0.0);
        let bound = bounds[k].eval(clock - drawn_at[k]);
        check_domination(k, clock, estimate, bound)?;
        let v: f64 = rng.thinning.random();
        if v * bound < estimate {
            theta[k] = -theta[k];
            stats.flips += 1;
            rows.push(clock, &xi);
            for j in 0..d {
                redraw(j, clock, &xi, &theta, &mut bounds, &mut drawn_at, &mut proposed, &mut scratch)?;
            }
        } else {
            redraw(k, clock, &xi, &theta, &mut bounds, &mut drawn_at, &mut proposed, &mut scratch)?;
        }
    }
    let remaining = opts.final_clock - clock;
    for (x, t) in xi.iter_mut().zip(&theta) {
        *x += t * remaining;
    }
    rows.push(opts.final_clock, &xi);
    Ok(Skeleton {
        algorithm: Algorithm::Subsampled,
        final_clock: opts.final_clock,
        stats,
        record: Record::FullState(rows),
        dense: None,
    })
}
