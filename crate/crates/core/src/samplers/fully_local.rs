//! Fully local Zig-Zag: subsampled thinning with per-coordinate clocks.
//!
//! Each coordinate keeps the bound it was scheduled with and the clock at
//! which that bound was computed. A popped proposal advances only the
//! coordinates the estimate reads; an accepted flip reschedules the
//! coordinates whose bounds depend on the flipped velocity. The output is the
//! list of reflections, optionally with the full state at every flip.

use rand::Rng;

use super::lazy::LazyState;
use super::queue::EventQueue;
use super::skeleton::{FullStateRows, Record, Reflection, ReflectionLog, Skeleton};
use super::{check_domination, check_inputs, Algorithm, RunOptions, RunRng, RunStats, SubsampledRates};
use crate::error::Result;
use crate::poisson::RateSpec;

pub fn zigzag_fully_local<P: SubsampledRates + ?Sized>(
    provider: &P,
    opts: &RunOptions,
    xi0: &[f64],
    theta0: &[f64],
    rng: &mut RunRng,
) -> Result<Skeleton> {
    let d = provider.dim();
    check_inputs(d, xi0, theta0, opts)?;
    let mut state = LazyState::new(xi0, theta0);
    let mut queue = EventQueue::new(d);
    let mut bounds = vec![RateSpec::new(); d];
    let mut drawn_at = vec![0.0; d];
    let mut scratch = Vec::new();
    let mut points = Vec::new();
    let mut support = Vec::new();
    let mut events = Vec::new();
    let mut dense = opts.record_dense.then(|| {
        let mut rows = FullStateRows::new(d);
        rows.push(0.0, xi0);
        rows
    });
    let mut stats = RunStats::default();

    let mut redraw = |k: usize, clock: f64, state: &mut LazyState, queue: &mut EventQueue,
                      bounds: &mut [RateSpec], drawn_at: &mut [f64], scratch: &mut Vec<f64>|
     -> Result<()> {
        state.materialize(provider.bound_neighbours(k), clock);
        bounds[k] = provider.bound(k, &state.pos, &state.theta, scratch);
        drawn_at[k] = clock;
        let (tau, _) = bounds[k].first_event(&mut rng.clocks)?;
        queue.schedule(k, clock + tau);
        Ok(())
    };

    for k in 0..d {
        redraw(k, 0.0, &mut state, &mut queue, &mut bounds, &mut drawn_at, &mut scratch)?;
    }
    loop {
        let Some((clock, k)) = queue.pop() else {
            stats.exhausted = true;
            break;
        };
        if clock > opts.final_clock {
            break;
        }
        stats.proposals += 1;
        provider.draw_subsample(k, &mut rng.subsample, &mut points);
        provider.estimate_support(k, &points, &mut support);
        state.materialize(&support, clock);
        state.materialize(&[k], clock);
        let estimate = (state.theta[k] * provider.estimate(k, &state.pos, &points)).max(0.0);
        let bound = bounds[k].eval(clock - drawn_at[k]);
        check_domination(k, clock, estimate, bound)?;
        let v: f64 = rng.thinning.random();
        if v * bound < estimate {
            let value = state.flip(k, clock);
            stats.flips += 1;
            events.push(Reflection { index: k, time: clock, value });
            if let Some(rows) = dense.as_mut() {
                state.materialize_all(clock);
                rows.push(clock, &state.pos);
            }
            for &j in provider.bound_neighbours(k) {
                if j != k {
                    redraw(j, clock, &mut state, &mut queue, &mut bounds, &mut drawn_at, &mut scratch)?;
                }
            }
        }
        redraw(k, clock, &mut state, &mut queue, &mut bounds, &mut drawn_at, &mut scratch)?;
    }
    if let Some(rows) = dense.as_mut() {
        state.materialize_all(opts.final_clock);
        rows.push(opts.final_clock, &state.pos);
    }
    Ok(Skeleton {
        algorithm: Algorithm::FullyLocal,
        final_clock: opts.final_clock,
        stats,
        record: Record::Reflections(ReflectionLog {
            initial: xi0.to_vec(),
            velocities: theta0.to_vec(),
            events,
        }),
        dense,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::discretize;
    use crate::samplers::test_support::{mean_and_var, IndependentGaussian};

    #[test]
    fn thinned_gaussian_moments() {
        let target = IndependentGaussian::new(vec![0.5, -1.0], vec![1.0, 0.5]);
        let mut rng = RunRng::new(12);
        let skel =
            zigzag_fully_local(&target, &RunOptions::new(10_000.0), &[0.0, 0.0], &[1.0, 1.0], &mut rng).unwrap();
        let chain = discretize(&skel, 10.0, 0.5).unwrap();
        let (m0, v0) = mean_and_var(chain.iter().map(|x| x[0]));
        let (m1, v1) = mean_and_var(chain.iter().map(|x| x[1]));
        assert!((m0 - 0.5).abs() < 0.05, "{m0}");
        assert!((0.9..=1.1).contains(&v0), "{v0}");
        assert!((m1 + 1.0).abs() < 0.03, "{m1}");
        assert!((v1 / 0.25 - 1.0).abs() < 0.1, "{v1}");
    }

    #[test]
    fn replay_matches_dense_record_exactly() {
        let target = IndependentGaussian::new(vec![0.5, -1.0, 2.0], vec![1.0, 0.5, 3.0]);
        let mut opts = RunOptions::new(300.0);
        opts.record_dense = true;
        let skel = zigzag_fully_local(&target, &opts, &[0.0; 3], &[1.0, -2.0, 0.5], &mut RunRng::new(3)).unwrap();
        let dense = skel.dense.as_ref().unwrap();
        let replay = skel.states_at(dense.times()).unwrap();
        for (l, row) in replay.iter().enumerate() {
            assert_eq!(row.as_slice(), dense.row(l));
        }
        let mut plain_opts = opts.clone();
        plain_opts.record_dense = false;
        let plain = zigzag_fully_local(&target, &plain_opts, &[0.0; 3], &[1.0, -2.0, 0.5], &mut RunRng::new(3)).unwrap();
        assert_eq!(plain.record, skel.record);
    }
}
