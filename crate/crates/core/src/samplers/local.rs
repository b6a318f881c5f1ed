//! Local Zig-Zag: after a flip only the clocks of the flipped coordinate's
//! neighbourhood are redrawn; every other proposed time stays valid.

use super::lazy::LazyState;
use super::queue::EventQueue;
use super::skeleton::{FullStateRows, Record, Skeleton};
use super::{check_inputs, Algorithm, ExactRates, RunOptions, RunRng, RunStats};
use crate::error::Result;

pub fn zigzag_local<P: ExactRates + ?Sized>(
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
    let mut rows = FullStateRows::new(d);
    let mut stats = RunStats::default();
    rows.push(0.0, xi0);

    let mut redraw = |k: usize, clock: f64, state: &mut LazyState, queue: &mut EventQueue| -> Result<()> {
        state.materialize(provider.neighbours(k), clock);
        let (tau, _) = provider
            .rate(k, &state.pos, &state.theta)
            .first_event(&mut rng.clocks)?;
        queue.schedule(k, clock + tau);
        Ok(())
    };

    for k in 0..d {
        redraw(k, 0.0, &mut state, &mut queue)?;
    }
    loop {
        let Some((clock, flip)) = queue.pop() else {
            stats.exhausted = true;
            break;
        };
        if clock > opts.final_clock {
            break;
        }
        state.flip(flip, clock);
        stats.proposals += 1;
        stats.flips += 1;
        state.materialize_all(clock);
        rows.push(clock, &state.pos);
        for &j in provider.neighbours(flip) {
            redraw(j, clock, &mut state, &mut queue)?;
        }
    }
    state.materialize_all(opts.final_clock);
    rows.push(opts.final_clock, &state.pos);
    Ok(Skeleton {
        algorithm: Algorithm::Local,
        final_clock: opts.final_clock,
        stats,
        record: Record::FullState(rows),
        dense: None,
    })
}
