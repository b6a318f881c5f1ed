//! Event records produced by the samplers, their CSV form, and
//! discretisation into a chain of coefficient vectors.
//!
//! Full-state skeletons hold one row per flip plus an initial row at clock 0
//! and a terminal row at the final clock. Reflection skeletons hold the
//! initial state and velocities plus `(index, time, value)` for each flip;
//! every other coordinate keeps moving linearly in the meantime.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Algorithm, RunStats};
use crate::error::{domain, Error, Result};

/// Positions of every coordinate at a sequence of clock times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FullStateRows {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
}

impl FullStateRows {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            times: Vec::new(),
            states: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, time: f64, state: &[f64]) {
        debug_assert_eq!(state.len(), self.dim);
        self.times.push(time);
        self.states.extend_from_slice(state);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.states[l * self.dim..(l + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times
            .iter()
            .copied()
            .zip(self.states.chunks_exact(self.dim.max(1)))
    }

    fn states_at(&self, queries: &[f64]) -> Vec<Vec<f64>> {
        let mut l = 0;
        queries
            .iter()
            .map(|&q| {
                while l + 2 < self.len() && self.times[l + 1] <= q {
                    l += 1;
                }
                if self.len() == 1 {
                    return self.row(0).to_vec();
                }
                let (t0, t1) = (self.times[l], self.times[l + 1]);
                let w = if t1 > t0 { (q - t0) / (t1 - t0) } else { 1.0 };
                self.row(l)
                    .iter()
                    .zip(self.row(l + 1))
                    .map(|(a, b)| a + (b - a) * w)
                    .collect()
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim).map(|k| format!("xi_{k}")))
            .collect();
        w.write_record(&header)?;
        for (t, row) in self.rows() {
            w.write_record(std::iter::once(t).chain(row.iter().copied()).map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the `t,xi_1,...,xi_d` format. Row numbers in errors count the
    /// header as row 1.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.get(0) != Some("t") || header.len() < 2 {
            return Err(Error::Parse {
                row: 1,
                message: "expected header t,xi_1,...".into(),
            });
        }
        let dim = header.len() - 1;
        let mut rows = Self::new(dim);
        let mut state = vec![0.0; dim];
        for (idx, record) in r.records().enumerate() {
            let row = idx + 2;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if record.len() != dim + 1 {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {} fields, found {}", dim + 1, record.len()),
                });
            }
            let t = parse_field(&record[0], row)?;
            for (k, s) in state.iter_mut().enumerate() {
                *s = parse_field(&record[k + 1], row)?;
            }
            if let Some(&prev) = rows.times.last() {
                if t < prev {
                    return Err(Error::Parse {
                        row,
                        message: format!("time {t} precedes previous row time {prev}"),
                    });
                }
            }
            rows.push(t, &state);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                row: 2,
                message: "skeleton has no rows".into(),
            });
        }
        Ok(rows)
    }
}

fn parse_field(field: &str, row: usize) -> Result<f64> {
    let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("invalid number {field:?}"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            row,
            message: format!("non-finite value {field:?}"),
        });
    }
    Ok(value)
}

/// One velocity flip of the fully local sampler. `index` is a storage slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub index: usize,
    pub time: f64,
    pub value: f64,
}

/// Initial state and velocities with the ordered flips.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReflectionLog {
    pub initial: Vec<f64>,
    pub velocities: Vec<f64>,
    pub events: Vec<Reflection>,
}

impl ReflectionLog {
    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    // Replays flips with the same arithmetic the sampler used, so positions
    // at flip times are reproduced bit for bit.
    fn states_at(&self, queries: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut anchor_t = vec![0.0; d];
        let mut anchor_x = self.initial.clone();
        let mut theta = self.velocities.clone();
        let mut next = 0;
        queries
            .iter()
            .map(|&q| {
                while next < self.events.len() && self.events[next].time <= q {
                    let e = self.events[next];
                    anchor_t[e.index] = e.time;
                    anchor_x[e.index] = e.value;
                    theta[e.index] = -theta[e.index];
                    next += 1;
                }
                (0..d)
                    .map(|j| anchor_x[j] + theta[j] * (q - anchor_t[j]))
                    .collect()
            })
            .collect()
    }

    /// Writes `event,index,time,value` rows. Event 0 lists the initial value
    /// of every coordinate, events `1..=K` are the flips and event `K + 1`
    /// lists every coordinate at `final_clock`, so that per-coordinate linear
    /// interpolation between listed knots recovers the trajectory. Indices
    /// are 1-based single indices.
    pub fn write_csv<W: Write>(&self, writer: W, final_clock: f64) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["event", "index", "time", "value"])?;
        for (j, x) in self.initial.iter().enumerate() {
            w.write_record(["0".into(), (j + 1).to_string(), "0".into(), x.to_string()])?;
        }
        for (l, e) in self.events.iter().enumerate() {
            w.write_record([
                (l + 1).to_string(),
                (e.index + 1).to_string(),
                e.time.to_string(),
                e.value.to_string(),
            ])?;
        }
        let terminal = (self.events.len() + 1).to_string();
        let last = self.states_at(&[final_clock]).pop().unwrap_or_default();
        for (j, x) in last.iter().enumerate() {
            w.write_record([
                terminal.clone(),
                (j + 1).to_string(),
                final_clock.to_string(),
                x.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format written by [`write_csv`](Self::write_csv). The
    /// initial velocities are not part of the CSV and must be supplied.
    pub fn read_csv<R: Read>(reader: R, velocities: Vec<f64>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["event", "index", "time", "value"] {
            return Err(Error::Parse {
                row: 1,
                message: "expected header event,index,time,value".into(),
            });
        }
        let d = velocities.len();
        let mut initial = vec![f64::NAN; d];
        let mut flips: Vec<(usize, Reflection)> = Vec::new();
        let mut rows = Vec::new();
        for (idx, record) in r.records().enumerate() {
            let row = idx + 2;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            if record.len() != 4 {
                return Err(Error::Parse {
                    row,
                    message: format!("expected 4 fields, found {}", record.len()),
                });
            }
            let event: usize = record[0].trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("invalid event number {:?}", &record[0]),
            })?;
            let index: usize = record[1].trim().parse().map_err(|_| Error::Parse {
                row,
                message: format!("invalid index {:?}", &record[1]),
            })?;
            if index == 0 || index > d {
                return Err(Error::Parse {
                    row,
                    message: format!("index {index} outside [1, {d}]"),
                });
            }
            let time = parse_field(&record[2], row)?;
            let value = parse_field(&record[3], row)?;
            rows.push((row, event, index - 1, time, value));
        }
        let last_event = rows.iter().map(|r| r.1).max().unwrap_or(0);
        for (row, event, index, time, value) in rows {
            if event == 0 {
                initial[index] = value;
            } else if event < last_event {
                flips.push((row, Reflection { index, time, value }));
            }
        }
        if let Some(j) = initial.iter().position(|x| x.is_nan()) {
            return Err(Error::Parse {
                row: 1,
                message: format!("missing initial value for index {}", j + 1),
            });
        }
        for pair in flips.windows(2) {
            if pair[1].1.time <= pair[0].1.time {
                return Err(Error::Parse {
                    row: pair[1].0,
                    message: "event times must be strictly increasing".into(),
                });
            }
        }
        Ok(Self {
            initial,
            velocities,
            events: flips.into_iter().map(|(_, e)| e).collect(),
        })
    }
}

/// Recorded events of one sampler run.
#[derive(Clone, Debug, PartialEq)]
pub enum Record {
    FullState(FullStateRows),
    Reflections(ReflectionLog),
}

/// Output of a sampler run.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    pub algorithm: Algorithm,
    pub final_clock: f64,
    pub stats: RunStats,
    pub record: Record,
    /// Full state at every flip, when requested from the fully local sampler.
    pub dense: Option<FullStateRows>,
}

impl Skeleton {
    pub fn dim(&self) -> usize {
        match &self.record {
            Record::FullState(rows) => rows.dim(),
            Record::Reflections(log) => log.dim(),
        }
    }

    /// Number of recorded flips.
    pub fn event_count(&self) -> usize {
        match &self.record {
            Record::FullState(rows) => rows.len().saturating_sub(2),
            Record::Reflections(log) => log.events.len(),
        }
    }

    /// State at each query time. Queries must be non-decreasing and lie in
    /// `[0, final_clock]`.
    pub fn states_at(&self, queries: &[f64]) -> Result<Vec<Vec<f64>>> {
        if queries.windows(2).any(|w| w[1] < w[0]) {
            return domain("query times must be non-decreasing");
        }
        if queries
            .iter()
            .any(|&q| !(0.0..=self.final_clock).contains(&q))
        {
            return domain(format!("query times must lie in [0, {}]", self.final_clock));
        }
        Ok(match &self.record {
            Record::FullState(rows) => {
                if rows.is_empty() {
                    return domain("skeleton is empty");
                }
                rows.states_at(queries)
            }
            Record::Reflections(log) => log.states_at(queries),
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        match &self.record {
            Record::FullState(rows) => rows.write_csv(writer),
            Record::Reflections(log) => log.write_csv(writer, self.final_clock),
        }
    }
}

/// Clock times `τ_burnin + mΔτ` for `m = 1, 2, ...` up to `final_clock`.
pub fn sample_times(final_clock: f64, burnin: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return domain(format!("sampling step must be positive, got {step}"));
    }
    if !(burnin.is_finite() && burnin >= 0.0) {
        return domain(format!("burn-in must be non-negative, got {burnin}"));
    }
    if burnin + step > final_clock {
        return domain(format!(
            "burn-in {burnin} plus step {step} exceeds final clock {final_clock}"
        ));
    }
    let count = ((final_clock - burnin) / step + 1e-9).floor() as usize;
    Ok((1..=count)
        .map(|m| (burnin + m as f64 * step).min(final_clock))
        .collect())
}

/// Chain of coefficient vectors read off the skeleton at
/// `τ_burnin + mΔτ`, `m = 1, 2, ...`.
pub fn discretize(skeleton: &Skeleton, burnin: f64, step: f64) -> Result<Vec<Vec<f64>>> {
    if skeleton.dim() == 0 {
        return domain("skeleton is empty");
    }
    if let Record::FullState(rows) = &skeleton.record {
        if rows.is_empty() {
            return domain("skeleton is empty");
        }
    }
    let times = sample_times(skeleton.final_clock, burnin, step)?;
    skeleton.states_at(&times)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_row_skeleton() -> Skeleton {
        let mut rows = FullStateRows::new(1);
        rows.push(0.0, &[0.0]);
        rows.push(2.0, &[2.0]);
        Skeleton {
            algorithm: Algorithm::Standard,
            final_clock: 2.0,
            stats: RunStats::default(),
            record: Record::FullState(rows),
            dense: None,
        }
    }

    #[test]
    fn interpolates_between_rows() {
        let s = two_row_skeleton();
        assert_eq!(discretize(&s, 0.0, 1.0).unwrap(), vec![vec![1.0], vec![2.0]]);
        assert_eq!(s.states_at(&[0.5]).unwrap(), vec![vec![0.5]]);
        assert!(discretize(&s, 0.0, 3.0).is_err());
        assert!(discretize(&s, 0.0, 0.0).is_err());
        assert!(s.states_at(&[2.5]).is_err());
    }

    #[test]
    fn empty_skeleton_is_an_error() {
        let s = Skeleton {
            record: Record::FullState(FullStateRows::new(1)),
            ..two_row_skeleton()
        };
        assert!(discretize(&s, 0.0, 1.0).is_err());
    }

    #[test]
    fn sample_time_grid() {
        assert_eq!(sample_times(10.0, 2.0, 2.0).unwrap(), vec![4.0, 6.0, 8.0, 10.0]);
        assert_eq!(sample_times(1.0, 0.0, 0.1).unwrap().len(), 10);
    }

    #[test]
    fn reflections_replay_linear_motion() {
        let log = ReflectionLog {
            initial: vec![0.0, 1.0],
            velocities: vec![1.0, -1.0],
            events: vec![
                Reflection { index: 0, time: 1.0, value: 1.0 },
                Reflection { index: 1, time: 2.0, value: -1.0 },
            ],
        };
        let s = Skeleton {
            algorithm: Algorithm::FullyLocal,
            final_clock: 4.0,
            stats: RunStats::default(),
            record: Record::Reflections(log),
            dense: None,
        };
        let states = s.states_at(&[0.5, 1.5, 3.0, 4.0]).unwrap();
        assert_eq!(states, vec![vec![0.5, 0.5], vec![0.5, -0.5], vec![-1.0, 0.0], vec![-2.0, 1.0]]);
    }

    #[test]
    fn full_state_csv_round_trip() {
        let mut rows = FullStateRows::new(2);
        rows.push(0.0, &[0.1, -0.2]);
        rows.push(0.7, &[1.0 / 3.0, 2e-17]);
        let mut buf = Vec::new();
        rows.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,xi_1,xi_2\n"));
        assert_eq!(FullStateRows::read_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn corrupt_csv_names_the_row() {
        let text = "t,xi_1\n0,1\n0.5,abc\n";
        match FullStateRows::read_csv(text.as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "t,xi_1\n0,1\n0.5\n";
        assert!(matches!(FullStateRows::read_csv(text.as_bytes()), Err(Error::Parse { row: 3, .. })));
        assert!(FullStateRows::read_csv("x,y\n".as_bytes()).is_err());
    }

    #[test]
    fn reflection_csv_round_trip() {
        let log = ReflectionLog {
            initial: vec![0.25, -1.5],
            velocities: vec![1.0, -0.5],
            events: vec![
                Reflection { index: 1, time: 0.3, value: -1.65 },
                Reflection { index: 0, time: 0.9, value: 1.15 },
            ],
        };
        let mut buf = Vec::new();
        log.write_csv(&mut buf, 2.0).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("event,index,time,value\n0,1,0,0.25\n"));
        assert!(text.contains("\n3,1,2,"));
        let back = ReflectionLog::read_csv(buf.as_slice(), log.velocities.clone()).unwrap();
        assert_eq!(back, log);
    }
}
