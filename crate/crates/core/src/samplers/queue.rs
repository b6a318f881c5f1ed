//! Min-priority queue of proposed event times with lazy invalidation.
//!
//! Rescheduling a coordinate bumps its version; superseded heap entries are
//! discarded when popped. Ties pop the lowest coordinate first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug)]
struct Entry {
    time: f64,
    index: usize,
    version: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed so that BinaryHeap pops the earliest time, then lowest index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.index.cmp(&self.index))
            .then_with(|| other.version.cmp(&self.version))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Entry>,
    versions: Vec<u64>,
    times: Vec<f64>,
}

impl EventQueue {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            heap: BinaryHeap::with_capacity(2 * len),
            versions: vec![0; len],
            times: vec![f64::INFINITY; len],
        }
    }

    /// Replaces the proposed time of `index`. Infinite times are not queued.
    pub(crate) fn schedule(&mut self, index: usize, time: f64) {
        self.versions[index] += 1;
        self.times[index] = time;
        if time.is_finite() {
            self.heap.push(Entry {
                time,
                index,
                version: self.versions[index],
            });
        }
        if self.heap.len() > 4 * self.versions.len() + 64 {
            self.compact();
        }
    }

    /// Earliest live entry, removed from the queue.
    pub(crate) fn pop(&mut self) -> Option<(f64, usize)> {
        while let Some(entry) = self.heap.pop() {
            if entry.version == self.versions[entry.index] {
                self.times[entry.index] = f64::INFINITY;
                return Some((entry.time, entry.index));
            }
        }
        None
    }

    fn compact(&mut self) {
        let versions = &self.versions;
        self.heap = self
            .times
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_finite())
            .map(|(index, &time)| Entry {
                time,
                index,
                version: versions[index],
            })
            .collect();
    }
}
