//! Per-coordinate anchors for lazily advanced positions.
//!
//! Coordinate `j` sits at `anchor_x[j] + θ_j (τ - anchor_t[j])` at clock `τ`.
//! Anchors move only when `j` flips, so positions are always computed from
//! the last flip with the same arithmetic.

pub(super) struct LazyState {
    anchor_t: Vec<f64>,
    anchor_x: Vec<f64>,
    pub(super) theta: Vec<f64>,
    /// Scratch positions; only entries written by `materialize` are current.
    pub(super) pos: Vec<f64>,
}

impl LazyState {
    pub(super) fn new(xi0: &[f64], theta0: &[f64]) -> Self {
        Self {
            anchor_t: vec![0.0; xi0.len()],
            anchor_x: xi0.to_vec(),
            theta: theta0.to_vec(),
            pos: xi0.to_vec(),
        }
    }

    pub(super) fn position(&self, j: usize, clock: f64) -> f64 {
        self.anchor_x[j] + self.theta[j] * (clock - self.anchor_t[j])
    }

    pub(super) fn materialize(&mut self, slots: &[usize], clock: f64) {
        for &j in slots {
            self.pos[j] = self.position(j, clock);
        }
    }

    pub(super) fn materialize_all(&mut self, clock: f64) {
        for j in 0..self.pos.len() {
            self.pos[j] = self.position(j, clock);
        }
    }

    /// Flips `j` at `clock` and returns its position there.
    pub(super) fn flip(&mut self, j: usize, clock: f64) -> f64 {
        let x = self.position(j, clock);
        self.anchor_t[j] = clock;
        self.anchor_x[j] = x;
        self.pos[j] = x;
        self.theta[j] = -self.theta[j];
        x
    }
}
