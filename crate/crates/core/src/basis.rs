//! Truncated Faber-Schauder basis on `[0, T]`.
//!
//! A path is represented as
//!
//! ```text
//! X(t) = (1 - t/T) u + (t/√T)(v/√T) + Σ_k ξ_k φ_k(t)
//! ```
//!
//! where `φ_{i,j}` is the hat function supported on `[jT2^{-i}, (j+1)T2^{-i}]`
//! with peak `2^{-i/2}√T/2`. Fixing the coefficient of `t/√T` to `v/√T` pins
//! the path at `X(T) = v`, so only the `M = 2^{N+1} - 1` hat coefficients are
//! free.
//!
//! Coefficients are stored by single index `n = 2^i + j` in slot `n - 1`.
//! The parent of `n` is `n / 2`, so ancestor walks and subtree ranges are
//! plain integer arithmetic.

use crate::error::{domain, Result};

/// Largest truncation level accepted by [`BasisContext::new`].
pub const MAX_LEVELS: u32 = 24;

/// Level/position pair `(i, j)` addressing a basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicIndex {
    level: u32,
    position: u32,
}

impl DyadicIndex {
    pub fn new(level: u32, position: u32) -> Result<Self> {
        if level > MAX_LEVELS {
            return domain(format!("level {level} exceeds maximum {MAX_LEVELS}"));
        }
        if u64::from(position) >= 1u64 << level {
            return domain(format!("position {position} out of range for level {level}"));
        }
        Ok(Self { level, position })
    }

    /// Single index `n ≥ 1` to `(⌊log₂ n⌋, n - 2^⌊log₂ n⌋)`.
    pub fn from_single(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("single index must be at least 1");
        }
        let level = usize::BITS - 1 - n.leading_zeros();
        if level > MAX_LEVELS {
            return domain(format!("single index {n} exceeds maximum level {MAX_LEVELS}"));
        }
        Ok(Self {
            level,
            position: (n - (1usize << level)) as u32,
        })
    }

    /// Storage slot `n - 1`.
    pub fn from_slot(slot: usize) -> Self {
        let n = slot + 1;
        let level = usize::BITS - 1 - n.leading_zeros();
        Self {
            level,
            position: (n - (1usize << level)) as u32,
        }
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn position(self) -> u32 {
        self.position
    }

    pub fn single(self) -> usize {
        (1usize << self.level) + self.position as usize
    }

    pub fn slot(self) -> usize {
        self.single() - 1
    }
}

/// Converts a single index to its `(level, position)` pair, checking `n ≤ m`.
pub fn index_to_pair(n: usize, m: usize) -> Result<DyadicIndex> {
    if n == 0 || n > m {
        return domain(format!("single index {n} outside [1, {m}]"));
    }
    DyadicIndex::from_single(n)
}

/// Converts `(level, position)` to the single index `2^level + position`.
pub fn pair_to_index(level: u32, position: u32) -> Result<usize> {
    DyadicIndex::new(level, position).map(DyadicIndex::single)
}

fn level_of_slot(slot: usize) -> u32 {
    usize::BITS - 1 - (slot + 1).leading_zeros()
}

/// Ancestor/descendant structure of the coefficients.
///
/// `a ≪ b` (a is an ancestor of b) iff the support of `b` is contained in the
/// support of `a`. The neighbourhood `N_k` is every ancestor and descendant of
/// `k`, including `k` itself; two coefficients are adjacent iff their supports
/// have overlapping interiors. Neighbour lists are stored in CSR form, sorted
/// by slot.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    levels: u32,
    offsets: Vec<usize>,
    members: Vec<usize>,
}

impl DependencyGraph {
    pub fn new(levels: u32) -> Self {
        let dim = (1usize << (levels + 1)) - 1;
        let mut offsets = Vec::with_capacity(dim + 1);
        let mut members = Vec::new();
        offsets.push(0);
        for slot in 0..dim {
            let start = members.len();
            // proper ancestors, root first
            let mut n = slot.div_ceil(2);
            while n >= 1 {
                members.push(n - 1);
                n /= 2;
            }
            members[start..].reverse();
            members.extend(descendant_slots(levels, slot));
            offsets.push(members.len());
        }
        Self {
            levels,
            offsets,
            members,
        }
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `N_k`: ancestors and descendants of `slot`, itself included.
    pub fn neighbours(&self, slot: usize) -> &[usize] {
        &self.members[self.offsets[slot]..self.offsets[slot + 1]]
    }

    pub(crate) fn neighbour_range(&self, slot: usize) -> std::ops::Range<usize> {
        self.offsets[slot]..self.offsets[slot + 1]
    }

    /// Ancestors of `slot` including itself, from `slot` up to the root.
    pub fn ancestors(&self, slot: usize) -> impl Iterator<Item = usize> {
        std::iter::successors(Some(slot + 1), |&n| (n > 1).then_some(n / 2)).map(|n| n - 1)
    }

    /// Descendants of `slot` including itself, level by level.
    pub fn descendants(&self, slot: usize) -> impl Iterator<Item = usize> {
        descendant_slots(self.levels, slot)
    }

    /// `a ≪ b`: the support of `b` is contained in the support of `a`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let (la, lb) = (level_of_slot(a), level_of_slot(b));
        lb >= la && ((b + 1) >> (lb - la)) == a + 1
    }

    pub fn common_ancestors(&self, a: usize, b: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .ancestors(a)
            .filter(|&x| self.is_ancestor(x, b))
            .collect();
        out.reverse();
        out
    }

    /// Closed-form `|N_{i,j}| = 2^{N-i+1} + i - 1`.
    pub fn neighbourhood_size(levels: u32, level: u32) -> usize {
        (1usize << (levels - level + 1)) + level as usize - 1
    }
}

fn descendant_slots(levels: u32, slot: usize) -> impl Iterator<Item = usize> {
    let n = slot + 1;
    let level = level_of_slot(slot);
    (0..=(levels - level)).flat_map(move |depth| {
        let first = n << depth;
        (first..first + (1usize << depth)).map(|m| m - 1)
    })
}

/// Exact integrals of products of basis functions for one coefficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapSummary {
    /// `∫ φ_k dt`.
    pub integral: f64,
    /// `∫ (t/√T) φ_k dt`, the weight of the pinned end term `v/√T`.
    pub end_weight: f64,
    /// `∫ (1 - t/T) φ_k dt`, the weight of the start value `u`.
    pub start_weight: f64,
}

/// Truncation level, horizon and endpoints with cached overlap integrals and
/// dependency graph. Immutable after construction.
#[derive(Clone, Debug)]
pub struct BasisContext {
    levels: u32,
    horizon: f64,
    start: f64,
    end: f64,
    sqrt_horizon: f64,
    graph: DependencyGraph,
    summaries: Vec<OverlapSummary>,
    // Φ_{jk}, aligned with the graph's CSR members
    products: Vec<f64>,
}

impl BasisContext {
    pub fn new(levels: u32, horizon: f64, start: f64, end: f64) -> Result<Self> {
        if levels > MAX_LEVELS {
            return domain(format!("truncation level {levels} exceeds {MAX_LEVELS}"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        if !(start.is_finite() && end.is_finite()) {
            return domain("bridge endpoints must be finite");
        }
        let graph = DependencyGraph::new(levels);
        let mut ctx = Self {
            levels,
            horizon,
            start,
            end,
            sqrt_horizon: horizon.sqrt(),
            graph,
            summaries: Vec::new(),
            products: Vec::new(),
        };
        ctx.summaries = (0..ctx.dim()).map(|k| ctx.compute_summary(k)).collect();
        ctx.products = (0..ctx.dim())
            .flat_map(|k| {
                let ctx = &ctx;
                ctx.graph
                    .neighbours(k)
                    .iter()
                    .map(move |&j| ctx.compute_product(j, k))
            })
            .collect();
        Ok(ctx)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Number of free coefficients `M = 2^{N+1} - 1`.
    pub fn dim(&self) -> usize {
        (1usize << (self.levels + 1)) - 1
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn index(&self, n: usize) -> Result<DyadicIndex> {
        index_to_pair(n, self.dim())
    }

    /// Number of dyadic grid points, `2^{N+1} + 1`.
    pub fn grid_len(&self) -> usize {
        (1usize << (self.levels + 1)) + 1
    }

    pub fn grid_step(&self) -> f64 {
        self.horizon / (1u64 << (self.levels + 1)) as f64
    }

    pub fn grid_times(&self) -> Vec<f64> {
        let cells = self.grid_len() - 1;
        (0..=cells)
            .map(|m| self.horizon * m as f64 / cells as f64)
            .collect()
    }

    pub fn support_len(&self, level: u32) -> f64 {
        self.horizon / (1u64 << level) as f64
    }

    /// `max_s φ_{i,j}(s) = 2^{-i/2} √T / 2`.
    pub fn peak(&self, level: u32) -> f64 {
        0.5 * self.sqrt_horizon * (0.5f64).powf(0.5 * f64::from(level))
    }

    pub fn support(&self, k: DyadicIndex) -> (f64, f64) {
        let width = self.support_len(k.level());
        let lo = width * f64::from(k.position());
        let hi = if k.position() + 1 == 1 << k.level() {
            self.horizon
        } else {
            width * f64::from(k.position() + 1)
        };
        (lo, hi)
    }

    pub fn slot_support(&self, slot: usize) -> (f64, f64) {
        self.support(DyadicIndex::from_slot(slot))
    }

    /// Evaluates `φ_k(t)`; `t` must lie in `[0, T]`.
    pub fn phi(&self, k: DyadicIndex, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.phi_at(k, t))
    }

    pub(crate) fn phi_at(&self, k: DyadicIndex, t: f64) -> f64 {
        let width = self.support_len(k.level());
        let x = t / width - f64::from(k.position());
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        2.0 * self.peak(k.level()) * x.min(1.0 - x)
    }

    pub(crate) fn phi_slot(&self, slot: usize, t: f64) -> f64 {
        self.phi_at(DyadicIndex::from_slot(slot), t)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return domain(format!("time {t} outside [0, {}]", self.horizon));
        }
        Ok(())
    }

    /// Pinned linear part `(1 - t/T) u + (t/T) v`.
    pub fn mean_path(&self, t: f64) -> f64 {
        let s = t / self.horizon;
        (1.0 - s) * self.start + s * self.end
    }

    /// Evaluates the truncated expansion at `t`.
    pub fn expand(&self, xi: &[f64], t: f64) -> Result<f64> {
        self.check_coefficients(xi)?;
        self.check_time(t)?;
        Ok(self.expand_at(xi, t))
    }

    /// Expansion at `t` touching only the `N + 1` functions whose support
    /// contains `t`.
    pub(crate) fn expand_at(&self, xi: &[f64], t: f64) -> f64 {
        let mut x = self.mean_path(t);
        for level in 0..=self.levels {
            let slot = self.cell_slot(level, t);
            x += xi[slot] * self.phi_slot(slot, t);
        }
        x
    }

    /// Slot of the level-`level` function whose support contains `t`.
    pub(crate) fn cell_slot(&self, level: u32, t: f64) -> usize {
        let cells = 1usize << level;
        let j = ((t / self.horizon) * cells as f64).floor();
        let j = (j.max(0.0) as usize).min(cells - 1);
        cells + j - 1
    }

    /// Slots of the functions whose support contains `t`, root first.
    pub fn path_slots(&self, t: f64, out: &mut Vec<usize>) {
        out.clear();
        out.extend((0..=self.levels).map(|level| self.cell_slot(level, t)));
    }

    fn check_coefficients(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim() {
            return domain(format!(
                "coefficient vector has length {}, expected {}",
                xi.len(),
                self.dim()
            ));
        }
        Ok(())
    }

    /// Path values on the dyadic grid `t_m = mT/2^{N+1}`, in `O(M)`.
    pub fn expand_grid(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_coefficients(xi)?;
        let mut grid = vec![0.0; self.grid_len()];
        self.fill_grid(xi, &mut grid);
        Ok(grid)
    }

    pub(crate) fn fill_grid(&self, xi: &[f64], grid: &mut [f64]) {
        let last = grid.len() - 1;
        grid[0] = 0.0;
        grid[last] = 0.0;
        for level in 0..=self.levels {
            let half = last >> (level + 1);
            let peak = self.peak(level);
            let first = (1usize << level) - 1;
            for j in 0..(1usize << level) {
                let lo = 2 * j * half;
                let mid = lo + half;
                grid[mid] = 0.5 * (grid[lo] + grid[lo + 2 * half]) + peak * xi[first + j];
            }
        }
        let cells = last as f64;
        for (m, g) in grid.iter_mut().enumerate() {
            let s = m as f64 / cells;
            *g += (1.0 - s) * self.start + s * self.end;
        }
    }

    /// Values of `Σ_{i ∈ N_k} φ_i c_i` (plus the pinned linear part when
    /// `include_mean`) at the `2^{N+1-level}+1` dyadic breakpoints of the
    /// support of `slot`. Only entries of `coeffs` in `N_k` are read.
    pub fn local_grid(&self, slot: usize, coeffs: &[f64], include_mean: bool, out: &mut Vec<f64>) {
        let k = DyadicIndex::from_slot(slot);
        let depth_max = self.levels - k.level();
        let len = (1usize << (depth_max + 1)) + 1;
        out.clear();
        out.resize(len, 0.0);
        let (lo, hi) = self.support(k);
        let (mut left, mut right) = if include_mean {
            (self.mean_path(lo), self.mean_path(hi))
        } else {
            (0.0, 0.0)
        };
        let mut n = slot.div_ceil(2);
        while n >= 1 {
            let a = DyadicIndex::from_slot(n - 1);
            left += coeffs[n - 1] * self.phi_at(a, lo);
            right += coeffs[n - 1] * self.phi_at(a, hi);
            n /= 2;
        }
        out[0] = left;
        out[len - 1] = right;
        let root = slot + 1;
        for depth in 0..=depth_max {
            let half = (len - 1) >> (depth + 1);
            let peak = self.peak(k.level() + depth);
            let first = root << depth;
            for q in 0..(1usize << depth) {
                let lo_idx = 2 * q * half;
                out[lo_idx + half] =
                    0.5 * (out[lo_idx] + out[lo_idx + 2 * half]) + peak * coeffs[first + q - 1];
            }
        }
    }

    /// Minimum and maximum over the support of `slot` of the function built
    /// by [`local_grid`](Self::local_grid). The function is piecewise linear
    /// with breakpoints on that grid, so these are exact.
    pub fn local_extrema(
        &self,
        slot: usize,
        coeffs: &[f64],
        include_mean: bool,
        scratch: &mut Vec<f64>,
    ) -> (f64, f64) {
        self.local_grid(slot, coeffs, include_mean, scratch);
        scratch
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            })
    }

    pub fn overlaps(&self, slot: usize) -> OverlapSummary {
        self.summaries[slot]
    }

    /// `Φ_{jk} = ∫ φ_j φ_k dt` for every `j ∈ N_k`, aligned with
    /// `graph().neighbours(slot)`.
    pub fn products(&self, slot: usize) -> &[f64] {
        &self.products[self.graph.neighbour_range(slot)]
    }

    /// `Φ_{jk}` for an arbitrary pair; zero when the supports have disjoint
    /// interiors.
    pub fn product(&self, j: usize, k: usize) -> f64 {
        match self.graph.neighbours(k).binary_search(&j) {
            Ok(pos) => self.products(k)[pos],
            Err(_) => 0.0,
        }
    }

    fn compute_summary(&self, slot: usize) -> OverlapSummary {
        let k = DyadicIndex::from_slot(slot);
        let (lo, hi) = self.support(k);
        let sqrt_t = self.sqrt_horizon;
        let horizon = self.horizon;
        OverlapSummary {
            integral: 0.5 * (hi - lo) * self.peak(k.level()),
            end_weight: simpson_halves(lo, hi, |t| (t / sqrt_t) * self.phi_at(k, t)),
            start_weight: simpson_halves(lo, hi, |t| (1.0 - t / horizon) * self.phi_at(k, t)),
        }
    }

    fn compute_product(&self, j: usize, k: usize) -> f64 {
        let (a, b) = (DyadicIndex::from_slot(j), DyadicIndex::from_slot(k));
        let finer = if a.level() >= b.level() { a } else { b };
        let (lo, hi) = self.support(finer);
        // the coarser function is linear on the finer support
        simpson_halves(lo, hi, |t| self.phi_at(a, t) * self.phi_at(b, t))
    }
}

/// Simpson's rule on `[lo, mid]` and `[mid, hi]`; exact for integrands that
/// are quadratic on each half.
fn simpson_halves(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let simpson = |a: f64, b: f64| (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    simpson(lo, mid) + simpson(mid, hi)
}
