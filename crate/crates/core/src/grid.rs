//! Belief grids, piecewise-linear payoff specifications and tabulated grid functions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_N: usize = 512;
pub const DEFAULT_DELTA: f64 = 1e-4;
pub const MIN_POINTS: usize = 16;
pub const MAX_DELTA: f64 = 1e-2;
/// Points closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// Offset of the auxiliary left-limit point below a jump.
pub const AUX_EPS: f64 = 1e-9;

/// Which one-sided value to read at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Strictly increasing set of beliefs on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefGrid {
    points: Vec<f64>,
    delta: f64,
    h: f64,
    pinned: Vec<f64>,
    // (index of auxiliary point, breakpoint it is the left limit of)
    aux: Vec<(usize, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Origin {
    Pinned,
    Aux,
    Uniform,
}

/// Build the default clipped grid on `[delta, 1 - delta]`.
pub fn build_grid(n: usize, delta: f64, pinned: &[f64]) -> Result<BeliefGrid> {
    BeliefGrid::build(n, delta, pinned, &[])
}

impl BeliefGrid {
    /// Clipped grid with extra pinned beliefs and jump locations. Every jump is pinned
    /// and receives an auxiliary point `AUX_EPS` below it carrying the left limit.
    pub fn build(n: usize, delta: f64, pinned: &[f64], jumps: &[f64]) -> Result<Self> {
        if n < MIN_POINTS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_POINTS} points, got {n}")));
        }
        if !(delta > 0.0 && delta <= MAX_DELTA) {
            return Err(Error::InvalidGrid(format!("clip margin must lie in (0, {MAX_DELTA}], got {delta}")));
        }
        let mut grid = Self::construct(delta, 1.0 - delta, n, pinned, jumps)?;
        grid.delta = delta;
        Ok(grid)
    }

    /// Uniform grid on an arbitrary sub-interval of (0, 1) without the size and margin
    /// restrictions of [`BeliefGrid::build`]. Intended for small test grids.
    pub fn uniform(lo: f64, hi: f64, n: usize, pinned: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid("need at least 2 points".into()));
        }
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::InvalidGrid(format!("need 0 < lo < hi < 1, got [{lo}, {hi}]")));
        }
        Self::construct(lo, hi, n, pinned, &[])
    }

    fn construct(lo: f64, hi: f64, n: usize, pinned: &[f64], jumps: &[f64]) -> Result<Self> {
        let mut cand: Vec<(f64, Origin)> = Vec::with_capacity(n + pinned.len() + 2 * jumps.len());
        let h = (hi - lo) / (n - 1) as f64;
        for k in 0..n {
            let x = if k == n - 1 { hi } else { lo + k as f64 * h };
            cand.push((x, Origin::Uniform));
        }
        let mut pins: Vec<f64> = Vec::new();
        for &p in pinned.iter().chain(jumps) {
            if !(p > lo && p < hi) {
                return Err(Error::PinnedOutOfRange(p, lo, hi));
            }
            cand.push((p, Origin::Pinned));
            pins.push(p);
        }
        let mut aux_of = Vec::new();
        for &b in jumps {
            let a = b - AUX_EPS;
            if a > lo {
                cand.push((a, Origin::Aux));
                aux_of.push((a, b));
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut points: Vec<f64> = Vec::with_capacity(cand.len());
        let mut origins: Vec<Origin> = Vec::with_capacity(cand.len());
        for (x, o) in cand {
            match points.last() {
                Some(&last) if x - last <= DEDUP_TOL => {
                    let k = points.len() - 1;
                    if o < origins[k] {
                        points[k] = x;
                        origins[k] = o;
                    }
                }
                _ => {
                    points.push(x);
                    origins.push(o);
                }
            }
        }
        // the edges stay exact even when a pinned value merged into them
        *points.first_mut().unwrap() = lo;
        *points.last_mut().unwrap() = hi;

        let mut aux = Vec::new();
        for (k, o) in origins.iter().enumerate() {
            if *o == Origin::Aux {
                let x = points[k];
                if let Some(&(_, b)) = aux_of.iter().find(|(a, _)| (a - x).abs() <= DEDUP_TOL) {
                    aux.push((k, b));
                }
            }
        }
        pins.sort_by(f64::total_cmp);
        pins.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
        Ok(Self { points, delta: lo, h, pinned: pins, aux })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Nominal spacing of the uniform part.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn pinned(&self) -> &[f64] {
        &self.pinned
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn x(&self, k: usize) -> f64 {
        self.points[k]
    }

    /// Index of a grid point equal to `p` within the dedup tolerance.
    pub fn index_of(&self, p: f64) -> Option<usize> {
        let k = self.nearest_index(p);
        ((self.points[k] - p).abs() <= DEDUP_TOL).then_some(k)
    }

    pub fn nearest_index(&self, p: f64) -> usize {
        let k = self.points.partition_point(|&x| x < p);
        if k == 0 {
            0
        } else if k == self.points.len() {
            k - 1
        } else if (self.points[k] - p) < (p - self.points[k - 1]) {
            k
        } else {
            k - 1
        }
    }

    /// Cell index `k` with `x_k <= p < x_{k+1}`, clamped to the grid.
    pub fn cell_of(&self, p: f64) -> usize {
        let k = self.points.partition_point(|&x| x <= p);
        k.saturating_sub(1).min(self.points.len() - 2)
    }

    /// The breakpoint whose left limit is carried by point `k`, if `k` is auxiliary.
    pub fn aux_breakpoint(&self, k: usize) -> Option<f64> {
        self.aux.iter().find(|(i, _)| *i == k).map(|&(_, b)| b)
    }

    pub fn aux_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.aux.iter().map(|&(k, _)| k)
    }

    pub fn is_aux(&self, k: usize) -> bool {
        self.aux.iter().any(|&(i, _)| i == k)
    }
}

/// Piecewise-linear function with optional jumps at breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearSpec {
    breakpoints: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PiecewiseLinearSpec {
    pub fn new(breakpoints: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != left.len() || breakpoints.len() != right.len() {
            return Err(Error::InvalidParameter("breakpoint and value lists must be non-empty and equally long".into()));
        }
        if breakpoints.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::InvalidParameter("breakpoints must lie in [0, 1]".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("breakpoints must be strictly increasing".into()));
        }
        if left.iter().chain(&right).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("breakpoint values must be finite".into()));
        }
        Ok(Self { breakpoints, left, right })
    }

    /// Continuous function through the given `(belief, value)` points.
    pub fn continuous(points: &[(f64, f64)]) -> Result<Self> {
        let b = points.iter().map(|p| p.0).collect();
        let v: Vec<f64> = points.iter().map(|p| p.1).collect();
        Self::new(b, v.clone(), v)
    }

    pub fn constant(c: f64) -> Self {
        Self { breakpoints: vec![0.0, 1.0], left: vec![c, c], right: vec![c, c] }
    }

    /// `1 - p` below `w_piv` and `p * v` from `w_piv` on.
    pub fn committee(v: f64, w_piv: f64) -> Result<Self> {
        if !(w_piv > 0.0 && w_piv < 1.0) {
            return Err(Error::InvalidBelief(w_piv, "pivotal threshold must lie in (0, 1)".into()));
        }
        Self::new(vec![0.0, w_piv, 1.0], vec![1.0, 1.0 - w_piv, v], vec![1.0, w_piv * v, v])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn left_values(&self) -> &[f64] {
        &self.left
    }

    pub fn right_values(&self) -> &[f64] {
        &self.right
    }

    /// Interior breakpoints with unequal one-sided values.
    pub fn jumps(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .zip(self.left.iter().zip(&self.right))
            .filter(|(b, (l, r))| **b > 0.0 && **b < 1.0 && l != r)
            .map(|(b, _)| *b)
            .collect()
    }

    pub fn eval(&self, p: f64, side: Side) -> f64 {
        let bp = &self.breakpoints;
        let last = bp.len() - 1;
        if p < bp[0] {
            return self.left[0];
        }
        if p > bp[last] {
            return self.right[last];
        }
        let k = bp.partition_point(|&b| b < p);
        if k <= last && bp[k] == p {
            return match side {
                Side::Left => self.left[k],
                Side::Right => self.right[k],
            };
        }
        let (a, b) = (bp[k - 1], bp[k]);
        let (ya, yb) = (self.right[k - 1], self.left[k]);
        ya + (yb - ya) * (p - a) / (b - a)
    }

    /// `a * f + b * g` on the merged breakpoint set.
    pub fn combine(a: f64, f: &Self, b: f64, g: &Self) -> Self {
        let mut bp: Vec<f64> = f.breakpoints.iter().chain(&g.breakpoints).copied().collect();
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        let left = bp.iter().map(|&x| a * f.eval(x, Side::Left) + b * g.eval(x, Side::Left)).collect();
        let right = bp.iter().map(|&x| a * f.eval(x, Side::Right) + b * g.eval(x, Side::Right)).collect();
        Self { breakpoints: bp, left, right }
    }

    pub fn min_value(&self) -> f64 {
        self.left.iter().chain(&self.right).copied().fold(f64::INFINITY, f64::min)
    }
}

/// Real values tabulated on a shared grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<BeliefGrid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<BeliefGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<BeliefGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self { grid, values }
    }

    /// Right values at grid points, left limits at auxiliary points.
    pub fn sample(grid: Arc<BeliefGrid>, spec: &PiecewiseLinearSpec) -> Self {
        let values = (0..grid.len())
            .map(|k| match grid.aux_breakpoint(k) {
                Some(b) => spec.eval(b, Side::Left),
                None => spec.eval(grid.x(k), Side::Right),
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<BeliefGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid.points() == other.grid.points()
    }

    /// Linear interpolation between grid points, constant outside.
    pub fn interpolate(&self, p: f64) -> f64 {
        let g = &self.grid;
        if p <= g.lo() {
            return self.values[0];
        }
        if p >= g.hi() {
            return self.values[self.values.len() - 1];
        }
        let k = g.cell_of(p);
        let (a, b) = (g.x(k), g.x(k + 1));
        self.values[k] + (self.values[k + 1] - self.values[k]) * (p - a) / (b - a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spacing() {
        let g = BeliefGrid::uniform(0.1, 0.9, 5, &[]).unwrap();
        let want = [0.1, 0.3, 0.5, 0.7, 0.9];
        for (a, b) in g.points().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pinned_point_appears_once() {
        let g = BeliefGrid::uniform(0.1, 0.9, 5, &[0.5]).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.points().iter().filter(|&&x| x == 0.5).count(), 1);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_grid(16, 0.0, &[]).is_err());
        assert!(build_grid(15, 1e-4, &[]).is_err());
        assert!(build_grid(16, 0.02, &[]).is_err());
        assert!(matches!(build_grid(64, 1e-4, &[0.99995]), Err(Error::PinnedOutOfRange(..))));
    }

    #[test]
    fn default_grid_edges_and_pins() {
        let g = build_grid(DEFAULT_N, DEFAULT_DELTA, &[0.3141]).unwrap();
        assert_eq!(g.lo(), 1e-4);
        assert_eq!(g.hi(), 1.0 - 1e-4);
        assert!(g.index_of(0.3141).is_some());
        assert!(g.points().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g, build_grid(DEFAULT_N, DEFAULT_DELTA, &[0.3141]).unwrap());
    }

    #[test]
    fn jumps_get_aux_points() {
        let g = BeliefGrid::build(32, 1e-3, &[], &[0.4]).unwrap();
        let k = g.index_of(0.4).unwrap();
        assert!(g.is_aux(k - 1));
        assert_eq!(g.aux_breakpoint(k - 1), Some(0.4));
        assert!((g.x(k) - g.x(k - 1) - AUX_EPS).abs() < 1e-15);
    }

    #[test]
    fn pwl_eval() {
        let f = PiecewiseLinearSpec::continuous(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(f.eval(0.5, Side::Right), 0.5);
        let c = PiecewiseLinearSpec::committee(2.0, 0.5).unwrap();
        assert_eq!(c.eval(0.5, Side::Left), 0.5);
        assert_eq!(c.eval(0.5, Side::Right), 1.0);
        assert_eq!(c.jumps(), vec![0.5]);
        let c1 = PiecewiseLinearSpec::committee(1.0, 0.5).unwrap();
        assert_eq!(c1.eval(0.5, Side::Left), c1.eval(0.5, Side::Right));
        assert!(c1.jumps().is_empty());
        assert!((c.eval(0.25, Side::Right) - 0.75).abs() < 1e-15);
        assert!((c.eval(0.75, Side::Right) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sampling_reads_right_values_and_left_limits() {
        let c = PiecewiseLinearSpec::committee(2.0, 0.5).unwrap();
        let g = Arc::new(BeliefGrid::build(32, 1e-3, &[], &[0.5]).unwrap());
        let f = GridFunction::sample(g.clone(), &c);
        let k = g.index_of(0.5).unwrap();
        assert_eq!(f.value(k), 1.0);
        assert_eq!(f.value(k - 1), 0.5);
        for (j, &x) in g.points().iter().enumerate() {
            if j != k - 1 {
                assert!((f.value(j) - c.eval(x, Side::Right)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn combine_is_exact() {
        let f = PiecewiseLinearSpec::continuous(&[(0.0, 0.0), (0.4, 1.0), (1.0, 0.0)]).unwrap();
        let g = PiecewiseLinearSpec::committee(1.5, 0.6).unwrap();
        let h = PiecewiseLinearSpec::combine(1.0, &f, -0.5, &g);
        for k in 0..=100 {
            let p = k as f64 / 100.0;
            for side in [Side::Left, Side::Right] {
                let want = f.eval(p, side) - 0.5 * g.eval(p, side);
                assert!((h.eval(p, side) - want).abs() < 1e-12);
            }
        }
    }
}
