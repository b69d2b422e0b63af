//! Sampling regions: finite unions of open belief intervals with grid endpoints.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{BeliefGrid, DEDUP_TOL};

/// Open set of beliefs at which sampling continues.
///
/// Stored as a mask over grid points: `mask[k]` is true when `x_k` lies inside the
/// region. Grid edges are never inside. Each maximal run `k0..=k1` of true entries is
/// the open interval `(x_{k0-1}, x_{k1+1})`.
#[derive(Clone)]
pub struct SamplingRegion {
    grid: Arc<BeliefGrid>,
    mask: Vec<bool>,
}

impl PartialEq for SamplingRegion {
    fn eq(&self, other: &Self) -> bool {
        self.mask == other.mask && (Arc::ptr_eq(&self.grid, &other.grid) || self.grid.points() == other.grid.points())
    }
}

impl fmt::Debug for SamplingRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.intervals()).finish()
    }
}

impl fmt::Display for SamplingRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let iv = self.intervals();
        if iv.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, (a, b)) in iv.iter().enumerate() {
            if i > 0 {
                write!(f, " u ")?;
            }
            write!(f, "({a:.6}, {b:.6})")?;
        }
        Ok(())
    }
}

impl SamplingRegion {
    pub fn empty(grid: Arc<BeliefGrid>) -> Self {
        let n = grid.len();
        Self { grid, mask: vec![false; n] }
    }

    /// The whole grid interior `(x_0, x_{n-1})`.
    pub fn full(grid: Arc<BeliefGrid>) -> Self {
        let n = grid.len();
        let mut mask = vec![true; n];
        mask[0] = false;
        mask[n - 1] = false;
        Self { grid, mask }
    }

    pub fn from_mask(grid: Arc<BeliefGrid>, mut mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        let n = mask.len();
        mask[0] = false;
        mask[n - 1] = false;
        Ok(Self { grid, mask })
    }

    /// Open interval `(x_lo, x_hi)` by grid index.
    pub fn interval_indices(grid: Arc<BeliefGrid>, lo: usize, hi: usize) -> Self {
        let mut r = Self::empty(grid);
        for k in lo + 1..hi {
            r.mask[k] = true;
        }
        r
    }

    /// Union of open intervals whose endpoints are grid points.
    pub fn from_intervals(grid: Arc<BeliefGrid>, intervals: &[(f64, f64)]) -> Result<Self> {
        let mut r = Self::empty(grid);
        for &(a, b) in intervals {
            let lo = r.grid.index_of(a).ok_or_else(|| Error::InvalidBelief(a, "interval endpoint is not a grid point".into()))?;
            let hi = r.grid.index_of(b).ok_or_else(|| Error::InvalidBelief(b, "interval endpoint is not a grid point".into()))?;
            if lo >= hi {
                return Err(Error::InvalidBelief(a, format!("interval ({a}, {b}) is empty")));
            }
            for k in lo + 1..hi {
                r.mask[k] = true;
            }
        }
        Ok(r)
    }

    pub fn grid(&self) -> &Arc<BeliefGrid> {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains_index(&self, k: usize) -> bool {
        self.mask[k]
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Membership of an arbitrary belief in the open set.
    pub fn contains(&self, p: f64) -> bool {
        let g = &self.grid;
        if p <= g.lo() || p >= g.hi() {
            return false;
        }
        if let Some(k) = g.index_of(p) {
            return self.mask[k];
        }
        // strictly between two grid points: inside iff both neighbours are inside or
        // one is inside and the other is the interval's closing endpoint
        let k = g.cell_of(p);
        self.mask[k] || self.mask[k + 1]
    }

    /// Maximal runs as `(lo_index, hi_index)` of their open-interval endpoints.
    pub fn interval_indices_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut k = 0;
        let n = self.mask.len();
        while k < n {
            if self.mask[k] {
                let start = k;
                while k < n && self.mask[k] {
                    k += 1;
                }
                out.push((start - 1, k));
            } else {
                k += 1;
            }
        }
        out
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.interval_indices_list().into_iter().map(|(a, b)| (self.grid.x(a), self.grid.x(b))).collect()
    }

    /// True when some interval has a grid edge as an endpoint.
    pub fn touches_edge(&self) -> bool {
        let n = self.mask.len();
        self.mask[1] || self.mask[n - 2]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.points() == other.grid.points() {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Ok(Self { grid: self.grid.clone(), mask })
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        Ok(Self { grid: self.grid.clone(), mask })
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }

    pub fn is_strict_subset(&self, other: &Self) -> bool {
        self.is_subset(other) && self.mask != other.mask
    }

    /// Comparable by inclusion in either direction.
    pub fn comparable(&self, other: &Self) -> bool {
        self.is_subset(other) || other.is_subset(self)
    }

    /// For every grid index, the indices of the nearest stopping points at or below and
    /// at or above it. Points outside the region map to themselves.
    pub fn bounds_table(&self) -> Vec<(usize, usize)> {
        let n = self.mask.len();
        let mut lo = vec![0; n];
        let mut hi = vec![0; n];
        let mut last = 0;
        for k in 0..n {
            if !self.mask[k] {
                last = k;
            }
            lo[k] = last;
        }
        let mut next = n - 1;
        for k in (0..n).rev() {
            if !self.mask[k] {
                next = k;
            }
            hi[k] = next;
        }
        lo.into_iter().zip(hi).collect()
    }

    /// Nearest stopping beliefs below and above `p`; `(p, p)` when `p` is outside.
    /// The flag reports that a bound is a grid edge.
    pub fn component_bounds(&self, p: f64) -> (f64, f64, bool) {
        if !self.contains(p) {
            return (p, p, false);
        }
        let g = &self.grid;
        let k = match g.index_of(p) {
            Some(k) => k,
            None => {
                let c = g.cell_of(p);
                if self.mask[c] {
                    c
                } else {
                    c + 1
                }
            }
        };
        let mut a = k;
        while self.mask[a] {
            a -= 1;
        }
        let mut b = k;
        while self.mask[b] {
            b += 1;
        }
        (g.x(a), g.x(b), a == 0 || b == g.len() - 1)
    }

    /// Region over another grid that shares the interval endpoints.
    pub fn transfer(&self, grid: Arc<BeliefGrid>) -> Result<Self> {
        let iv = self.intervals();
        for &(a, b) in &iv {
            if grid.index_of(a).is_none() || grid.index_of(b).is_none() {
                return Err(Error::GridMismatch);
            }
        }
        Self::from_intervals(grid, &iv)
    }
}

/// Tolerance helper shared with callers that compare endpoints.
pub fn same_belief(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEDUP_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<BeliefGrid> {
        Arc::new(BeliefGrid::uniform(0.1, 0.9, 9, &[]).unwrap())
    }

    #[test]
    fn intervals_round_trip() {
        let r = SamplingRegion::from_intervals(grid(), &[(0.2, 0.4), (0.4, 0.7)]).unwrap();
        let iv = r.intervals();
        assert_eq!(iv.len(), 2);
        assert!(same_belief(iv[0].0, 0.2) && same_belief(iv[0].1, 0.4));
        assert!(same_belief(iv[1].0, 0.4) && same_belief(iv[1].1, 0.7));
        assert!(!r.contains(0.4));
        assert!(r.contains(0.45));
        assert!(!r.contains(0.2));
        assert!(!r.contains(0.75));
    }

    #[test]
    fn bounds() {
        let g = Arc::new(BeliefGrid::uniform(0.1, 0.9, 81, &[]).unwrap());
        let r = SamplingRegion::from_intervals(g.clone(), &[(0.3, 0.7)]).unwrap();
        let (a, b, _) = r.component_bounds(0.5);
        assert!(same_belief(a, 0.3) && same_belief(b, 0.7));
        assert_eq!(r.component_bounds(0.2), (0.2, 0.2, false));
        let r2 = SamplingRegion::from_intervals(g, &[(0.3, 0.5), (0.5, 0.7)]).unwrap();
        let (a, b, _) = r2.component_bounds(0.6);
        assert!(same_belief(a, 0.5) && same_belief(b, 0.7));
    }

    #[test]
    fn set_algebra() {
        let g = Arc::new(BeliefGrid::uniform(0.1, 0.9, 81, &[]).unwrap());
        let a = SamplingRegion::from_intervals(g.clone(), &[(0.2, 0.6)]).unwrap();
        let b = SamplingRegion::from_intervals(g.clone(), &[(0.4, 0.8)]).unwrap();
        let i = a.intersection(&b).unwrap();
        let u = a.union(&b).unwrap();
        assert_eq!(i, SamplingRegion::from_intervals(g.clone(), &[(0.4, 0.6)]).unwrap());
        assert_eq!(u, SamplingRegion::from_intervals(g.clone(), &[(0.2, 0.8)]).unwrap());
        assert!(i.is_strict_subset(&a) && a.is_strict_subset(&u));
        assert!(!a.comparable(&b));
        assert!(SamplingRegion::full(g.clone()).touches_edge());
        assert!(!a.touches_edge());
    }
}
