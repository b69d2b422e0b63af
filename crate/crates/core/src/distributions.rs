//! Discrete posterior distributions and the convex-order feasibility predicates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::SamplingRegion;

const MASS_TOL: f64 = 1e-12;
const ORDER_TOL: f64 = 1e-10;

/// Finitely supported distribution of posterior beliefs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDistribution {
    atoms: Vec<(f64, f64)>,
}

impl PosteriorDistribution {
    /// Sorts atoms, merges equal beliefs and checks that the masses sum to one.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        for &(p, w) in &atoms {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidDistribution(format!("belief {p} outside [0, 1]")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidDistribution(format!("non-positive mass {w}")));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (p, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += w,
                _ => merged.push((p, w)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn degenerate(p: f64) -> Result<Self> {
        Self::new(vec![(p, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(p, w)| p * w).sum()
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(p, w)| w * f(p)).sum()
    }

    /// `E[(x - X)^+]`, the integrated CDF at `x`.
    pub fn integrated_cdf(&self, x: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.0 <= x).map(|&(p, w)| w * (x - p)).sum()
    }
}

/// Bayes-plausible policy supported on a lower and an upper belief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryPolicy {
    pub lower: f64,
    pub upper: f64,
    pub prior: f64,
    pub w_low: f64,
    pub w_high: f64,
}

impl BinaryPolicy {
    pub fn is_degenerate(&self) -> bool {
        self.lower == self.upper
    }

    pub fn mean(&self) -> f64 {
        self.w_low * self.lower + self.w_high * self.upper
    }

    pub fn distribution(&self) -> PosteriorDistribution {
        let atoms = if self.is_degenerate() {
            vec![(self.prior, 1.0)]
        } else {
            vec![(self.lower, self.w_low), (self.upper, self.w_high)]
        };
        let atoms = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
        PosteriorDistribution::new(atoms).expect("binary weights are valid by construction")
    }
}

pub fn binary_from_bounds(p_low: f64, p_high: f64, prior: f64) -> Result<BinaryPolicy> {
    if !(p_low <= prior && prior <= p_high) {
        return Err(Error::InvalidDistribution(format!("prior {prior} outside [{p_low}, {p_high}]")));
    }
    if !(0.0..=1.0).contains(&p_low) || !(0.0..=1.0).contains(&p_high) {
        return Err(Error::InvalidDistribution("bounds must lie in [0, 1]".into()));
    }
    if p_low == p_high {
        return Ok(BinaryPolicy { lower: prior, upper: prior, prior, w_low: 1.0, w_high: 0.0 });
    }
    let w_low = (p_high - prior) / (p_high - p_low);
    Ok(BinaryPolicy { lower: p_low, upper: p_high, prior, w_low, w_high: 1.0 - w_low })
}

/// True iff `f` is a mean-preserving contraction of `g`.
pub fn is_mpc(f: &PosteriorDistribution, g: &PosteriorDistribution) -> bool {
    if (f.mean() - g.mean()).abs() > ORDER_TOL {
        return false;
    }
    f.atoms
        .iter()
        .chain(&g.atoms)
        .all(|&(x, _)| f.integrated_cdf(x) <= g.integrated_cdf(x) + ORDER_TOL)
}

/// True iff `f` is a mean-preserving spread of `g` with no atom inside `region`.
pub fn is_mps_supported(f: &PosteriorDistribution, g: &PosteriorDistribution, region: &SamplingRegion) -> bool {
    is_mpc(g, f) && f.atoms.iter().all(|&(p, _)| !region.contains(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BeliefGrid;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn dist(a: &[(f64, f64)]) -> PosteriorDistribution {
        PosteriorDistribution::new(a.to_vec()).unwrap()
    }

    #[test]
    fn binary_weights() {
        let b = binary_from_bounds(0.2, 0.8, 0.5).unwrap();
        assert!((b.w_low - 0.5).abs() < 1e-15 && (b.w_high - 0.5).abs() < 1e-15);
        let d = binary_from_bounds(0.5, 0.5, 0.5).unwrap();
        assert!(d.is_degenerate());
        assert_eq!(d.distribution().atoms(), &[(0.5, 1.0)]);
        let b = binary_from_bounds(0.2, 0.8, 0.6).unwrap();
        assert!((b.w_low - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.mean() - 0.6).abs() < 1e-14);
        assert!(binary_from_bounds(0.3, 0.8, 0.2).is_err());
    }

    #[test]
    fn mpc_examples() {
        let g = dist(&[(0.25, 0.5), (0.75, 0.5)]);
        let f = dist(&[(0.0, 0.5), (1.0, 0.5)]);
        assert!(is_mpc(&dist(&[(0.5, 1.0)]), &g));
        assert!(is_mpc(&g, &g));
        assert!(!is_mpc(&f, &g));
        assert!(is_mpc(&g, &f));
    }

    #[test]
    fn mps_support() {
        let grid = Arc::new(BeliefGrid::uniform(0.01, 0.99, 99, &[]).unwrap());
        let region = SamplingRegion::from_intervals(grid, &[(0.3, 0.7)]).unwrap();
        let g = dist(&[(0.5, 1.0)]);
        assert!(is_mps_supported(&dist(&[(0.01, 0.5), (0.99, 0.5)]), &g, &region));
        assert!(!is_mps_supported(&dist(&[(0.4, 0.5), (0.6, 0.5)]), &g, &region));
        let boundary = dist(&[(0.3, 0.5), (0.7, 0.5)]);
        assert!(is_mps_supported(&boundary, &boundary, &region));
    }

    fn equal_mean_dist(seed: Vec<(f64, f64)>, mean: f64) -> Option<PosteriorDistribution> {
        // shift atoms so the mean matches, then clip
        let total: f64 = seed.iter().map(|a| a.1).sum();
        let atoms: Vec<(f64, f64)> = seed.iter().map(|&(p, w)| (p, w / total)).collect();
        let m: f64 = atoms.iter().map(|(p, w)| p * w).sum();
        let shifted: Vec<(f64, f64)> = atoms.iter().map(|&(p, w)| (p - m + mean, w)).collect();
        if shifted.iter().any(|a| !(0.0..=1.0).contains(&a.0)) {
            return None;
        }
        PosteriorDistribution::new(shifted).ok()
    }

    proptest! {
        #[test]
        fn mpc_is_a_preorder(
            a in prop::collection::vec((0.3f64..0.7, 0.1f64..1.0), 1..5),
            b in prop::collection::vec((0.2f64..0.8, 0.1f64..1.0), 1..5),
            c in prop::collection::vec((0.1f64..0.9, 0.1f64..1.0), 1..5),
        ) {
            let (Some(f), Some(g), Some(h)) =
                (equal_mean_dist(a, 0.5), equal_mean_dist(b, 0.5), equal_mean_dist(c, 0.5)) else {
                return Ok(());
            };
            prop_assert!(is_mpc(&f, &f));
            if is_mpc(&f, &g) && is_mpc(&g, &h) {
                prop_assert!(is_mpc(&f, &h));
            }
        }

        #[test]
        fn binary_mean_reproduces_prior(lo in 0.0f64..0.5, hi in 0.5f64..1.0, t in 0.0f64..1.0) {
            let prior = lo + t * (hi - lo);
            let b = binary_from_bounds(lo, hi, prior).unwrap();
            prop_assert!((b.mean() - prior).abs() <= 1e-14);
        }
    }
}
