//! Upper concave closures on grid scopes, with masked (excluded) points.

use crate::coalitions::{player_envelopes, CoalitionRule};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::region::SamplingRegion;

/// Value at `x` of the chord through `(xa, ya)` and `(xb, yb)`.
///
/// Every chord in the crate goes through this function so that closures and realized
/// payoffs built from the same samples compare exactly.
#[inline]
pub fn chord_value(xa: f64, ya: f64, xb: f64, yb: f64, x: f64) -> f64 {
    if xb == xa || x == xa {
        return ya;
    }
    if x == xb {
        return yb;
    }
    ((xb - x) * ya + (x - xa) * yb) / (xb - xa)
}

#[derive(Debug, Clone)]
pub struct ClosureResult {
    /// Closure on the scope; input values elsewhere.
    pub closure: GridFunction,
    pub scope: (usize, usize),
    /// Hull vertices, increasing.
    pub vertices: Vec<usize>,
    /// For each scope index (offset by `scope.0`), the hull vertices whose chord gives
    /// the closure there. Vertices map to themselves.
    pub support: Vec<(usize, usize)>,
}

/// Monotone-chain upper hull of the points `(xs[k], ys[k])` for `k` in `candidates`
/// (increasing). Collinear points are kept.
pub(crate) fn upper_hull(xs: &[f64], ys: &[f64], candidates: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for c in candidates {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if ys[b] < chord_value(xs[a], ys[a], xs[c], ys[c], xs[b]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(c);
    }
    hull
}

/// Closure of `ys` over `lo..=hi` skipping indices for which `masked` holds. Writes the
/// closure into `out[lo..=hi]` and returns the hull vertices.
pub(crate) fn closure_on_scope(
    xs: &[f64],
    ys: &[f64],
    lo: usize,
    hi: usize,
    masked: impl Fn(usize) -> bool,
    out: &mut [f64],
) -> Vec<usize> {
    let hull = upper_hull(xs, ys, (lo..=hi).filter(|&k| !masked(k)));
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        out[a] = ys[a];
        for k in a + 1..b {
            out[k] = chord_value(xs[a], ys[a], xs[b], ys[b], xs[k]);
        }
    }
    let last = *hull.last().expect("scope endpoints are never masked");
    out[last] = ys[last];
    hull
}

/// Upper concave closure of `values` over the index scope, excluding masked points.
pub fn concave_closure(values: &GridFunction, scope: (usize, usize), mask: Option<&SamplingRegion>) -> Result<ClosureResult> {
    let (lo, hi) = scope;
    let n = values.len();
    if lo > hi || hi >= n {
        return Err(Error::InvalidParameter(format!("scope ({lo}, {hi}) is not within 0..{n}")));
    }
    if let Some(m) = mask {
        if m.grid().points() != values.grid().points() {
            return Err(Error::GridMismatch);
        }
        for e in [lo, hi] {
            if m.contains_index(e) {
                return Err(Error::MaskedScopeEndpoint(e));
            }
        }
    }
    let xs = values.grid().points();
    let ys = values.values();
    let mut out = ys.to_vec();
    let masked = |k: usize| mask.is_some_and(|m| m.contains_index(k));
    let vertices = closure_on_scope(xs, ys, lo, hi, masked, &mut out);
    let mut support = Vec::with_capacity(hi - lo + 1);
    for w in vertices.windows(2) {
        support.push((w[0], w[0]));
        for _ in w[0] + 1..w[1] {
            support.push((w[0], w[1]));
        }
    }
    support.push((hi, hi));
    Ok(ClosureResult { closure: GridFunction::new(values.grid().clone(), out)?, scope, vertices, support })
}

/// Unconstrained closure over the whole grid.
pub fn full_closure(values: &GridFunction) -> GridFunction {
    let n = values.len();
    concave_closure(values, (0, n - 1), None).expect("full scope is valid").closure
}

/// Nearest stopping beliefs around `p`; `(p, p)` outside the region. The flag reports
/// that a bound sits on a grid edge.
pub fn component_bounds(p: f64, region: &SamplingRegion) -> (f64, f64, bool) {
    region.component_bounds(p)
}

/// `V_i^G` at every grid point.
///
/// Inside each component of `C_i` the closure of `net` is taken over the component's
/// closure with the points of `S_i` excluded; outside `C_i` the collective stops
/// regardless of player `i`, so the value is `net` itself.
pub fn constrained_closure_all(i: usize, net: &GridFunction, rule: &CoalitionRule, profile: &[SamplingRegion]) -> Result<Vec<f64>> {
    let (c, s) = player_envelopes(rule, i, profile)?;
    if c.grid().points() != net.grid().points() {
        return Err(Error::GridMismatch);
    }
    Ok(closure_within(net, &c, &s))
}

/// Closure of `net` on each component of `c` with points of `s` excluded.
pub(crate) fn closure_within(net: &GridFunction, c: &SamplingRegion, s: &SamplingRegion) -> Vec<f64> {
    let xs = net.grid().points();
    let ys = net.values();
    let mut out = ys.to_vec();
    let smask = s.mask();
    for (lo, hi) in c.interval_indices_list() {
        closure_on_scope(xs, ys, lo, hi, |k| smask[k], &mut out);
    }
    out
}

/// `V_i^G(p)` at a grid belief `p`.
pub fn constrained_closure(i: usize, net: &GridFunction, rule: &CoalitionRule, profile: &[SamplingRegion], p: f64) -> Result<f64> {
    let k = net
        .grid()
        .index_of(p)
        .ok_or_else(|| Error::InvalidBelief(p, "closure evaluation point must be a grid point".into()))?;
    Ok(constrained_closure_all(i, net, rule, profile)?[k])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BeliefGrid;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn brute(xs: &[f64], ys: &[f64], keep: &[bool]) -> Vec<f64> {
        let n = xs.len();
        (0..n)
            .map(|k| {
                let mut best = f64::NEG_INFINITY;
                for a in 0..=k {
                    for b in k..n {
                        if keep[a] && keep[b] {
                            best = best.max(chord_value(xs[a], ys[a], xs[b], ys[b], xs[k]));
                        }
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn concave_input_is_fixed() {
        let g = Arc::new(BeliefGrid::uniform(0.01, 0.99, 33, &[]).unwrap());
        let f = GridFunction::from_fn(g, |p| -(p - 0.4) * (p - 0.4));
        let c = full_closure(&f);
        for (a, b) in c.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn abs_closure_is_endpoint_chord() {
        let g = Arc::new(BeliefGrid::uniform(0.01, 0.99, 49, &[]).unwrap());
        let f = GridFunction::from_fn(g.clone(), |p| (2.0 * p - 1.0).abs());
        let c = full_closure(&f);
        let keep = vec![true; g.len()];
        let b = brute(g.points(), f.values(), &keep);
        for (x, y) in c.values().iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
            assert!((x - 0.98).abs() < 1e-12);
        }
    }

    #[test]
    fn masked_hole_is_bridged() {
        let g = Arc::new(BeliefGrid::uniform(0.05, 0.95, 37, &[]).unwrap());
        let f = GridFunction::from_fn(g.clone(), |p| (4.0 * p * (1.0 - p)).sqrt() + 0.3 * (9.0 * p).sin());
        let mask = SamplingRegion::from_intervals(g.clone(), &[(0.25, 0.75)]).unwrap();
        let r = concave_closure(&f, (0, g.len() - 1), Some(&mask)).unwrap();
        let keep: Vec<bool> = (0..g.len()).map(|k| !mask.contains_index(k)).collect();
        let b = brute(g.points(), f.values(), &keep);
        for (x, y) in r.closure.values().iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        let k = g.index_of(0.5).unwrap();
        let (a, c) = r.support[k];
        assert!(g.x(a) <= 0.25 + 1e-12 && g.x(c) >= 0.75 - 1e-12);
    }

    #[test]
    fn masked_endpoint_rejected() {
        let g = Arc::new(BeliefGrid::uniform(0.05, 0.95, 19, &[]).unwrap());
        let f = GridFunction::from_fn(g.clone(), |p| p);
        let mask = SamplingRegion::full(g.clone());
        assert!(matches!(concave_closure(&f, (2, 10), Some(&mask)), Err(Error::MaskedScopeEndpoint(2))));
    }

    #[test]
    fn reduction_to_single_player_closures() {
        let g = Arc::new(BeliefGrid::uniform(0.05, 0.95, 19, &[]).unwrap());
        let net = GridFunction::from_fn(g.clone(), |p| (3.0 * p).sin() * (p - 0.3).abs());
        let other = SamplingRegion::from_intervals(g.clone(), &[(0.3, 0.7)]).unwrap();
        let mine = SamplingRegion::empty(g.clone());
        let profile = vec![mine, other.clone()];
        // unilateral: scope is the component of the other player's region
        let uni = constrained_closure_all(0, &net, &CoalitionRule::unilateral(2).unwrap(), &profile).unwrap();
        let (lo, hi) = other.interval_indices_list()[0];
        let vin = concave_closure(&net, (lo, hi), None).unwrap().closure;
        for k in 0..g.len() {
            assert_eq!(uni[k], vin.value(k));
        }
        // unanimity: full scope with the other player's region excluded
        let una = constrained_closure_all(0, &net, &CoalitionRule::unanimity(2).unwrap(), &profile).unwrap();
        let full = SamplingRegion::full(g.clone());
        let vout = concave_closure(&net, (0, g.len() - 1), Some(&other)).unwrap().closure;
        for k in 1..g.len() - 1 {
            assert!(full.contains_index(k));
            assert_eq!(una[k], vout.value(k));
        }
        assert_eq!(constrained_closure(0, &net, &CoalitionRule::unanimity(2).unwrap(), &profile, g.x(9)).unwrap(), una[9]);
    }

    proptest! {
        #[test]
        fn hull_matches_brute_force(ys in prop::collection::vec(-1.0f64..1.0, 3..40), holes in prop::collection::vec(any::<bool>(), 40)) {
            let n = ys.len();
            let g = Arc::new(BeliefGrid::uniform(0.05, 0.95, n, &[]).unwrap());
            let f = GridFunction::new(g.clone(), ys).unwrap();
            let mut mask: Vec<bool> = holes[..n].to_vec();
            mask[0] = false;
            mask[n - 1] = false;
            let region = SamplingRegion::from_mask(g.clone(), mask.clone()).unwrap();
            let r = concave_closure(&f, (0, n - 1), Some(&region)).unwrap();
            let keep: Vec<bool> = mask.iter().map(|m| !m).collect();
            let b = brute(g.points(), f.values(), &keep);
            for k in 0..n {
                prop_assert!((r.closure.value(k) - b[k]).abs() <= 1e-12);
                if keep[k] {
                    prop_assert!(r.closure.value(k) >= f.value(k) - 1e-12);
                }
            }
            // idempotent
            let again = concave_closure(&r.closure, (0, n - 1), None).unwrap();
            for k in 0..n {
                prop_assert!((again.closure.value(k) - r.closure.value(k)).abs() <= 1e-12);
            }
            // enlarging the mask never raises the closure
            let bigger = region.union(&SamplingRegion::interval_indices(g.clone(), 0, n / 2)).unwrap();
            if !bigger.contains_index(0) && !bigger.contains_index(n - 1) {
                let r2 = concave_closure(&f, (0, n - 1), Some(&bigger)).unwrap();
                for k in 0..n {
                    prop_assert!(r2.closure.value(k) <= r.closure.value(k) + 1e-12);
                }
            }
        }
    }
}
