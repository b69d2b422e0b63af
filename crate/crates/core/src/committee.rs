//! Committee search between two alternatives.
//!
//! Player `i` (0-based, ordered by `v`) gets `1 - p` when the committee picks the
//! safe alternative and `p * v_i` otherwise; the alternative switches at the pivotal
//! voter's threshold `w_piv = 1 / (1 + v_piv)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::coalitions::{CoalitionRule, PlayerSet};
use crate::concavify::chord_value;
use crate::costs::{phi_curvature, CostSpec};
use crate::equilibrium::{Game, GameSpec, GridConfig, PlayerSpec};
use crate::error::{Error, Result};
use crate::grid::{PiecewiseLinearSpec, Side};
use crate::process::ProcessSpec;

/// Coarse sub-grid size for the coalition deviation scan.
pub const DEVIATION_GRID: usize = 64;
const LOCAL_OFFSETS: [usize; 5] = [1, 2, 4, 8, 16];

#[derive(Debug, Clone)]
pub struct CommitteeSpec {
    /// Strictly increasing positive valuations; the committee has `2m - 1` members.
    pub v: Vec<f64>,
    /// 0-based index of the pivotal voter, between `m - 1` and `2m - 2`.
    pub piv: usize,
    /// One cost per player.
    pub costs: Vec<CostSpec>,
    pub process: ProcessSpec,
    pub rule: CoalitionRule,
    pub grid: GridConfig,
}

impl CommitteeSpec {
    /// Committee with a shared cost.
    pub fn new(v: Vec<f64>, piv: usize, cost: CostSpec, process: ProcessSpec, rule: CoalitionRule) -> Self {
        let costs = vec![cost; v.len()];
        Self { v, piv, costs, process, rule, grid: GridConfig::default() }
    }

    pub fn with_grid(mut self, n: usize, delta: f64) -> Self {
        self.grid = GridConfig { n, delta };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.v.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidGame(format!("committee size must be odd and at least 3, got {n}")));
        }
        if self.v[0] <= 0.0 || self.v.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidGame("valuations must be positive and strictly increasing".into()));
        }
        let m = n.div_ceil(2);
        if self.piv < m - 1 || self.piv > n - 1 {
            return Err(Error::InvalidGame(format!("pivotal voter {} outside {}..={}", self.piv, m - 1, n - 1)));
        }
        if self.costs.len() != n {
            return Err(Error::InvalidGame("one cost per player is required".into()));
        }
        if self.rule.n_players() != n {
            return Err(Error::InvalidRule(format!("rule is over {} players, committee has {n}", self.rule.n_players())));
        }
        Ok(())
    }

    /// Individual threshold `w_i = 1 / (1 + v_i)`.
    pub fn w(&self, i: usize) -> f64 {
        1.0 / (1.0 + self.v[i])
    }

    pub fn w_piv(&self) -> f64 {
        self.w(self.piv)
    }

    pub fn homogeneous(&self) -> bool {
        self.costs.windows(2).all(|w| w[0] == w[1])
    }

    /// Equivalent general game with the prior at `w_piv`.
    pub fn game_spec(&self) -> Result<GameSpec> {
        let w = self.w_piv();
        let players = self
            .v
            .iter()
            .zip(&self.costs)
            .map(|(&v, c)| Ok(PlayerSpec { u: PiecewiseLinearSpec::committee(v, w)?, c: c.clone() }))
            .collect::<Result<Vec<_>>>()?;
        let mut spec = GameSpec::new(w, players, self.process.clone(), self.rule.clone());
        spec.grid = self.grid;
        spec.jumps.push(w);
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Upper,
    Lower,
}

/// Committee compiled onto a grid.
#[derive(Debug, Clone)]
pub struct Committee {
    spec: CommitteeSpec,
    game: Game,
    w_idx: usize,
}

impl Committee {
    pub fn new(spec: CommitteeSpec) -> Result<Self> {
        spec.validate()?;
        let game = Game::new(&spec.game_spec()?)?;
        let w_idx = game.prior_index();
        Ok(Self { spec, game, w_idx })
    }

    pub fn spec(&self) -> &CommitteeSpec {
        &self.spec
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    /// Grid index of `w_piv`.
    pub fn pivot_index(&self) -> usize {
        self.w_idx
    }

    fn x(&self, k: usize) -> f64 {
        self.game.grid().x(k)
    }

    fn u_at_pivot(&self, i: usize, lo: usize, hi: usize) -> f64 {
        let net = self.game.net(i);
        if lo == hi {
            return net.value(lo);
        }
        chord_value(self.x(lo), net.value(lo), self.x(hi), net.value(hi), self.x(self.w_idx))
    }

    /// Best upper bound for player `i` given the lower bound index `lo <= w_idx`.
    pub fn upper_response_index(&self, i: usize, lo: usize) -> usize {
        let w = self.w_idx;
        let lo = if lo >= w { w - 1 } else { lo };
        let mut best = w;
        let mut val = self.u_at_pivot(i, lo, w);
        for hi in w + 1..self.game.grid().len() {
            let u = self.u_at_pivot(i, lo, hi);
            if u > val {
                val = u;
                best = hi;
            }
        }
        best
    }

    /// Best lower bound for player `i` given the upper bound index `hi >= w_idx`.
    ///
    /// When the supremum is only approached as the bound rises to `w_piv`, the answer
    /// is the left-limit point just below `w_piv`, so the region still contains it.
    pub fn lower_response_index(&self, i: usize, hi: usize) -> usize {
        let w = self.w_idx;
        let n = self.game.grid().len();
        let hi = if hi <= w { (w + 1).min(n - 1) } else { hi };
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for lo in 0..w {
            let u = self.u_at_pivot(i, lo, hi);
            if u > val {
                val = u;
                best = lo;
            }
        }
        best
    }

    /// One-sided best response of player `i` as a belief.
    pub fn one_sided_best_response(&self, i: usize, side: BoundSide, anchor: f64) -> Result<f64> {
        let w = self.spec.w_piv();
        let grid = self.game.grid();
        let k = grid.index_of(anchor).ok_or_else(|| Error::InvalidBelief(anchor, "anchor is not a grid point".into()))?;
        match side {
            BoundSide::Upper => {
                if k > self.w_idx {
                    return Err(Error::WrongSide { anchor, threshold: w });
                }
                Ok(self.x(self.upper_response_index(i, k)))
            }
            BoundSide::Lower => {
                if k < self.w_idx {
                    return Err(Error::WrongSide { anchor, threshold: w });
                }
                Ok(self.x(self.lower_response_index(i, k)))
            }
        }
    }

    /// Closed-form slope of the upper best response at the lower bound index `lo`,
    /// evaluated at the grid response.
    pub fn upper_response_slope(&self, i: usize, lo: usize) -> Result<f64> {
        let hi = self.upper_response_index(i, lo);
        let slope = self.game.phi_slope(i);
        let (pl, ph) = (self.x(lo), self.x(hi));
        let curv = phi_curvature(&self.spec.costs[i], &self.spec.process, ph, Side::Right)?;
        Ok((self.spec.v[i] - slope[hi] + 1.0 + slope[lo]) / (-(ph - pl) * curv))
    }
}

/// Pivotal players `(L, U)`: `L = min_G max_{i in G} i`, `U = max_G min_{i in G} i`.
pub fn pivotal_players(rule: &CoalitionRule) -> (usize, usize) {
    let coalitions = rule.minimal_coalitions();
    let l = coalitions.iter().filter_map(PlayerSet::max).min().expect("rules are non-empty");
    let u = coalitions.iter().filter_map(PlayerSet::min).max().expect("rules are non-empty");
    (l, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Strong,
    /// Fixed point that is not the maximum one when `L <= U`.
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongVerdict {
    pub pass: bool,
    /// A profitable deviation: coalition members and the interval they move to.
    pub deviation: Option<(Vec<usize>, f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrongCertificate {
    pub lower: f64,
    pub upper: f64,
    pub lower_index: usize,
    pub upper_index: usize,
    /// `|p_low - B_L(p_high)|`.
    pub residual_lower: f64,
    /// `|p_high - B_U(p_low)|`.
    pub residual_upper: f64,
    pub strength: Strength,
    pub maximum: bool,
    pub deviation_scan: StrongVerdict,
}

fn interval_payoff(net: &[f64], xs: &[f64], lo: usize, hi: usize, k: usize) -> f64 {
    if lo < k && k < hi {
        chord_value(xs[lo], net[lo], xs[hi], net[hi], xs[k])
    } else {
        net[k]
    }
}

fn candidates(range: (usize, usize), current: usize, pivot: usize, budget: usize) -> Vec<usize> {
    let (a, b) = range;
    let mut out: Vec<usize> = (0..budget).map(|t| a + (b - a) * t / (budget - 1).max(1)).collect();
    out.push(current);
    out.push(pivot);
    for d in LOCAL_OFFSETS {
        out.push(current.saturating_sub(d).max(a));
        out.push((current + d).min(b));
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Scan coalitional deviations from the profile where every member samples on
/// `(x_lo, x_hi)`. Each coalition `J` moves all its members to one alternative
/// interval containing `w_piv`; the deviation is profitable when every member weakly
/// gains at every grid belief and strictly somewhere.
pub fn strong_check(committee: &Committee, lo: usize, hi: usize) -> StrongVerdict {
    let game = committee.game();
    let grid = game.grid();
    let xs = grid.points();
    let w = committee.pivot_index();
    let n_players = game.n_players();
    if !(lo <= w && w <= hi) {
        // an interval on one side of the pivot is eliminated by everyone
        let all: Vec<usize> = (0..n_players).collect();
        return StrongVerdict { pass: false, deviation: Some((all, xs[w], xs[w])) };
    }
    let tol = game.tolerance();
    let rule = game.rule();
    let n = grid.len();
    let half = DEVIATION_GRID / 2;
    let lows = candidates((0, w), lo, w, half);
    let highs = candidates((w, n - 1), hi, w, half);
    let coalitions: Vec<PlayerSet> = (1u64..(1u64 << n_players)).map(PlayerSet).collect();
    let all = PlayerSet::all(n_players);
    let nets: Vec<&[f64]> = (0..n_players).map(|i| game.net(i).values()).collect();

    let found = coalitions.par_iter().find_map_first(|&j| {
        let rest = PlayerSet(all.0 & !j.0);
        let keeps = rule.minimal_coalitions().iter().any(|g| g.is_subset(&rest));
        let moves = rule.minimal_coalitions().iter().any(|g| g.is_subset(&j));
        for &a in &lows {
            for &b in &highs {
                let (na, nb) = match (keeps, moves) {
                    (true, true) => (lo.max(a), hi.min(b)),
                    (true, false) => (lo, hi),
                    (false, true) => (a, b),
                    (false, false) => (lo.min(a), hi.max(b)),
                };
                if (na, nb) == (lo, hi) {
                    continue;
                }
                let gains_at_pivot = j.iter().all(|i| {
                    interval_payoff(nets[i], xs, na, nb, w) >= interval_payoff(nets[i], xs, lo, hi, w) - tol
                });
                if !gains_at_pivot {
                    continue;
                }
                let mut strict = false;
                let ok = j.iter().all(|i| {
                    (0..n).all(|k| {
                        let d = interval_payoff(nets[i], xs, na, nb, k) - interval_payoff(nets[i], xs, lo, hi, k);
                        strict |= d > tol;
                        d >= -tol
                    })
                });
                if ok && strict {
                    return Some((j.iter().collect::<Vec<_>>(), xs[na], xs[nb]));
                }
            }
        }
        None
    });
    StrongVerdict { pass: found.is_none(), deviation: found }
}

/// Fixed points of `(B_L, B_U)` with the strength verdicts of the pivotal reduction.
///
/// Grid responses rarely meet exactly; a crossing where `B_U(B_L(p_high)) - p_high`
/// changes sign between neighbouring grid points is accepted when the residual is at
/// most one grid cell.
pub fn strong_solve(committee: &Committee) -> Result<Vec<StrongCertificate>> {
    let spec = committee.spec();
    if !spec.homogeneous() {
        return Err(Error::InvalidGame(
            "the pivotal reduction needs homogeneous costs; certify candidates with the general equilibrium checker".into(),
        ));
    }
    let (l, u) = pivotal_players(&spec.rule);
    let grid = committee.game().grid();
    let n = grid.len();
    let w = committee.pivot_index();
    let xs = grid.points();
    let cell = grid.h() * (1.0 + 1e-9);

    let bl: Vec<usize> = (w..n).into_par_iter().map(|hi| committee.lower_response_index(l, hi)).collect();
    let bu: Vec<usize> = (0..=w).into_par_iter().map(|lo| committee.upper_response_index(u, lo)).collect();
    let lower_of = |hi: usize| bl[hi - w];
    let gap = |hi: usize| xs[bu[lower_of(hi)]] - xs[hi];

    let mut points: Vec<usize> = (w..n).filter(|&hi| bu[lower_of(hi)] == hi).collect();
    for hi in w..n - 1 {
        let (d0, d1) = (gap(hi), gap(hi + 1));
        if d0 > 0.0 && d1 < 0.0 {
            let pick = if d0 <= -d1 { hi } else { hi + 1 };
            if gap(pick).abs() <= cell {
                points.push(pick);
            }
        }
    }
    // alternation from the widest interval
    let mut hi = n - 1;
    for _ in 0..4 * n {
        let next = bu[lower_of(hi)];
        if next == hi {
            points.push(hi);
            break;
        }
        hi = next;
    }
    points.sort_unstable();
    points.dedup();
    if points.is_empty() {
        let best = (w..n).min_by(|&a, &b| gap(a).abs().total_cmp(&gap(b).abs())).expect("non-empty range");
        let residual = (bu[lower_of(best)] as i64 - best as i64).unsigned_abs() as usize;
        return Err(Error::NoFixedPoint { lower: xs[lower_of(best)], upper: xs[best], residual });
    }
    let pairs: Vec<(usize, usize)> = points.iter().map(|&hi| (lower_of(hi), hi)).collect();
    let widest = pairs
        .iter()
        .copied()
        .find(|&(a, b)| pairs.iter().all(|&(c, d)| a <= c && d <= b))
        .or_else(|| pairs.iter().copied().max_by_key(|&(a, b)| b - a));
    let out = pairs
        .iter()
        .map(|&(lo, hi)| {
            let maximum = Some((lo, hi)) == widest;
            let strength = if l > u || maximum { Strength::Strong } else { Strength::Unknown };
            StrongCertificate {
                lower: xs[lo],
                upper: xs[hi],
                lower_index: lo,
                upper_index: hi,
                residual_lower: (xs[lo] - xs[committee.lower_response_index(l, hi)]).abs(),
                residual_upper: (xs[hi] - xs[committee.upper_response_index(u, lo)]).abs(),
                strength,
                maximum,
                deviation_scan: strong_check(committee, lo, hi),
            }
        })
        .collect();
    Ok(out)
}
