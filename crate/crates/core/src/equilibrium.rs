//! Equilibrium payoffs, certification, enumeration and comparative statics.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coalitions::{collective_region, CoalitionRule, PlayerSet};
use crate::concavify::{chord_value, closure_on_scope, closure_within, constrained_closure_all, full_closure};
use crate::costs::{cost_transform, CostSpec};
use crate::error::{Error, Result};
use crate::grid::{BeliefGrid, GridFunction, PiecewiseLinearSpec, DEFAULT_DELTA, DEFAULT_N};
use crate::process::ProcessSpec;
use crate::region::SamplingRegion;

/// Relative tolerance for `V - U` comparisons.
pub const REL_TOL: f64 = 1e-9;
/// Largest grid for single-interval enumeration.
pub const MAX_SINGLE_N: usize = 1024;
/// Largest grid for the two-interval scan.
pub const MAX_TWO_INTERVAL_N: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub n: usize,
    pub delta: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: DEFAULT_N, delta: DEFAULT_DELTA }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerSpec {
    pub u: PiecewiseLinearSpec,
    pub c: CostSpec,
}

/// Full description of a collective stopping game.
#[derive(Debug, Clone)]
pub struct GameSpec {
    pub prior: f64,
    pub players: Vec<PlayerSpec>,
    pub process: ProcessSpec,
    pub rule: CoalitionRule,
    pub grid: GridConfig,
    /// Extra beliefs forced onto the grid.
    pub pins: Vec<f64>,
    /// Extra jump locations that receive a left-limit point.
    pub jumps: Vec<f64>,
    /// Cost-transform anchor; the grid point nearest one half when absent.
    pub anchor: Option<f64>,
}

impl GameSpec {
    pub fn new(prior: f64, players: Vec<PlayerSpec>, process: ProcessSpec, rule: CoalitionRule) -> Self {
        Self { prior, players, process, rule, grid: GridConfig::default(), pins: Vec::new(), jumps: Vec::new(), anchor: None }
    }

    pub fn with_grid(mut self, n: usize, delta: f64) -> Self {
        self.grid = GridConfig { n, delta };
        self
    }
}

/// Game compiled onto a belief grid.
#[derive(Debug, Clone)]
pub struct Game {
    spec: Option<GameSpec>,
    grid: Arc<BeliefGrid>,
    rule: CoalitionRule,
    prior_index: usize,
    u: Vec<GridFunction>,
    phi: Vec<GridFunction>,
    slope: Vec<Vec<f64>>,
    net: Vec<GridFunction>,
    tolerance: f64,
}

fn interior(p: f64, delta: f64) -> bool {
    p > delta && p < 1.0 - delta
}

impl Game {
    pub fn new(spec: &GameSpec) -> Result<Self> {
        if spec.players.is_empty() {
            return Err(Error::InvalidGame("at least one player is required".into()));
        }
        if spec.rule.n_players() != spec.players.len() {
            return Err(Error::InvalidGame(format!(
                "rule is over {} players but the game has {}",
                spec.rule.n_players(),
                spec.players.len()
            )));
        }
        if matches!(spec.process, ProcessSpec::Poisson(_)) {
            return Err(Error::UnsupportedProcess("Poisson games are solved by the Poisson solver".into()));
        }
        spec.process.validate()?;
        let delta = spec.grid.delta;
        if !interior(spec.prior, delta) {
            return Err(Error::InvalidBelief(spec.prior, "prior must lie inside the grid".into()));
        }
        let mut pins = vec![spec.prior];
        pins.extend(spec.anchor);
        pins.extend(spec.pins.iter().copied());
        let mut jumps = spec.jumps.clone();
        for pl in &spec.players {
            pl.c.validate()?;
            pins.extend(pl.u.breakpoints().iter().copied());
            pins.extend(pl.c.breakpoints());
            jumps.extend(pl.u.jumps());
            jumps.extend(pl.c.jumps());
        }
        pins.retain(|&p| interior(p, delta));
        jumps.retain(|&p| interior(p, delta));
        jumps.sort_by(f64::total_cmp);
        jumps.dedup();
        let grid = Arc::new(BeliefGrid::build(spec.grid.n, delta, &pins, &jumps)?);
        let z = match spec.anchor {
            Some(z) => z,
            None => grid.x(grid.nearest_index(0.5)),
        };
        let mut u = Vec::new();
        let mut phi = Vec::new();
        let mut slope = Vec::new();
        for pl in &spec.players {
            u.push(GridFunction::sample(grid.clone(), &pl.u));
            let t = cost_transform(&pl.c, &spec.process, &grid, z)?;
            phi.push(t.phi);
            slope.push(t.slope);
        }
        let prior_index = grid.index_of(spec.prior).expect("prior is pinned");
        let mut game = Self::assemble(grid, spec.rule.clone(), prior_index, u, phi, slope)?;
        game.spec = Some(spec.clone());
        Ok(game)
    }

    /// Game from tabulated payoffs and cost transforms on an existing grid.
    pub fn from_tables(
        grid: Arc<BeliefGrid>,
        prior_index: usize,
        u: Vec<GridFunction>,
        phi: Vec<GridFunction>,
        rule: CoalitionRule,
    ) -> Result<Self> {
        if u.is_empty() || u.len() != phi.len() || rule.n_players() != u.len() {
            return Err(Error::InvalidGame("payoff, cost and rule sizes disagree".into()));
        }
        if prior_index == 0 || prior_index + 1 >= grid.len() {
            return Err(Error::InvalidGame("prior must be an interior grid point".into()));
        }
        let slope = vec![Vec::new(); u.len()];
        Self::assemble(grid, rule, prior_index, u, phi, slope)
    }

    fn assemble(
        grid: Arc<BeliefGrid>,
        rule: CoalitionRule,
        prior_index: usize,
        u: Vec<GridFunction>,
        phi: Vec<GridFunction>,
        slope: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let mut net = Vec::with_capacity(u.len());
        for (a, b) in u.iter().zip(&phi) {
            if !a.same_grid(b) || a.grid().points() != grid.points() {
                return Err(Error::GridMismatch);
            }
            net.push(a.sub(b)?);
        }
        let range = net.iter().map(|f| f.max_value() - f.min_value()).fold(0.0, f64::max);
        let tolerance = REL_TOL * range.max(1.0);
        Ok(Self { spec: None, grid, rule, prior_index, u, phi, slope, net, tolerance })
    }

    pub fn grid(&self) -> &Arc<BeliefGrid> {
        &self.grid
    }

    /// The specification this game was compiled from, if any.
    pub fn spec(&self) -> Option<&GameSpec> {
        self.spec.as_ref()
    }

    pub fn rule(&self) -> &CoalitionRule {
        &self.rule
    }

    pub fn n_players(&self) -> usize {
        self.net.len()
    }

    pub fn prior_index(&self) -> usize {
        self.prior_index
    }

    pub fn prior(&self) -> f64 {
        self.grid.x(self.prior_index)
    }

    pub fn u(&self, i: usize) -> &GridFunction {
        &self.u[i]
    }

    pub fn phi(&self, i: usize) -> &GridFunction {
        &self.phi[i]
    }

    /// Slope of `phi_i` at grid points (empty for games built from tables).
    pub fn phi_slope(&self, i: usize) -> &[f64] {
        &self.slope[i]
    }

    pub fn net(&self, i: usize) -> &GridFunction {
        &self.net[i]
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Same game under another rule.
    pub fn with_rule(&self, rule: CoalitionRule) -> Result<Self> {
        if rule.n_players() != self.n_players() {
            return Err(Error::InvalidGame("rule size does not match the player count".into()));
        }
        let mut g = self.clone();
        if let Some(s) = g.spec.as_mut() {
            s.rule = rule.clone();
        }
        g.rule = rule;
        Ok(g)
    }

    /// Copy with independent uniform noise of the given amplitude added to every
    /// terminal payoff, used to make instances generic.
    pub fn jittered(&self, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = self.clone();
        for i in 0..g.u.len() {
            let noise: Vec<f64> = (0..g.grid.len()).map(|_| rng.random_range(-amplitude..=amplitude)).collect();
            g.u[i] = GridFunction::new(g.grid.clone(), g.u[i].values().iter().zip(&noise).map(|(a, b)| a + b).collect())
                .expect("same length");
            g.net[i] = g.u[i].sub(&g.phi[i]).expect("same grid");
        }
        g
    }

    pub fn region(&self, intervals: &[(f64, f64)]) -> Result<SamplingRegion> {
        SamplingRegion::from_intervals(self.grid.clone(), intervals)
    }
}

/// Ex-ante payoff of the binary policy with support `{x_lo, x_hi}` at belief `x_k`.
pub fn u_bar_index(net: &GridFunction, lo: usize, hi: usize, k: usize) -> f64 {
    let xs = net.grid().points();
    let ys = net.values();
    chord_value(xs[lo], ys[lo], xs[hi], ys[hi], xs[k])
}

/// `U_i(p_low, p_high; p)` at grid beliefs.
pub fn u_bar(game: &Game, i: usize, p_low: f64, p_high: f64, p: f64) -> Result<f64> {
    let g = game.grid();
    let idx = |x: f64| g.index_of(x).ok_or_else(|| Error::InvalidBelief(x, "not a grid point".into()));
    let (lo, hi, k) = (idx(p_low)?, idx(p_high)?, idx(p)?);
    if !(lo <= k && k <= hi) {
        return Err(Error::InvalidBelief(p, format!("outside [{p_low}, {p_high}]")));
    }
    Ok(u_bar_index(game.net(i), lo, hi, k))
}

/// Strategy profile: one region for everyone or one per player.
#[derive(Debug, Clone)]
pub enum Profile {
    Uniform(SamplingRegion),
    PerPlayer(Vec<SamplingRegion>),
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerSlack {
    /// `max_p V_i(p) - U_i(p)`.
    pub max_violation: f64,
    pub worst_belief: f64,
    /// `min_p V_i(p) - U_i(p)`, never below `-1e-10`.
    pub min_slack: f64,
}

#[derive(Debug, Clone)]
pub struct EquilibriumCertificate {
    /// Collective sampling region.
    pub region: SamplingRegion,
    pub players: Vec<PlayerSlack>,
    pub tolerance: f64,
    pub pass: bool,
    /// The rule has no unilateral and no unanimous players and the profile is uniform,
    /// so the check passes for every region.
    pub vacuous: bool,
    /// Some interval of the collective region ends on a grid edge.
    pub edge_warning: bool,
}

impl EquilibriumCertificate {
    pub fn max_violation(&self) -> f64 {
        self.players.iter().map(|s| s.max_violation).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn slack(game: &Game, i: usize, v: &[f64], bounds: &[(usize, usize)]) -> PlayerSlack {
    let net = game.net(i);
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = 0;
    let mut min_slack = f64::INFINITY;
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        let d = v[k] - u_bar_index(net, lo, hi, k);
        if d > max_violation {
            max_violation = d;
            worst = k;
        }
        min_slack = min_slack.min(d);
    }
    debug_assert!(min_slack >= -1e-10, "closure below realized payoff: {min_slack}");
    PlayerSlack { max_violation, worst_belief: game.grid().x(worst), min_slack }
}

fn uniform_envelopes(rule: &CoalitionRule, i: usize) -> (bool, bool) {
    let c_is_full = rule.minimal_coalitions().iter().all(|c| c.contains(i));
    let s_is_empty = rule.minimal_coalitions().contains(&PlayerSet::singleton(i));
    (c_is_full, s_is_empty)
}

fn check_uniform(game: &Game, region: &SamplingRegion) -> EquilibriumCertificate {
    let grid = game.grid().clone();
    let bounds = region.bounds_table();
    let full = SamplingRegion::full(grid.clone());
    let empty = SamplingRegion::empty(grid);
    let players = (0..game.n_players())
        .map(|i| {
            let (c_full, s_empty) = uniform_envelopes(game.rule(), i);
            let c = if c_full { &full } else { region };
            let s = if s_empty { &empty } else { region };
            let v = closure_within(game.net(i), c, s);
            slack(game, i, &v, &bounds)
        })
        .collect();
    let (uni, una) = game.rule().classify_players();
    finish(game, region.clone(), players, uni.is_empty() && una.is_empty())
}

fn finish(game: &Game, region: SamplingRegion, players: Vec<PlayerSlack>, vacuous: bool) -> EquilibriumCertificate {
    let tolerance = game.tolerance();
    let pass = players.iter().all(|s| s.max_violation <= tolerance);
    let edge_warning = region.touches_edge();
    EquilibriumCertificate { region, players, tolerance, pass, vacuous, edge_warning }
}

/// Check the closure conditions for every player at every grid belief.
pub fn check_equilibrium(game: &Game, profile: &Profile) -> Result<EquilibriumCertificate> {
    match profile {
        Profile::Uniform(region) => {
            if region.grid().points() != game.grid().points() {
                return Err(Error::GridMismatch);
            }
            Ok(check_uniform(game, region))
        }
        Profile::PerPlayer(regions) => {
            if regions.iter().any(|r| r.grid().points() != game.grid().points()) {
                return Err(Error::GridMismatch);
            }
            let o = collective_region(game.rule(), regions)?;
            let bounds = o.bounds_table();
            let mut players = Vec::with_capacity(game.n_players());
            for i in 0..game.n_players() {
                let v = constrained_closure_all(i, game.net(i), game.rule(), regions)?;
                players.push(slack(game, i, &v, &bounds));
            }
            Ok(finish(game, o, players, false))
        }
    }
}

/// Shorthand for a uniform-profile check.
pub fn certify(game: &Game, region: &SamplingRegion) -> Result<EquilibriumCertificate> {
    check_equilibrium(game, &Profile::Uniform(region.clone()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationScope {
    /// The empty region and every open interval with grid endpoints containing the prior.
    Single,
    /// Regions `(a, m) u (m, b)` with `a < prior < b`.
    TwoInterval,
}

#[derive(Debug, Clone)]
pub struct CertifiedRegion {
    pub region: SamplingRegion,
    pub certificate: EquilibriumCertificate,
}

/// Pass/fail of a uniform profile without building a certificate.
fn passes(game: &Game, mask: &[bool], bounds: &[(usize, usize)], scratch: &mut [f64]) -> bool {
    let xs = game.grid().points();
    let n = xs.len();
    let tol = game.tolerance();
    for i in 0..game.n_players() {
        let (c_full, s_empty) = uniform_envelopes(game.rule(), i);
        let net = game.net(i);
        let ys = net.values();
        scratch.copy_from_slice(ys);
        if c_full {
            if s_empty {
                closure_on_scope(xs, ys, 0, n - 1, |_| false, scratch);
            } else {
                closure_on_scope(xs, ys, 0, n - 1, |k| mask[k], scratch);
            }
        } else if s_empty {
            let mut k = 0;
            while k < n {
                if mask[k] {
                    let lo = k - 1;
                    while mask[k] {
                        k += 1;
                    }
                    closure_on_scope(xs, ys, lo, k, |_| false, scratch);
                } else {
                    k += 1;
                }
            }
        } else {
            // C = S = region: the closure is the chord over each component
            continue;
        }
        for (k, &(lo, hi)) in bounds.iter().enumerate() {
            if scratch[k] - u_bar_index(net, lo, hi, k) > tol {
                return false;
            }
        }
    }
    true
}

fn candidate_passes(game: &Game, region: &SamplingRegion) -> bool {
    let mut scratch = vec![0.0; game.grid().len()];
    passes(game, region.mask(), &region.bounds_table(), &mut scratch)
}

/// All certified uniform regions of the requested shape, ordered by endpoints.
pub fn enumerate_interval_equilibria(game: &Game, scope: EnumerationScope) -> Result<Vec<CertifiedRegion>> {
    let grid = game.grid().clone();
    let n = grid.len();
    let p0 = game.prior_index();
    let limit = match scope {
        EnumerationScope::Single => MAX_SINGLE_N,
        EnumerationScope::TwoInterval => MAX_TWO_INTERVAL_N,
    };
    if n > limit {
        return Err(Error::ScopeTooLarge { n, limit });
    }
    let found: Vec<SamplingRegion> = match scope {
        EnumerationScope::Single => {
            let mut out = Vec::new();
            let empty = SamplingRegion::empty(grid.clone());
            if candidate_passes(game, &empty) {
                out.push(empty);
            }
            let rest: Vec<SamplingRegion> = (0..p0)
                .into_par_iter()
                .flat_map_iter(|a| {
                    let grid = grid.clone();
                    (p0 + 1..n).filter_map(move |b| {
                        let r = SamplingRegion::interval_indices(grid.clone(), a, b);
                        candidate_passes(game, &r).then_some(r)
                    })
                })
                .collect();
            out.extend(rest);
            out
        }
        EnumerationScope::TwoInterval => (0..p0)
            .into_par_iter()
            .flat_map_iter(|a| {
                let grid = grid.clone();
                (a + 2..n).flat_map(move |m| {
                    let grid = grid.clone();
                    (m.max(p0) + 1..n).filter(move |&b| b >= m + 2).filter_map(move |b| {
                        let lo = SamplingRegion::interval_indices(grid.clone(), a, m);
                        let hi = SamplingRegion::interval_indices(grid.clone(), m, b);
                        let r = lo.union(&hi).expect("same grid");
                        candidate_passes(game, &r).then_some(r)
                    })
                })
            })
            .collect(),
    };
    Ok(found
        .into_iter()
        .map(|region| {
            let certificate = check_uniform(game, &region);
            CertifiedRegion { region, certificate }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct Extremal {
    pub maximum: SamplingRegion,
    pub maximum_certificate: EquilibriumCertificate,
    pub minimal: Vec<SamplingRegion>,
}

/// Union of all listed equilibria (which must certify) and the inclusion-minimal ones.
pub fn extremal_equilibria(game: &Game, equilibria: &[SamplingRegion]) -> Result<Extremal> {
    let first = equilibria.first().ok_or_else(|| Error::InvalidParameter("no equilibria given".into()))?;
    let mut maximum = first.clone();
    for r in &equilibria[1..] {
        maximum = maximum.union(r)?;
    }
    let maximum_certificate = certify(game, &maximum)?;
    if !maximum_certificate.pass {
        return Err(Error::UnionNotCertified { violation: maximum_certificate.max_violation() });
    }
    Ok(Extremal { maximum, maximum_certificate, minimal: minimal_elements(equilibria) })
}

/// Elements that do not strictly contain another element.
pub fn minimal_elements(regions: &[SamplingRegion]) -> Vec<SamplingRegion> {
    let mut out: Vec<SamplingRegion> = Vec::new();
    for r in regions {
        if regions.iter().any(|o| o.is_strict_subset(r)) || out.contains(r) {
            continue;
        }
        out.push(r.clone());
    }
    out
}

/// Non-negative welfare weights, not all zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidParameter("weights must be non-negative and not all zero".into()));
        }
        Ok(Self(weights))
    }

    pub fn equal(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Beliefs where the closure of the weighted net payoff strictly exceeds it.
pub fn efficient_region(game: &Game, lambda: &WeightVector) -> Result<SamplingRegion> {
    if lambda.0.len() != game.n_players() {
        return Err(Error::InvalidParameter(format!("{} weights for {} players", lambda.0.len(), game.n_players())));
    }
    let grid = game.grid().clone();
    let w: Vec<f64> = (0..grid.len()).map(|k| lambda.0.iter().enumerate().map(|(i, l)| l * game.net(i).value(k)).sum()).collect();
    let w = GridFunction::new(grid.clone(), w)?;
    let hat = full_closure(&w);
    let tol = REL_TOL * (w.max_value() - w.min_value()).max(1.0);
    let mask = hat.values().iter().zip(w.values()).map(|(a, b)| a - b > tol).collect();
    SamplingRegion::from_mask(grid, mask)
}

/// Parameter axis for [`comparative_statics`].
#[derive(Debug, Clone)]
pub enum StaticsAxis {
    /// Two players with `u_1 = f + b g`, `u_2 = f - b g` and equal costs.
    Misalignment { f: PiecewiseLinearSpec, g: PiecewiseLinearSpec, b: Vec<f64> },
    /// Increasing chain of rules, each a sub-rule of the next.
    Rules(Vec<CoalitionRule>),
}

#[derive(Debug, Clone)]
pub struct StaticsLevel {
    pub label: String,
    pub equilibria: Vec<SamplingRegion>,
    pub maximum: Option<SamplingRegion>,
    pub maximum_certified: bool,
    pub minimal: Vec<SamplingRegion>,
    pub vacuous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticsStep {
    pub from: String,
    pub to: String,
    /// Equilibrium sets nest (misalignment axis only).
    pub nested: Option<bool>,
    pub maximum_ok: bool,
    pub minimal_ok: bool,
}

#[derive(Debug, Clone)]
pub struct StaticsReport {
    pub levels: Vec<StaticsLevel>,
    pub steps: Vec<StaticsStep>,
}

impl StaticsReport {
    pub fn violations(&self) -> usize {
        self.steps
            .iter()
            .map(|s| usize::from(s.nested == Some(false)) + usize::from(!s.maximum_ok) + usize::from(!s.minimal_ok))
            .sum()
    }
}

fn level(game: &Game, label: String) -> Result<StaticsLevel> {
    let equilibria: Vec<SamplingRegion> =
        enumerate_interval_equilibria(game, EnumerationScope::Single)?.into_iter().map(|c| c.region).collect();
    let (uni, una) = game.rule().classify_players();
    let (maximum, maximum_certified, minimal) = match extremal_equilibria(game, &equilibria) {
        Ok(e) => (Some(e.maximum), true, e.minimal),
        Err(Error::UnionNotCertified { .. }) => {
            let mut u = equilibria[0].clone();
            for r in &equilibria[1..] {
                u = u.union(r)?;
            }
            (Some(u), false, minimal_elements(&equilibria))
        }
        Err(Error::InvalidParameter(_)) => (None, false, Vec::new()),
        Err(e) => return Err(e),
    };
    Ok(StaticsLevel { label, equilibria, maximum, maximum_certified, minimal, vacuous: uni.is_empty() && una.is_empty() })
}

/// `later` is never strictly larger than `earlier`.
fn not_strictly_larger(later: &Option<SamplingRegion>, earlier: &Option<SamplingRegion>) -> bool {
    match (later, earlier) {
        (Some(l), Some(e)) => !e.is_strict_subset(l),
        _ => true,
    }
}

/// Check the monotone comparative statics along an axis.
pub fn comparative_statics(base: &GameSpec, axis: &StaticsAxis) -> Result<StaticsReport> {
    let mut levels = Vec::new();
    let mut steps = Vec::new();
    match axis {
        StaticsAxis::Misalignment { f, g, b } => {
            if base.players.len() != 2 || base.rule.n_players() != 2 {
                return Err(Error::InvalidGame("the misalignment axis needs exactly two players".into()));
            }
            if base.players[0].c != base.players[1].c {
                return Err(Error::InvalidGame("the misalignment axis needs equal costs".into()));
            }
            if b.iter().any(|x| !(*x >= 0.0)) {
                return Err(Error::InvalidParameter("misalignment values must be non-negative".into()));
            }
            let mut bs = b.clone();
            bs.sort_by(f64::total_cmp);
            let mut spec = base.clone();
            spec.pins.extend(f.breakpoints().iter().chain(g.breakpoints()).copied());
            spec.jumps.extend(f.jumps().into_iter().chain(g.jumps()));
            for &bv in &bs {
                spec.players[0].u = PiecewiseLinearSpec::combine(1.0, f, bv, g);
                spec.players[1].u = PiecewiseLinearSpec::combine(1.0, f, -bv, g);
                levels.push(level(&Game::new(&spec)?, format!("b={bv}"))?);
            }
            for w in levels.windows(2) {
                let (lo, hi) = (&w[0], &w[1]);
                let nested = hi.equilibria.iter().all(|r| lo.equilibria.contains(r));
                let maximum_ok = match (&hi.maximum, &lo.maximum) {
                    (Some(h), Some(l)) => h.is_subset(l),
                    (Some(_), None) => false,
                    _ => true,
                };
                let minimal_ok = !hi.minimal.iter().any(|m| lo.minimal.iter().any(|m2| m.is_strict_subset(m2)));
                steps.push(StaticsStep { from: lo.label.clone(), to: hi.label.clone(), nested: Some(nested), maximum_ok, minimal_ok });
            }
        }
        StaticsAxis::Rules(rules) => {
            for w in rules.windows(2) {
                if !w[0].is_sub_rule_of(&w[1]) {
                    return Err(Error::InvalidRule("rules must form an increasing chain".into()));
                }
            }
            let game = Game::new(base)?;
            for (k, r) in rules.iter().enumerate() {
                levels.push(level(&game.with_rule(r.clone())?, format!("rule#{k}"))?);
            }
            for w in levels.windows(2) {
                let (small, big) = (&w[0], &w[1]);
                let meaningful = !(small.vacuous || big.vacuous);
                let maximum_ok = !meaningful || not_strictly_larger(&big.maximum, &small.maximum);
                let minimal_ok =
                    !meaningful || !big.minimal.iter().any(|m| small.minimal.iter().any(|m2| m2.is_strict_subset(m)));
                steps.push(StaticsStep { from: small.label.clone(), to: big.label.clone(), nested: None, maximum_ok, minimal_ok });
            }
        }
    }
    Ok(StaticsReport { levels, steps })
}
