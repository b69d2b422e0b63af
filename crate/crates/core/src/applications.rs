//! War of information between two opposed parties and conclusive Poisson learning.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::coalitions::CoalitionRule;
use crate::costs::{cost_transform, CostSpec};
use crate::equilibrium::{certify, EquilibriumCertificate, Game, GridConfig, PlayerSpec};
use crate::error::{Error, Result};
use crate::grid::{BeliefGrid, GridFunction, PiecewiseLinearSpec, Side};
use crate::process::{PoissonSpec, ProcessSpec};
use crate::region::SamplingRegion;

/// Two parties fund one-sided learning at constant flow costs. Party 1 wins when the
/// belief ends above one half and pays `c1` while at or below it; party 2 wins at or
/// below one half and pays `c2` above it.
#[derive(Debug, Clone, Serialize)]
pub struct WarSpec {
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Party {
    One,
    Two,
}

#[derive(Debug, Clone, Serialize)]
pub struct WarSolution {
    pub g_star: f64,
    pub big_g_star: f64,
    pub g_index: usize,
    pub big_g_index: usize,
    /// `|g* - b_1(G*)|`.
    pub residual_g: f64,
    /// `|G* - B_2(g*)|`.
    pub residual_big_g: f64,
    pub iterations: usize,
    /// Mutual best-response cells found by the exhaustive scan.
    pub fixed_points: Vec<(f64, f64)>,
}

/// War of information compiled onto a grid with both cost transforms anchored at one half.
#[derive(Debug, Clone)]
pub struct War {
    spec: WarSpec,
    grid: Arc<BeliefGrid>,
    half: usize,
    phi1: GridFunction,
    phi2: GridFunction,
}

fn one_sided_cost(c: f64, below: bool) -> Result<CostSpec> {
    let (l, r) = if below { (c, 0.0) } else { (0.0, c) };
    Ok(CostSpec::Piecewise(PiecewiseLinearSpec::new(vec![0.0, 0.5, 1.0], vec![l, l, r], vec![l, r, r])?))
}

impl War {
    pub fn new(spec: WarSpec) -> Result<Self> {
        if !(spec.c1 > 0.0 && spec.c2 > 0.0 && spec.c1.is_finite() && spec.c2.is_finite()) {
            return Err(Error::InvalidParameter("war costs must be positive".into()));
        }
        let process = ProcessSpec::diffusion(spec.sigma)?;
        let grid = Arc::new(BeliefGrid::build(spec.grid.n, spec.grid.delta, &[0.5], &[])?);
        let half = grid.index_of(0.5).expect("one half is pinned");
        let phi1 = cost_transform(&one_sided_cost(spec.c1, true)?, &process, &grid, 0.5)?.phi;
        let phi2 = cost_transform(&one_sided_cost(spec.c2, false)?, &process, &grid, 0.5)?.phi;
        Ok(Self { spec, grid, half, phi1, phi2 })
    }

    pub fn spec(&self) -> &WarSpec {
        &self.spec
    }

    pub fn grid(&self) -> &Arc<BeliefGrid> {
        &self.grid
    }

    pub fn half_index(&self) -> usize {
        self.half
    }

    fn x(&self, k: usize) -> f64 {
        self.grid.x(k)
    }

    /// Party 1's payoff at one half from the interval `(x_g, x_big_g)`.
    pub fn objective_one(&self, g: usize, big_g: usize) -> f64 {
        let (lo, hi) = (self.x(g), self.x(big_g));
        let w = hi - lo;
        (hi - 0.5) / w * -self.phi1.value(g) + (0.5 - lo) / w
    }

    /// Party 2's payoff at one half from the interval `(x_g, x_big_g)`.
    pub fn objective_two(&self, g: usize, big_g: usize) -> f64 {
        let (lo, hi) = (self.x(g), self.x(big_g));
        let w = hi - lo;
        (hi - 0.5) / w + (0.5 - lo) / w * -self.phi2.value(big_g)
    }

    /// `b_1(G)`: party 1's best lower bound index, smallest belief on ties.
    pub fn best_lower(&self, big_g: usize) -> usize {
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for g in 0..=self.half {
            let v = self.objective_one(g, big_g);
            if v > val {
                val = v;
                best = g;
            }
        }
        best
    }

    /// `B_2(g)`: party 2's best upper bound index, smallest belief on ties.
    ///
    /// At `g = 1/2` every upper bound is optimal and the tie-break returns the first
    /// point above one half, so monotonicity holds on `g < 1/2`.
    pub fn best_upper(&self, g: usize) -> usize {
        let mut best = self.half + 1;
        let mut val = f64::NEG_INFINITY;
        for big_g in self.half + 1..self.grid.len() {
            let v = self.objective_two(g, big_g);
            if v > val {
                val = v;
                best = big_g;
            }
        }
        best
    }

    /// Best response of `party` to the opponent's bound, as beliefs.
    pub fn best_response(&self, party: Party, opponent_bound: f64) -> Result<f64> {
        let k = self
            .grid
            .index_of(opponent_bound)
            .ok_or_else(|| Error::InvalidBelief(opponent_bound, "bound is not a grid point".into()))?;
        match party {
            Party::One if k > self.half => Ok(self.x(self.best_lower(k))),
            Party::Two if k <= self.half => Ok(self.x(self.best_upper(k))),
            _ => Err(Error::WrongSide { anchor: opponent_bound, threshold: 0.5 }),
        }
    }

    /// Both best-response tables: `b_1` over upper indices and `B_2` over lower indices.
    pub fn response_tables(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.grid.len();
        let b1 = (self.half + 1..n).into_par_iter().map(|k| self.best_lower(k)).collect();
        let b2 = (0..=self.half).into_par_iter().map(|k| self.best_upper(k)).collect();
        (b1, b2)
    }

    /// Two-player game under unanimity with `u_1 = 1{p > 1/2}` and the one-sided costs.
    pub fn game(&self) -> Result<Game> {
        let u1 = GridFunction::from_fn(self.grid.clone(), |p| if p > 0.5 { 1.0 } else { 0.0 });
        let u2 = u1.map(|v| 1.0 - v);
        Game::from_tables(
            self.grid.clone(),
            self.half,
            vec![u1, u2],
            vec![self.phi1.clone(), self.phi2.clone()],
            CoalitionRule::unanimity(2)?,
        )
    }
}

/// Fixed point of `(b_1, B_2)` by alternation from the widest interval, with an
/// exhaustive scan for every mutual best response.
pub fn war_solve(war: &War) -> Result<WarSolution> {
    let n = war.grid.len();
    let half = war.half;
    let (b1, b2) = war.response_tables();
    let lower_of = |big_g: usize| b1[big_g - half - 1];
    let upper_of = |g: usize| b2[g];

    let mut big_g = n - 1;
    let mut g = lower_of(big_g);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next_big_g = upper_of(g);
        let next_g = lower_of(next_big_g);
        if (next_g, next_big_g) == (g, big_g) {
            break;
        }
        if iterations > 4 * n {
            let residual = (upper_of(g) as i64 - big_g as i64).unsigned_abs() as usize;
            return Err(Error::NoFixedPoint { lower: war.x(g), upper: war.x(big_g), residual });
        }
        g = next_g;
        big_g = next_big_g;
    }
    let fixed_points = (half + 1..n)
        .filter(|&bg| upper_of(lower_of(bg)) == bg)
        .map(|bg| (war.x(lower_of(bg)), war.x(bg)))
        .collect();
    Ok(WarSolution {
        g_star: war.x(g),
        big_g_star: war.x(big_g),
        g_index: g,
        big_g_index: big_g,
        residual_g: (war.x(g) - war.x(lower_of(big_g))).abs(),
        residual_big_g: (war.x(big_g) - war.x(upper_of(g))).abs(),
        iterations,
        fixed_points,
    })
}

/// Re-certify a war solution with the general closure checker under unanimity.
pub fn war_certify(war: &War, sol: &WarSolution) -> Result<EquilibriumCertificate> {
    let game = war.game()?;
    let region = SamplingRegion::interval_indices(war.grid.clone(), sol.g_index, sol.big_g_index);
    certify(&game, &region)
}

/// Cost of a no-news belief path under conclusive good-news learning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoissonCostModel {
    /// `(1 - p0)(psi(p0) - psi(q))` with `psi' = c / (lambda y (1 - y)^2)`: the expected
    /// flow cost including paths that end in a breakthrough.
    #[default]
    Exact,
    /// `phi(p0) - phi(q)` charged only on the no-news atom, with `phi' = c / (lambda y (1 - y))`.
    Literal,
}

#[derive(Debug, Clone)]
pub struct PoissonGameSpec {
    pub lambda: f64,
    pub prior: f64,
    pub players: Vec<PlayerSpec>,
    pub rule: CoalitionRule,
    pub grid: GridConfig,
    pub cost_model: PoissonCostModel,
}

/// Cumulative trapezoid integral of `c(y) / (lambda y (1 - y))` from `z`.
pub fn poisson_phi(c: &CostSpec, lambda: f64, grid: &Arc<BeliefGrid>, z: f64) -> Result<GridFunction> {
    PoissonSpec::new(lambda)?;
    c.validate()?;
    cumulative(grid, z, |y, side| c.eval(y, side) / (lambda * y * (1.0 - y)))
}

/// Cumulative trapezoid integral of `c(y) / (lambda y (1 - y)^2)` from `z`.
pub fn poisson_potential(c: &CostSpec, lambda: f64, grid: &Arc<BeliefGrid>, z: f64) -> Result<GridFunction> {
    PoissonSpec::new(lambda)?;
    c.validate()?;
    cumulative(grid, z, |y, side| c.eval(y, side) / (lambda * y * (1.0 - y) * (1.0 - y)))
}

fn cumulative(grid: &Arc<BeliefGrid>, z: f64, f: impl Fn(f64, Side) -> f64) -> Result<GridFunction> {
    let anchor = grid.index_of(z).ok_or_else(|| Error::InvalidBelief(z, "anchor must be a grid point".into()))?;
    let n = grid.len();
    let mut out = vec![0.0; n];
    let cell = |k: usize| {
        let (a, b) = (grid.x(k), grid.x(k + 1));
        0.5 * (b - a) * (f(a, Side::Right) + f(b, Side::Left))
    };
    for k in anchor..n - 1 {
        out[k + 1] = out[k] + cell(k);
    }
    for k in (0..anchor).rev() {
        out[k] = out[k + 1] - cell(k);
    }
    GridFunction::new(grid.clone(), out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonSolution {
    /// Lower stopping belief; sampling continues on `(lower, 1)` until a breakthrough.
    pub lower: f64,
    pub lower_index: usize,
    /// Each player's preferred lower belief at the prior.
    pub preferred: Vec<f64>,
    /// Largest gain from an admissible deviation over all visited priors.
    pub max_violation: f64,
    /// No admissible deviation found on the scan gains more than the tolerance.
    pub pass: bool,
}

/// Poisson game compiled onto a grid with the cost potential anchored at the prior.
#[derive(Debug, Clone)]
pub struct PoissonGame {
    spec: PoissonGameSpec,
    grid: Arc<BeliefGrid>,
    prior_index: usize,
    u: Vec<GridFunction>,
    u_top: Vec<f64>,
    potential: Vec<GridFunction>,
}

impl PoissonGame {
    pub fn new(spec: PoissonGameSpec) -> Result<Self> {
        let np = spec.players.len();
        if !(1..=2).contains(&np) || spec.rule.n_players() != np {
            return Err(Error::InvalidGame("Poisson games take one or two players matching the rule".into()));
        }
        let uni = spec.rule == CoalitionRule::unilateral(np)?;
        let una = spec.rule == CoalitionRule::unanimity(np)?;
        if !(uni || una) {
            return Err(Error::InvalidRule("Poisson games support unilateral or unanimous stopping only".into()));
        }
        PoissonSpec::new(spec.lambda)?;
        let delta = spec.grid.delta;
        if !(spec.prior > delta && spec.prior < 1.0 - delta) {
            return Err(Error::InvalidBelief(spec.prior, "prior must lie inside the grid".into()));
        }
        let mut pins = vec![spec.prior];
        for p in &spec.players {
            pins.extend(p.u.breakpoints().iter().chain(&p.c.breakpoints()).filter(|&&x| x > delta && x < 1.0 - delta));
        }
        let grid = Arc::new(BeliefGrid::build(spec.grid.n, delta, &pins, &[])?);
        let prior_index = grid.index_of(spec.prior).expect("prior is pinned");
        let mut u = Vec::new();
        let mut u_top = Vec::new();
        let mut potential = Vec::new();
        for p in &spec.players {
            u.push(GridFunction::sample(grid.clone(), &p.u));
            u_top.push(p.u.eval(1.0, Side::Right));
            potential.push(match spec.cost_model {
                PoissonCostModel::Exact => poisson_potential(&p.c, spec.lambda, &grid, spec.prior)?,
                PoissonCostModel::Literal => poisson_phi(&p.c, spec.lambda, &grid, spec.prior)?,
            });
        }
        Ok(Self { spec, grid, prior_index, u, u_top, potential })
    }

    pub fn grid(&self) -> &Arc<BeliefGrid> {
        &self.grid
    }

    pub fn spec(&self) -> &PoissonGameSpec {
        &self.spec
    }

    pub fn prior_index(&self) -> usize {
        self.prior_index
    }

    /// Expected cost of waiting from `x_p` down to `x_q`, charged on the no-news atom.
    fn atom_cost(&self, i: usize, q: usize, p: usize) -> f64 {
        let psi = &self.potential[i];
        let d = psi.value(p) - psi.value(q);
        match self.spec.cost_model {
            PoissonCostModel::Exact => (1.0 - self.grid.x(q)) * d,
            PoissonCostModel::Literal => d,
        }
    }

    /// Payoff of player `i` at belief `x_p` from stopping at `x_q <= x_p` without news.
    pub fn objective(&self, i: usize, q: usize, p: usize) -> f64 {
        let (xq, xp) = (self.grid.x(q), self.grid.x(p));
        if q == p {
            return self.u[i].value(p);
        }
        let stay = (1.0 - xp) / (1.0 - xq);
        stay * (self.u[i].value(q) - self.atom_cost(i, q, p)) + (xp - xq) / (1.0 - xq) * self.u_top[i]
    }

    /// Preferred lower stopping index of player `i` at the prior, smallest belief on ties.
    pub fn preferred_index(&self, i: usize) -> usize {
        let p = self.prior_index;
        let mut best = 0;
        let mut val = f64::NEG_INFINITY;
        for q in 0..=p {
            let v = self.objective(i, q, p);
            if v > val {
                val = v;
                best = q;
            }
        }
        best
    }
}

/// Lower stopping belief and an admissible-deviation certificate.
///
/// Under unilateral stopping the first player to quit ends learning, so the candidate
/// is the highest preferred belief and deviations stop earlier; under unanimity it is
/// the lowest and deviations continue longer. Deviations are checked at every belief
/// the no-news path visits before stopping.
pub fn poisson_solve(game: &PoissonGame) -> Result<PoissonSolution> {
    let np = game.spec.players.len();
    let pref: Vec<usize> = (0..np).map(|i| game.preferred_index(i)).collect();
    let uni = game.spec.rule == CoalitionRule::unilateral(np)?;
    let q = if uni { *pref.iter().max().unwrap() } else { *pref.iter().min().unwrap() };
    let p0 = game.prior_index;
    let scale = game
        .u
        .iter()
        .map(|u| u.max_value() - u.min_value())
        .chain(game.potential.iter().map(|f| f.value(0).abs()))
        .fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let max_violation = (q..=p0)
        .into_par_iter()
        .map(|p| {
            let alternatives: Vec<usize> = if uni { (q..=p).collect() } else { (0..=q).collect() };
            (0..np)
                .flat_map(|i| alternatives.iter().map(move |&alt| game.objective(i, alt, p) - game.objective(i, q, p)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(PoissonSolution {
        lower: game.grid.x(q),
        lower_index: q,
        preferred: pref.iter().map(|&k| game.grid.x(k)).collect(),
        max_violation,
        pass: max_violation <= tol,
    })
}
