//! Monte Carlo simulation of belief paths under stopping profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::applications::{PoissonCostModel, PoissonGame};
use crate::coalitions::collective_region;
use crate::equilibrium::{Game, GameSpec, Profile};
use crate::error::{Error, Result};
use crate::grid::Side;
use crate::process::{qv_at, ProcessSpec};

/// Bins of the stopping-belief histogram on `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 50;
/// Multiplier of `sqrt(dt)` times the predicted magnitude allowed as first-exit bias.
pub const BIAS_FACTOR: f64 = 1.0;
/// Clamp frequency above which a warning is logged.
pub const CLAMP_WARNING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub max_time: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n_paths: 100_000, dt: 1e-4, seed: 0, max_time: 100.0 }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || !(self.dt > 0.0) || !(self.max_time > 0.0) {
            return Err(Error::InvalidParameter("need at least one path and positive dt and max_time".into()));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    pub fn from_samples(xs: impl ExactSizeIterator<Item = f64> + Clone) -> Self {
        let n = xs.len() as f64;
        let mean = xs.clone().sum::<f64>() / n;
        if n < 2.0 {
            return Self { mean, se: 0.0 };
        }
        let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Self { mean, se: (var / n).sqrt() }
    }

    /// `|mean - target| <= k * se + slack`.
    pub fn within(&self, target: f64, k: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + slack
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    /// Terminal payoff `u_i(p_tau)` per player.
    pub payoff: Vec<Estimate>,
    pub cost: Vec<Estimate>,
    pub time: Estimate,
    pub terminal_belief: Estimate,
    /// Share of paths stopping below the prior.
    pub below_prior: Estimate,
    pub histogram: Vec<usize>,
    pub truncated: f64,
    pub clamped: f64,
}

#[derive(Debug, Clone)]
struct PathOutcome {
    terminal: f64,
    costs: Vec<f64>,
    time: f64,
    truncated: bool,
    clamped: bool,
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn game_spec(game: &Game) -> Result<&GameSpec> {
    game.spec().ok_or_else(|| Error::InvalidGame("simulation needs a game built from a specification".into()))
}

/// Continuation interval around the prior, or `None` when the prior is a stopping belief.
fn continuation(game: &Game, profile: &Profile) -> Result<Option<(f64, f64)>> {
    let region = match profile {
        Profile::Uniform(r) => r.clone(),
        Profile::PerPlayer(rs) => collective_region(game.rule(), rs)?,
    };
    let (a, b, _) = region.component_bounds(game.prior());
    Ok((a < b).then_some((a, b)))
}

fn diffusion_paths(game: &Game, profile: &Profile, config: &SimConfig) -> Result<Vec<PathOutcome>> {
    config.validate()?;
    let spec = game_spec(game)?;
    if matches!(spec.process, ProcessSpec::Poisson(_)) {
        return Err(Error::UnsupportedProcess("use the Poisson simulator".into()));
    }
    let p0 = game.prior();
    let np = spec.players.len();
    let Some((a, b)) = continuation(game, profile)? else {
        return Ok(vec![
            PathOutcome { terminal: p0, costs: vec![0.0; np], time: 0.0, truncated: false, clamped: false };
            config.n_paths
        ]);
    };
    let (lo, hi) = (game.grid().lo(), game.grid().hi());
    let sqdt = config.dt.sqrt();
    let max_steps = (config.max_time / config.dt).ceil() as usize;
    (0..config.n_paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = path_rng(config.seed, k);
            let mut p = p0;
            let mut costs = vec![0.0; np];
            let mut steps = 0;
            let mut clamped = false;
            while p > a && p < b && steps < max_steps {
                for (c, pl) in costs.iter_mut().zip(&spec.players) {
                    *c += pl.c.eval(p, Side::Right) * config.dt;
                }
                let z: f64 = rng.sample(StandardNormal);
                let vol = qv_at(&spec.process, p)?.sqrt();
                p += vol * sqdt * z;
                if p < lo || p > hi {
                    p = p.clamp(lo, hi);
                    clamped = true;
                }
                steps += 1;
            }
            let truncated = p > a && p < b;
            Ok(PathOutcome { terminal: p, costs, time: steps as f64 * config.dt, truncated, clamped })
        })
        .collect()
}

fn report(outcomes: &[PathOutcome], prior: f64, payoff: impl Fn(usize, &PathOutcome) -> f64, np: usize) -> SimReport {
    let n = outcomes.len() as f64;
    let est = |f: &dyn Fn(&PathOutcome) -> f64| Estimate::from_samples(outcomes.iter().map(f));
    let mut histogram = vec![0; HISTOGRAM_BINS];
    for o in outcomes {
        let bin = ((o.terminal * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
    }
    let clamped = outcomes.iter().filter(|o| o.clamped).count() as f64 / n;
    if clamped > CLAMP_WARNING {
        log::warn!("{:.3}% of paths hit the grid edge and were clamped", 100.0 * clamped);
    }
    SimReport {
        payoff: (0..np).map(|i| est(&|o| payoff(i, o))).collect(),
        cost: (0..np).map(|i| est(&|o| o.costs[i])).collect(),
        time: est(&|o| o.time),
        terminal_belief: est(&|o| o.terminal),
        below_prior: est(&|o| if o.terminal < prior { 1.0 } else { 0.0 }),
        histogram,
        truncated: outcomes.iter().filter(|o| o.truncated).count() as f64 / n,
        clamped,
    }
}

/// Euler-Maruyama paths of the belief diffusion stopped on leaving the collective
/// region. Every path has its own ChaCha stream, so results do not depend on thread
/// scheduling.
pub fn simulate(game: &Game, profile: &Profile, config: &SimConfig) -> Result<SimReport> {
    let spec = game_spec(game)?;
    let outcomes = diffusion_paths(game, profile, config)?;
    let np = spec.players.len();
    Ok(report(&outcomes, game.prior(), |i, o| spec.players[i].u.eval(o.terminal, Side::Right), np))
}

#[derive(Debug, Clone, Serialize)]
pub struct CostIdentityReport {
    /// Simulated expected cost per player.
    pub simulated: Vec<Estimate>,
    /// Cost predicted from the simulated stopping distribution.
    pub predicted: Vec<Estimate>,
    /// Paired difference per player.
    pub difference: Vec<Estimate>,
    pub allowance: Vec<f64>,
    pub pass: bool,
}

fn identity_report(samples: Vec<(Vec<f64>, Vec<f64>)>, dt: f64, np: usize) -> CostIdentityReport {
    let mut simulated = Vec::new();
    let mut predicted = Vec::new();
    let mut difference = Vec::new();
    let mut allowance = Vec::new();
    for i in 0..np {
        let x = samples.iter().map(|(s, _)| s[i]);
        let y = samples.iter().map(|(_, p)| p[i]);
        let d = samples.iter().map(|(s, p)| s[i] - p[i]);
        let ey = Estimate::from_samples(y);
        allowance.push(BIAS_FACTOR * dt.sqrt() * ey.mean.abs());
        simulated.push(Estimate::from_samples(x));
        predicted.push(ey);
        difference.push(Estimate::from_samples(d));
    }
    let pass = difference.iter().zip(&allowance).all(|(d, a)| d.within(0.0, 3.0, *a));
    CostIdentityReport { simulated, predicted, difference, allowance, pass }
}

/// Compare the simulated sampling cost with `E[phi(p_tau)] - phi(p0)` path by path.
/// The test passes when the mean difference is within three standard errors plus
/// `BIAS_FACTOR * sqrt(dt)` times the predicted cost.
pub fn verify_cost_identity(game: &Game, profile: &Profile, config: &SimConfig) -> Result<CostIdentityReport> {
    let np = game_spec(game)?.players.len();
    let outcomes = diffusion_paths(game, profile, config)?;
    let p0 = game.prior_index();
    let samples = outcomes
        .iter()
        .map(|o| {
            let pred = (0..np).map(|i| game.phi(i).interpolate(o.terminal) - game.phi(i).value(p0)).collect();
            (o.costs.clone(), pred)
        })
        .collect();
    Ok(identity_report(samples, config.dt, np))
}

fn poisson_paths(game: &PoissonGame, lower: f64, config: &SimConfig) -> Result<Vec<PathOutcome>> {
    config.validate()?;
    let spec = game.spec();
    let lambda = spec.lambda;
    let p0 = spec.prior;
    let np = spec.players.len();
    let clock = Exp::new(lambda).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let max_steps = (config.max_time / config.dt).ceil() as usize;
    Ok((0..config.n_paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = path_rng(config.seed, k);
            let good = rng.random_bool(p0);
            let arrival = if good { rng.sample(clock) } else { f64::INFINITY };
            let mut p = p0;
            let mut t = 0.0;
            let mut costs = vec![0.0; np];
            let mut steps = 0;
            while p > lower && steps < max_steps {
                if t >= arrival {
                    return PathOutcome { terminal: 1.0, costs, time: t, truncated: false, clamped: false };
                }
                for (c, pl) in costs.iter_mut().zip(&spec.players) {
                    *c += pl.c.eval(p, Side::Right) * config.dt;
                }
                p -= lambda * p * (1.0 - p) * config.dt;
                t += config.dt;
                steps += 1;
            }
            PathOutcome { terminal: p, costs, time: t, truncated: p > lower, clamped: false }
        })
        .collect())
}

/// Conclusive good-news learning: the no-news belief drifts down until `lower`, and a
/// breakthrough arrives at rate `lambda` in the good state.
pub fn simulate_poisson(game: &PoissonGame, lower: f64, config: &SimConfig) -> Result<SimReport> {
    let spec = game.spec();
    let outcomes = poisson_paths(game, lower, config)?;
    let np = spec.players.len();
    Ok(report(&outcomes, spec.prior, |i, o| spec.players[i].u.eval(o.terminal, Side::Right), np))
}

/// Poisson counterpart of [`verify_cost_identity`]: the prediction charges the cost
/// model's per-atom cost to paths stopping without news.
pub fn verify_poisson_cost_identity(game: &PoissonGame, lower: f64, config: &SimConfig) -> Result<CostIdentityReport> {
    let spec = game.spec();
    let np = spec.players.len();
    let outcomes = poisson_paths(game, lower, config)?;
    let grid = game.grid();
    let p0 = spec.prior;
    let model = spec.cost_model;
    let potentials = spec
        .players
        .iter()
        .map(|pl| match model {
            PoissonCostModel::Exact => crate::applications::poisson_potential(&pl.c, spec.lambda, grid, p0),
            PoissonCostModel::Literal => crate::applications::poisson_phi(&pl.c, spec.lambda, grid, p0),
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = outcomes
        .iter()
        .map(|o| {
            let pred = potentials
                .iter()
                .map(|psi| {
                    if o.terminal >= 1.0 {
                        return 0.0;
                    }
                    let d = -psi.interpolate(o.terminal);
                    match model {
                        PoissonCostModel::Exact => (1.0 - o.terminal) * d,
                        PoissonCostModel::Literal => d,
                    }
                })
                .collect();
            (o.costs.clone(), pred)
        })
        .collect();
    Ok(identity_report(samples, config.dt, np))
}

/// Least-squares slope of `logit(p_t)` along the no-news path from `p0` over `[0, t_end]`.
pub fn no_news_logit_slope(lambda: f64, p0: f64, dt: f64, t_end: f64) -> f64 {
    let steps = (t_end / dt).round() as usize;
    let mut p = p0;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let y = (p / (1.0 - p)).ln();
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        p -= lambda * p * (1.0 - p) * dt;
    }
    let n = (steps + 1) as f64;
    (n * sty - st * sy) / (n * stt - st * st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalitions::CoalitionRule;
    use crate::costs::CostSpec;
    use crate::equilibrium::PlayerSpec;
    use crate::grid::PiecewiseLinearSpec;
    use crate::region::SamplingRegion;

    fn game(c: f64) -> Game {
        let u = PiecewiseLinearSpec::continuous(&[(0.0, 1.0), (0.5, 0.0), (1.0, 1.0)]).unwrap();
        let mut spec = GameSpec::new(
            0.5,
            vec![PlayerSpec { u, c: CostSpec::Constant(c) }],
            ProcessSpec::diffusion(1.0).unwrap(),
            CoalitionRule::unilateral(1).unwrap(),
        )
        .with_grid(101, 1e-3);
        spec.pins = vec![0.3, 0.7];
        Game::new(&spec).unwrap()
    }

    fn cfg(n_paths: usize) -> SimConfig {
        SimConfig { n_paths, dt: 1e-3, seed: 7, max_time: 50.0 }
    }

    #[test]
    fn empty_region_stops_immediately() {
        let g = game(0.1);
        let r = simulate(&g, &Profile::Uniform(SamplingRegion::empty(g.grid().clone())), &cfg(10)).unwrap();
        assert_eq!(r.payoff[0].mean, 0.0);
        assert_eq!(r.cost[0].mean, 0.0);
        assert_eq!(r.time.mean, 0.0);
    }

    #[test]
    fn reproducible() {
        let g = game(0.1);
        let region = g.region(&[(0.3, 0.7)]).unwrap();
        let a = simulate(&g, &Profile::Uniform(region.clone()), &cfg(500)).unwrap();
        let b = simulate(&g, &Profile::Uniform(region), &cfg(500)).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn martingale_and_identity() {
        let g = game(0.1);
        let profile = Profile::Uniform(g.region(&[(0.3, 0.7)]).unwrap());
        let r = simulate(&g, &profile, &cfg(4000)).unwrap();
        assert!(r.terminal_belief.within(0.5, 3.0, 0.0), "{:?}", r.terminal_belief);
        assert!(r.below_prior.within(0.5, 3.0, 0.01));
        assert_eq!(r.truncated, 0.0);
        let id = verify_cost_identity(&g, &profile, &cfg(4000)).unwrap();
        assert!(id.pass, "{id:?}");
    }

    #[test]
    fn logit_drift() {
        let s = no_news_logit_slope(2.0, 0.8, 1e-4, 1.0);
        assert!((s + 2.0).abs() < 1e-3, "{s}");
    }
}
