use std::path::Path;

use collective_stopping::{
    CoalitionRule, CommitteeSpec, CostSpec, GameSpec, GridConfig, PiecewiseLinearSpec, PlayerSet, PlayerSpec, PoissonCostModel,
    PoissonGameSpec, ProcessSpec, SimConfig, StaticsAxis, DEFAULT_DELTA, DEFAULT_N,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level configuration file. Players are numbered from 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u32,
    #[serde(default)]
    pub prior: Option<f64>,
    #[serde(default)]
    pub grid: GridBlock,
    pub process: ProcessBlock,
    pub players: Vec<PlayerBlock>,
    pub rule: RuleBlock,
    /// Extra beliefs forced onto the grid.
    #[serde(default)]
    pub pins: Vec<f64>,
    #[serde(default)]
    pub enumeration: Option<EnumerationBlock>,
    #[serde(default)]
    pub simulation: Option<SimulationBlock>,
    #[serde(default)]
    pub compare: Option<CompareBlock>,
    #[serde(default)]
    pub poisson: Option<PoissonBlock>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_n() -> usize {
    DEFAULT_N
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { n: DEFAULT_N, delta: DEFAULT_DELTA }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessBlock {
    Diffusion { sigma: f64 },
    Poisson { lambda: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerBlock {
    pub u: PayoffBlock,
    pub c: CostBlock,
}

/// Piecewise-linear function, either continuous through `points` or with explicit
/// one-sided limits at each breakpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PwlBlock {
    Points { points: Vec<(f64, f64)> },
    Limits { breakpoints: Vec<f64>, left: Vec<f64>, right: Vec<f64> },
}

impl PwlBlock {
    pub fn to_spec(&self) -> collective_stopping::Result<PiecewiseLinearSpec> {
        match self {
            Self::Points { points } => PiecewiseLinearSpec::continuous(points),
            Self::Limits { breakpoints, left, right } => PiecewiseLinearSpec::new(breakpoints.clone(), left.clone(), right.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PayoffBlock {
    Pwl {
        #[serde(flatten)]
        f: PwlBlock,
    },
    /// Committee member with valuation `v`; `piv` is the pivotal voter (1-based).
    Committee { v: f64, piv: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CostBlock {
    Const {
        value: f64,
    },
    Pwl {
        #[serde(flatten)]
        f: PwlBlock,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleBlock {
    Unilateral,
    Unanimity,
    Quota { q: usize },
    /// Quota rule whose decisive coalitions must include the chair `i` (1-based).
    Chair { q: usize, i: usize },
    /// Decisive coalitions as lists of 1-based players.
    Explicit { coalitions: Vec<Vec<usize>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeBlock {
    Single,
    TwoInterval,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerationBlock {
    pub scope: ScopeBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    #[serde(default)]
    pub n_paths: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub max_time: Option<f64>,
    /// Sampling region as `[lo, hi]` pairs (diffusion).
    #[serde(default)]
    pub region: Option<Vec<(f64, f64)>>,
    /// Lower stopping belief (Poisson).
    #[serde(default)]
    pub lower: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case", deny_unknown_fields)]
pub enum CompareBlock {
    Misalignment { f: PwlBlock, g: PwlBlock, b: Vec<f64> },
    Rules { rules: Vec<RuleBlock> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonBlock {
    #[serde(default)]
    pub cost_model: PoissonModelBlock,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoissonModelBlock {
    #[default]
    Exact,
    Literal,
}

/// Parse a configuration document, reporting schema errors with their JSON pointer.
pub fn parse_config(text: &str) -> Result<ConfigDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Schema { pointer: json_pointer(&path), message: e.into_inner().to_string() }
    })?;
    doc.validate()?;
    Ok(doc)
}

pub fn load_config(path: &Path) -> Result<ConfigDocument> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

/// `players[0].u.points` becomes `/players/0/u/points`.
fn json_pointer(path: &str) -> String {
    if path == "." {
        return "/".into();
    }
    let mut out = String::new();
    for part in path.split('.') {
        match part.split_once('[') {
            Some((head, rest)) => {
                if !head.is_empty() {
                    out.push('/');
                    out.push_str(head);
                }
                for idx in rest.split('[') {
                    out.push('/');
                    out.push_str(idx.trim_end_matches(']'));
                }
            }
            None => {
                out.push('/');
                out.push_str(part);
            }
        }
    }
    out
}

fn schema(pointer: &str, message: impl Into<String>) -> CliError {
    CliError::Schema { pointer: pointer.into(), message: message.into() }
}

fn interior(delta: f64, p: f64) -> bool {
    p > delta && p < 1.0 - delta
}

impl ConfigDocument {
    fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(schema("/version", format!("unsupported schema version {}, expected {SCHEMA_VERSION}", self.version)));
        }
        let delta = self.grid.delta;
        if let Some(p) = self.prior {
            if !interior(delta, p) {
                return Err(schema("/prior", format!("prior {p} must lie inside ({delta}, {})", 1.0 - delta)));
            }
        }
        for (k, p) in self.pins.iter().enumerate() {
            if !interior(delta, *p) {
                return Err(schema(&format!("/pins/{k}"), format!("pin {p} must lie inside ({delta}, {})", 1.0 - delta)));
            }
        }
        if self.players.is_empty() {
            return Err(schema("/players", "at least one player is required"));
        }
        let n = self.players.len();
        for (k, pl) in self.players.iter().enumerate() {
            if let PayoffBlock::Committee { piv, .. } = pl.u {
                if piv == 0 || piv > n {
                    return Err(schema(&format!("/players/{k}/u/piv"), format!("pivotal voter must lie in 1..={n}")));
                }
            }
        }
        if let Some(sim) = &self.simulation {
            for (k, (a, b)) in sim.region.iter().flatten().enumerate() {
                if !(interior(delta, *a) || *a == delta) || !(interior(delta, *b) || *b == 1.0 - delta) || a >= b {
                    return Err(schema(&format!("/simulation/region/{k}"), format!("interval ({a}, {b}) must lie inside the grid")));
                }
            }
        }
        Ok(())
    }

    pub fn grid_config(&self) -> GridConfig {
        GridConfig { n: self.grid.n, delta: self.grid.delta }
    }

    pub fn process(&self) -> Result<ProcessSpec> {
        Ok(match self.process {
            ProcessBlock::Diffusion { sigma } => ProcessSpec::diffusion(sigma)?,
            ProcessBlock::Poisson { lambda } => ProcessSpec::poisson(lambda)?,
        })
    }

    pub fn rule(&self) -> Result<CoalitionRule> {
        rule_from_block(&self.rule, self.players.len())
    }

    fn cost(&self, k: usize) -> Result<CostSpec> {
        Ok(match &self.players[k].c {
            CostBlock::Const { value } => CostSpec::Constant(*value),
            CostBlock::Pwl { f } => CostSpec::Piecewise(f.to_spec()?),
        })
    }

    fn committee_w(&self, piv: usize) -> Result<f64> {
        match self.players[piv - 1].u {
            PayoffBlock::Committee { v, .. } => Ok(1.0 / (1.0 + v)),
            PayoffBlock::Pwl { .. } => Err(schema(&format!("/players/{}/u", piv - 1), "pivotal voter must have a committee payoff")),
        }
    }

    fn payoff(&self, k: usize) -> Result<PiecewiseLinearSpec> {
        Ok(match &self.players[k].u {
            PayoffBlock::Pwl { f } => f.to_spec()?,
            PayoffBlock::Committee { v, piv } => PiecewiseLinearSpec::committee(*v, self.committee_w(*piv)?)?,
        })
    }

    fn players(&self) -> Result<Vec<PlayerSpec>> {
        (0..self.players.len()).map(|k| Ok(PlayerSpec { u: self.payoff(k)?, c: self.cost(k)? })).collect()
    }

    fn committee_pivot(&self) -> Option<usize> {
        self.players.iter().find_map(|p| match p.u {
            PayoffBlock::Committee { piv, .. } => Some(piv),
            PayoffBlock::Pwl { .. } => None,
        })
    }

    /// Prior from the document, or `w_piv` for committee games.
    pub fn prior(&self) -> Result<f64> {
        match (self.prior, self.committee_pivot()) {
            (Some(p), _) => Ok(p),
            (None, Some(piv)) => self.committee_w(piv),
            (None, None) => Err(schema("/prior", "a prior is required")),
        }
    }

    pub fn game_spec(&self) -> Result<GameSpec> {
        let mut spec = GameSpec::new(self.prior()?, self.players()?, self.process()?, self.rule()?);
        spec.grid = self.grid_config();
        spec.pins = self.pins.clone();
        if let Some(sim) = &self.simulation {
            spec.pins.extend(sim.region.iter().flatten().flat_map(|&(a, b)| [a, b]).filter(|&p| interior(self.grid.delta, p)));
        }
        if let Some(piv) = self.committee_pivot() {
            spec.jumps.push(self.committee_w(piv)?);
        }
        Ok(spec)
    }

    pub fn committee_spec(&self) -> Result<CommitteeSpec> {
        let mut v = Vec::new();
        let mut piv = None;
        for (k, p) in self.players.iter().enumerate() {
            match p.u {
                PayoffBlock::Committee { v: vk, piv: pk } => {
                    if piv.is_some_and(|q| q != pk) {
                        return Err(schema(&format!("/players/{k}/u/piv"), "all members must share one pivotal voter"));
                    }
                    piv = Some(pk);
                    v.push(vk);
                }
                PayoffBlock::Pwl { .. } => return Err(schema(&format!("/players/{k}/u"), "committee games need committee payoffs")),
            }
        }
        let piv = piv.expect("at least one player");
        let costs = (0..self.players.len()).map(|k| self.cost(k)).collect::<Result<Vec<_>>>()?;
        Ok(CommitteeSpec { v, piv: piv - 1, costs, process: self.process()?, rule: self.rule()?, grid: self.grid_config() })
    }

    pub fn poisson_spec(&self) -> Result<PoissonGameSpec> {
        let ProcessBlock::Poisson { lambda } = self.process else {
            return Err(schema("/process/type", "the poisson command needs a poisson process"));
        };
        let cost_model = match self.poisson.map(|p| p.cost_model).unwrap_or_default() {
            PoissonModelBlock::Exact => PoissonCostModel::Exact,
            PoissonModelBlock::Literal => PoissonCostModel::Literal,
        };
        Ok(PoissonGameSpec {
            lambda,
            prior: self.prior()?,
            players: self.players()?,
            rule: self.rule()?,
            grid: self.grid_config(),
            cost_model,
        })
    }

    pub fn sim_config(&self) -> SimConfig {
        let d = SimConfig::default();
        match &self.simulation {
            Some(s) => SimConfig {
                n_paths: s.n_paths.unwrap_or(d.n_paths),
                dt: s.dt.unwrap_or(d.dt),
                seed: s.seed.unwrap_or(d.seed),
                max_time: s.max_time.unwrap_or(d.max_time),
            },
            None => d,
        }
    }

    pub fn statics_axis(&self) -> Result<StaticsAxis> {
        let block = self.compare.as_ref().ok_or_else(|| schema("/compare", "the compare command needs a compare block"))?;
        Ok(match block {
            CompareBlock::Misalignment { f, g, b } => StaticsAxis::Misalignment { f: f.to_spec()?, g: g.to_spec()?, b: b.clone() },
            CompareBlock::Rules { rules } => StaticsAxis::Rules(
                rules.iter().map(|r| rule_from_block(r, self.players.len())).collect::<Result<Vec<_>>>()?,
            ),
        })
    }
}

fn one_based(i: usize, n: usize, pointer: &str) -> Result<usize> {
    if i == 0 || i > n {
        return Err(schema(pointer, format!("player {i} outside 1..={n}")));
    }
    Ok(i - 1)
}

pub fn rule_from_block(block: &RuleBlock, n: usize) -> Result<CoalitionRule> {
    Ok(match block {
        RuleBlock::Unilateral => CoalitionRule::unilateral(n)?,
        RuleBlock::Unanimity => CoalitionRule::unanimity(n)?,
        RuleBlock::Quota { q } => CoalitionRule::quota(*q, n)?,
        RuleBlock::Chair { q, i } => CoalitionRule::chair(*q, one_based(*i, n, "/rule/i")?, n)?,
        RuleBlock::Explicit { coalitions } => {
            let sets = coalitions
                .iter()
                .map(|c| {
                    let members = c.iter().map(|&i| one_based(i, n, "/rule/coalitions")).collect::<Result<Vec<_>>>()?;
                    Ok(PlayerSet::from_players(&members))
                })
                .collect::<Result<Vec<_>>>()?;
            collective_stopping::normalize_rule(&sets, n)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAME: &str = r#"{
        "version": 1,
        "prior": 0.5,
        "grid": {"n": 64, "delta": 0.001},
        "process": {"type": "diffusion", "sigma": 1.0},
        "players": [
            {"u": {"type": "pwl", "points": [[0, 1], [0.5, 0], [1, 1]]}, "c": {"type": "const", "value": 0.1}},
            {"u": {"type": "pwl", "breakpoints": [0, 0.5, 1], "left": [0, 0, 1], "right": [0, 1, 1]}, "c": {"type": "const", "value": 0.2}}
        ],
        "rule": {"type": "unanimity"}
    }"#;

    #[test]
    fn parses_a_game() {
        let doc = parse_config(GAME).unwrap();
        let spec = doc.game_spec().unwrap();
        assert_eq!(spec.players.len(), 2);
        assert_eq!(spec.rule, CoalitionRule::unanimity(2).unwrap());
        assert_eq!(spec.players[1].u.jumps(), vec![0.5]);
    }

    #[test]
    fn schema_errors_carry_a_pointer() {
        let bad = GAME.replace(r#""value": 0.2"#, r#""value": "x""#);
        match parse_config(&bad) {
            Err(CliError::Schema { pointer, .. }) => assert!(pointer.starts_with("/players/1/c"), "{pointer}"),
            other => panic!("{other:?}"),
        }
        let bad = GAME.replace(r#""prior": 0.5"#, r#""prior": 0.9999"#);
        match parse_config(&bad) {
            Err(CliError::Schema { pointer, .. }) => assert_eq!(pointer, "/prior"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rules_are_one_based() {
        let r = rule_from_block(&RuleBlock::Explicit { coalitions: vec![vec![1, 3], vec![2]] }, 3).unwrap();
        assert!(r.is_decisive(PlayerSet::from_players(&[0, 2])));
        assert!(r.is_decisive(PlayerSet::from_players(&[1])));
        assert!(!r.is_decisive(PlayerSet::from_players(&[0])));
        assert!(rule_from_block(&RuleBlock::Chair { q: 2, i: 4 }, 3).is_err());
    }

    #[test]
    fn committee_prior_defaults_to_pivot_threshold() {
        let text = r#"{
            "version": 1,
            "grid": {"n": 64, "delta": 0.001},
            "process": {"type": "diffusion", "sigma": 1.0},
            "players": [
                {"u": {"type": "committee", "v": 0.5, "piv": 2}, "c": {"type": "const", "value": 0.1}},
                {"u": {"type": "committee", "v": 1.0, "piv": 2}, "c": {"type": "const", "value": 0.1}},
                {"u": {"type": "committee", "v": 2.0, "piv": 2}, "c": {"type": "const", "value": 0.1}}
            ],
            "rule": {"type": "quota", "q": 2}
        }"#;
        let doc = parse_config(text).unwrap();
        assert_eq!(doc.prior().unwrap(), 0.5);
        let spec = doc.committee_spec().unwrap();
        assert_eq!(spec.piv, 1);
        assert_eq!(spec.w_piv(), 0.5);
    }
}
