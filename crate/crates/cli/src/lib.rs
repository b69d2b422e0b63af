//! Command-line front end: JSON game configuration in, certificates and CSV/SVG out.

pub mod config;
pub mod error;
pub mod output;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use collective_stopping::{
    certify, committee::Strength, comparative_statics, efficient_region, enumerate_interval_equilibria, extremal_equilibria,
    init_threads_from_env, minimal_elements, poisson_solve, simulate, simulate_poisson, strong_solve, verify_cost_identity,
    verify_poisson_cost_identity, war_certify, war_solve, Committee, EnumerationScope, Error as SolverError, Game, GridConfig,
    PoissonGame, Profile, SamplingRegion, War, WarSpec, WeightVector, DEFAULT_N,
};
use serde_json::{json, Value};

use crate::config::{load_config, ConfigDocument, ProcessBlock, ScopeBlock};
use crate::error::{CliError, Result};
use crate::output::{certificate_value, closures_csv, closures_svg, region_json, region_value, regions_csv, write_file};

/// Exit code for a computation that ran but failed certification.
pub const EXIT_NOT_CERTIFIED: i32 = 2;
/// Exit code for bad input.
pub const EXIT_INPUT: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "collective-stopping", version, about = "Equilibria of collective information-acquisition stopping games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Game configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write closures.svg.
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScopeArg {
    Single,
    TwoInterval,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify a uniform sampling region.
    Check {
        #[command(flatten)]
        config: ConfigArgs,
        /// Interval `lo,hi`; repeat for several components.
        #[arg(long = "region", required = true, value_parser = parse_interval)]
        region: Vec<(f64, f64)>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// List every certified interval equilibrium.
    Enumerate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum)]
        scope: Option<ScopeArg>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Maximum and minimal equilibria with the efficient region.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Welfare weights for the efficient region, one per player.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Strong equilibria of a committee through its pivotal players.
    Committee {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// War of information between two opposed parties.
    War {
        /// Flow cost of party 1, who wins above one half
        #[arg(long)]
        c1: f64,
        /// Flow cost of party 2, who wins at or below one half
        #[arg(long)]
        c2: f64,
        /// Signal noise
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Grid points
        #[arg(long, default_value_t = DEFAULT_N)]
        n: usize,
        /// Boundary margin of the grid
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Conclusive good-news learning with one or two players.
    Poisson {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo check of the cost identity for a region (or a Poisson lower bound).
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Interval `lo,hi`; overrides the config region
        #[arg(long = "region", value_parser = parse_interval)]
        region: Vec<(f64, f64)>,
        /// Lower stopping bound for a Poisson game
        #[arg(long)]
        lower: Option<f64>,
        /// Number of paths
        #[arg(long)]
        paths: Option<usize>,
        /// Time step
        #[arg(long)]
        dt: Option<f64>,
        /// RNG seed
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Comparative statics along a misalignment or rule axis.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if !(a < b) {
        return Err(format!("interval ({a}, {b}) is empty"));
    }
    Ok((a, b))
}

/// Result of a command: the JSON summary printed to stdout and whether it certified.
struct Report {
    summary: Value,
    certified: bool,
}

fn ensure_dir(out: &Option<PathBuf>) -> Result<Option<&Path>> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.display().to_string(), source })?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_closures(dir: &Path, game: &Game, region: &SamplingRegion, svg: bool) -> Result<()> {
    write_file(&dir.join("closures.csv"), &closures_csv(game, region)?)?;
    if svg {
        write_file(&dir.join("closures.svg"), &closures_svg(game, region)?)?;
    }
    Ok(())
}

fn build_game(doc: &ConfigDocument, extra_pins: &[(f64, f64)]) -> Result<Game> {
    if matches!(doc.process, ProcessBlock::Poisson { .. }) {
        return Err(CliError::Argument("Poisson games are handled by the poisson and simulate commands".into()));
    }
    let mut spec = doc.game_spec()?;
    spec.pins.extend(extra_pins.iter().flat_map(|&(a, b)| [a, b]).filter(|&p| p > spec.grid.delta && p < 1.0 - spec.grid.delta));
    Ok(Game::new(&spec)?)
}

fn vacuous_warning(game: &Game) {
    let (uni, una) = game.rule().classify_players();
    if uni.is_empty() && una.is_empty() {
        log::warn!(
            "no player can stop alone and no player is in every decisive coalition: every uniform region passes; \
             use the committee command for the strong-equilibrium refinement"
        );
    }
}

fn check(doc: &ConfigDocument, intervals: &[(f64, f64)], out: &OutArgs) -> Result<Report> {
    let game = build_game(doc, intervals)?;
    vacuous_warning(&game);
    let region = game.region(intervals)?;
    let cert = certify(&game, &region)?;
    if cert.edge_warning {
        log::warn!("the region touches a grid edge; results near the edge depend on the clip margin");
    }
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("certificate.json"), &serde_json::to_string_pretty(&certificate_value(&cert))?)?;
        write_file(&dir.join("region.json"), &region_json(&region))?;
        write_closures(dir, &game, &region, out.svg)?;
    }
    Ok(Report { certified: cert.pass, summary: certificate_value(&cert) })
}

fn scope_of(doc: &ConfigDocument, arg: Option<ScopeArg>) -> EnumerationScope {
    let from_doc = doc.enumeration.map(|e| e.scope);
    match (arg, from_doc) {
        (Some(ScopeArg::TwoInterval), _) | (None, Some(ScopeBlock::TwoInterval)) => EnumerationScope::TwoInterval,
        _ => EnumerationScope::Single,
    }
}

fn enumerate(doc: &ConfigDocument, scope: Option<ScopeArg>, out: &OutArgs) -> Result<Report> {
    let game = build_game(doc, &[])?;
    vacuous_warning(&game);
    let found = enumerate_interval_equilibria(&game, scope_of(doc, scope))?;
    let regions: Vec<SamplingRegion> = found.iter().map(|c| c.region.clone()).collect();
    let maximum = match extremal_equilibria(&game, &regions) {
        Ok(e) => Some(e.maximum),
        Err(SolverError::UnionNotCertified { violation }) => {
            log::warn!("the union of the listed equilibria fails certification (violation {violation:e})");
            None
        }
        Err(SolverError::InvalidParameter(_)) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("regions.csv"), &regions_csv(&found))?;
        let all: Vec<Value> = regions.iter().map(region_value).collect();
        write_file(&dir.join("regions.json"), &Value::Array(all).to_string())?;
        let shown = maximum.clone().unwrap_or_else(|| SamplingRegion::empty(game.grid().clone()));
        write_closures(dir, &game, &shown, out.svg)?;
    }
    Ok(Report {
        certified: true,
        summary: json!({
            "count": found.len(),
            "maximum": maximum.as_ref().map(region_value),
            "minimal": minimal_elements(&regions).iter().map(region_value).collect::<Vec<_>>(),
        }),
    })
}

fn solve(doc: &ConfigDocument, weights: Option<Vec<f64>>, out: &OutArgs) -> Result<Report> {
    let game = build_game(doc, &[])?;
    vacuous_warning(&game);
    let lambda = match weights {
        Some(w) => WeightVector::new(w)?,
        None => WeightVector::equal(game.n_players()),
    };
    let efficient = efficient_region(&game, &lambda)?;
    let found = enumerate_interval_equilibria(&game, EnumerationScope::Single)?;
    let regions: Vec<SamplingRegion> = found.iter().map(|c| c.region.clone()).collect();
    let (summary, certified, shown) = match extremal_equilibria(&game, &regions) {
        Ok(e) => (
            json!({
                "maximum": region_value(&e.maximum),
                "maximum_certificate": certificate_value(&e.maximum_certificate),
                "minimal": e.minimal.iter().map(region_value).collect::<Vec<_>>(),
                "efficient": region_value(&efficient),
                "weights": lambda.weights(),
            }),
            true,
            e.maximum,
        ),
        Err(SolverError::UnionNotCertified { violation }) => (
            json!({ "error": "union of equilibria not certified", "violation": violation, "efficient": region_value(&efficient) }),
            false,
            SamplingRegion::empty(game.grid().clone()),
        ),
        Err(e) => return Err(e.into()),
    };
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("maximum.json"), &region_json(&shown))?;
        write_file(&dir.join("efficient.json"), &region_json(&efficient))?;
        write_closures(dir, &game, &shown, out.svg)?;
    }
    Ok(Report { summary, certified })
}

fn committee(doc: &ConfigDocument, out: &OutArgs) -> Result<Report> {
    let com = Committee::new(doc.committee_spec()?)?;
    let certs = strong_solve(&com)?;
    let certified = certs.iter().filter(|c| c.strength == Strength::Strong).all(|c| c.deviation_scan.pass);
    let (l, u) = collective_stopping::pivotal_players(&com.spec().rule);
    let summary = json!({
        "w_piv": com.spec().w_piv(),
        "pivotal": { "lower": l + 1, "upper": u + 1 },
        "fixed_points": certs,
    });
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("committee.json"), &serde_json::to_string_pretty(&summary)?)?;
        if let Some(top) = certs.iter().find(|c| c.maximum) {
            let region = SamplingRegion::interval_indices(com.game().grid().clone(), top.lower_index, top.upper_index);
            write_closures(dir, com.game(), &region, out.svg)?;
        }
    }
    Ok(Report { summary, certified })
}

fn war(c1: f64, c2: f64, sigma: f64, n: usize, delta: f64, out: &OutArgs) -> Result<Report> {
    let war = War::new(WarSpec { c1, c2, sigma, grid: GridConfig { n, delta } })?;
    let sol = war_solve(&war)?;
    let cert = war_certify(&war, &sol)?;
    let summary = json!({ "solution": sol, "certificate": certificate_value(&cert), "cell": war.grid().h() });
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("war.json"), &serde_json::to_string_pretty(&summary)?)?;
        let (b1, b2) = war.response_tables();
        let xs = war.grid().points();
        let half = war.half_index();
        let mut csv = String::from("side,bound,response\n");
        for (k, r) in b1.iter().enumerate() {
            csv.push_str(&format!("b1,{},{}\n", xs[half + 1 + k], xs[*r]));
        }
        for (k, r) in b2.iter().enumerate() {
            csv.push_str(&format!("B2,{},{}\n", xs[k], xs[*r]));
        }
        write_file(&dir.join("responses.csv"), &csv)?;
    }
    Ok(Report { summary, certified: cert.pass })
}

fn poisson(doc: &ConfigDocument, out: &OutArgs) -> Result<Report> {
    let game = PoissonGame::new(doc.poisson_spec()?)?;
    let sol = poisson_solve(&game)?;
    let summary = json!({ "solution": sol, "note": "scan-only check of the reduced lower-bound program" });
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("poisson.json"), &serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(Report { certified: sol.pass, summary })
}

fn histogram_csv(hist: &[usize]) -> String {
    let bins = hist.len() as f64;
    let mut out = String::from("lo,hi,count\n");
    for (k, c) in hist.iter().enumerate() {
        out.push_str(&format!("{},{},{c}\n", k as f64 / bins, (k + 1) as f64 / bins));
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    doc: &ConfigDocument,
    region: &[(f64, f64)],
    lower: Option<f64>,
    paths: Option<usize>,
    dt: Option<f64>,
    seed: Option<u64>,
    out: &OutArgs,
) -> Result<Report> {
    let mut cfg = doc.sim_config();
    cfg.n_paths = paths.unwrap_or(cfg.n_paths);
    cfg.dt = dt.unwrap_or(cfg.dt);
    cfg.seed = seed.unwrap_or(cfg.seed);
    let sim_block = doc.simulation.as_ref();
    let (report, identity) = if matches!(doc.process, ProcessBlock::Poisson { .. }) {
        let game = PoissonGame::new(doc.poisson_spec()?)?;
        let lower = lower
            .or_else(|| sim_block.and_then(|s| s.lower))
            .ok_or_else(|| CliError::Argument("a Poisson simulation needs --lower".into()))?;
        (simulate_poisson(&game, lower, &cfg)?, verify_poisson_cost_identity(&game, lower, &cfg)?)
    } else {
        let intervals: Vec<(f64, f64)> = if region.is_empty() {
            sim_block.and_then(|s| s.region.clone()).unwrap_or_default()
        } else {
            region.to_vec()
        };
        let game = build_game(doc, &intervals)?;
        let profile = Profile::Uniform(game.region(&intervals)?);
        (simulate(&game, &profile, &cfg)?, verify_cost_identity(&game, &profile, &cfg)?)
    };
    if report.clamped > collective_stopping::montecarlo::CLAMP_WARNING {
        log::warn!("{:.3}% of paths were clamped at the grid edge", 100.0 * report.clamped);
    }
    let summary = json!({ "config": cfg, "simulation": report, "cost_identity": identity });
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("simulation.json"), &serde_json::to_string_pretty(&summary)?)?;
        write_file(&dir.join("histogram.csv"), &histogram_csv(&report.histogram))?;
    }
    Ok(Report { certified: identity.pass, summary })
}

fn compare(doc: &ConfigDocument, out: &OutArgs) -> Result<Report> {
    let spec = doc.game_spec()?;
    let report = comparative_statics(&spec, &doc.statics_axis()?)?;
    let levels: Vec<Value> = report
        .levels
        .iter()
        .map(|l| {
            json!({
                "label": l.label,
                "count": l.equilibria.len(),
                "maximum": l.maximum.as_ref().map(region_value),
                "maximum_certified": l.maximum_certified,
                "minimal": l.minimal.iter().map(region_value).collect::<Vec<_>>(),
                "vacuous": l.vacuous,
            })
        })
        .collect();
    let summary = json!({ "levels": levels, "steps": report.steps, "violations": report.violations() });
    if let Some(dir) = ensure_dir(&out.out)? {
        write_file(&dir.join("compare.json"), &serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(Report { certified: report.violations() == 0, summary })
}

fn dispatch(cli: Cli) -> Result<Report> {
    match cli.command {
        Command::Check { config, region, out } => check(&load_config(&config.config)?, &region, &out),
        Command::Enumerate { config, scope, out } => enumerate(&load_config(&config.config)?, scope, &out),
        Command::Solve { config, weights, out } => solve(&load_config(&config.config)?, weights, &out),
        Command::Committee { config, out } => committee(&load_config(&config.config)?, &out),
        Command::War { c1, c2, sigma, n, delta, out } => war(c1, c2, sigma, n, delta, &out),
        Command::Poisson { config, out } => poisson(&load_config(&config.config)?, &out),
        Command::Simulate { config, region, lower, paths, dt, seed, out } => {
            simulate_cmd(&load_config(&config.config)?, &region, lower, paths, dt, seed, &out)
        }
        Command::Compare { config, out } => compare(&load_config(&config.config)?, &out),
    }
}

/// Parse `argv`, run the command and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_threads_from_env() {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    match dispatch(cli) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
            // a closed pipe on stdout is not an error of the computation
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if report.certified {
                0
            } else {
                EXIT_NOT_CERTIFIED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
