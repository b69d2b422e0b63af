//! Solver and simulator for collective information-acquisition stopping games.
//!
//! Players watch a public belief martingale and each votes, at every belief, on
//! whether to keep sampling. A decisive coalition that wants to stop ends the game.
//! Markov-perfect equilibria are certified through constrained concave closures of
//! each player's payoff net of the ex-ante cost transform.

pub mod applications;
pub mod coalitions;
pub mod committee;
pub mod concavify;
pub mod costs;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod grid;
pub mod montecarlo;
pub mod process;
pub mod region;

pub use applications::{
    poisson_phi, poisson_potential, poisson_solve, war_certify, war_solve, Party, PoissonCostModel, PoissonGame, PoissonGameSpec,
    PoissonSolution, War, WarSolution, WarSpec,
};
pub use coalitions::{classify_players, collective_region, is_decisive, normalize_rule, player_envelopes, CoalitionRule, PlayerSet};
pub use committee::{
    pivotal_players, strong_check, strong_solve, BoundSide, Committee, CommitteeSpec, Strength, StrongCertificate, StrongVerdict,
};
pub use concavify::{chord_value, component_bounds, concave_closure, constrained_closure, constrained_closure_all, full_closure, ClosureResult};
pub use costs::{cost_transform, net_payoff, phi_closed_form_diffusion, phi_transform, CostSpec, CostTransform};
pub use distributions::{binary_from_bounds, is_mpc, is_mps_supported, BinaryPolicy, PosteriorDistribution};
pub use equilibrium::{
    certify, check_equilibrium, comparative_statics, efficient_region, enumerate_interval_equilibria, extremal_equilibria,
    minimal_elements, u_bar, u_bar_index, CertifiedRegion, EnumerationScope, EquilibriumCertificate, Extremal, Game, GameSpec, GridConfig,
    PlayerSlack, PlayerSpec, Profile, StaticsAxis, StaticsReport, WeightVector,
};
pub use error::{Error, Result};
pub use grid::{build_grid, BeliefGrid, AUX_EPS, DEFAULT_DELTA, DEFAULT_N, GridFunction, PiecewiseLinearSpec, Side};
pub use montecarlo::{
    no_news_logit_slope, simulate, simulate_poisson, verify_cost_identity, verify_poisson_cost_identity, CostIdentityReport, Estimate,
    SimConfig, SimReport,
};
pub use process::{qv_at, CustomQvSpec, DiffusionSpec, PoissonSpec, ProcessSpec};
pub use region::SamplingRegion;

/// Environment variable capping the worker threads used by parallel scans.
pub const THREADS_ENV: &str = "COLLECTIVE_STOPPING_THREADS";

/// Size the global thread pool from [`THREADS_ENV`] when it is set. Returns the number
/// of threads in use. Calling it after the pool exists only reports the current size.
pub fn init_threads_from_env() -> Result<usize> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("thread pool already initialised");
        }
    }
    Ok(rayon::current_num_threads())
}
