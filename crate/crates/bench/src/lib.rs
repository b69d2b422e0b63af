//! Shared fixtures for the benchmarks.

use collective_stopping::{CoalitionRule, CostSpec, Game, GameSpec, PiecewiseLinearSpec, PlayerSpec, ProcessSpec};

/// Two players with W-shaped payoffs on an `n`-point grid.
pub fn two_player_game(n: usize, rule: CoalitionRule) -> Game {
    let u1 = PiecewiseLinearSpec::continuous(&[(0.0, 1.0), (0.3, 0.4), (0.5, 0.7), (0.7, 0.3), (1.0, 1.0)]).unwrap();
    let u2 = PiecewiseLinearSpec::continuous(&[(0.0, 0.8), (0.4, 0.2), (0.6, 0.5), (0.8, 0.2), (1.0, 1.2)]).unwrap();
    let players = vec![PlayerSpec { u: u1, c: CostSpec::Constant(0.02) }, PlayerSpec { u: u2, c: CostSpec::Constant(0.03) }];
    let spec = GameSpec::new(0.5, players, ProcessSpec::diffusion(1.0).unwrap(), rule).with_grid(n, 1e-3);
    Game::new(&spec).unwrap()
}
