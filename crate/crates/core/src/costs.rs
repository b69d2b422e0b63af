//! Ex-ante cost transform: convex `phi` with `phi'' = 2 c / qv`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BeliefGrid, GridFunction, PiecewiseLinearSpec, Side};
use crate::process::{qv_at, ProcessSpec};

/// Flow cost of sampling as a function of the belief.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSpec {
    Constant(f64),
    Piecewise(PiecewiseLinearSpec),
}

impl CostSpec {
    pub fn eval(&self, p: f64, side: Side) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Piecewise(f) => f.eval(p, side),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(c) if !(*c >= 0.0 && c.is_finite()) => Err(Error::NegativeCost { belief: f64::NAN, value: *c }),
            Self::Piecewise(f) => {
                let bad = f
                    .breakpoints()
                    .iter()
                    .zip(f.left_values().iter().zip(f.right_values()))
                    .find(|(_, (l, r))| **l < 0.0 || **r < 0.0);
                match bad {
                    Some((b, (l, r))) => Err(Error::NegativeCost { belief: *b, value: l.min(*r) }),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Constant(c) => *c == 0.0,
            Self::Piecewise(f) => f.left_values().iter().chain(f.right_values()).all(|&v| v == 0.0),
        }
    }

    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Self::Constant(_) => Vec::new(),
            Self::Piecewise(f) => f.jumps(),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Constant(_) => Vec::new(),
            Self::Piecewise(f) => f.breakpoints().to_vec(),
        }
    }
}

/// Tabulated `phi` together with its slope; the curvature is available pointwise.
#[derive(Debug, Clone)]
pub struct CostTransform {
    pub phi: GridFunction,
    pub slope: Vec<f64>,
    pub anchor: usize,
}

/// Integrate `phi'' = g` twice from the anchor index with `phi = phi' = 0` there.
///
/// Each cell is integrated by Simpson's rule using the density at both ends and the
/// midpoint; `g(k, x, side)` supplies one-sided values at grid points so that density
/// jumps at grid points are respected.
pub(crate) fn integrate_twice(
    grid: &BeliefGrid,
    anchor: usize,
    g: impl Fn(f64, Side) -> Result<f64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.len();
    let mut phi = vec![0.0; n];
    let mut slope = vec![0.0; n];
    for k in anchor..n - 1 {
        let (a, b) = (grid.x(k), grid.x(k + 1));
        let h = b - a;
        let gl = g(a, Side::Right)?;
        let gm = g(0.5 * (a + b), Side::Right)?;
        let gr = g(b, Side::Left)?;
        phi[k + 1] = phi[k] + h * slope[k] + h * h / 6.0 * (gl + 2.0 * gm);
        slope[k + 1] = slope[k] + h / 6.0 * (gl + 4.0 * gm + gr);
    }
    for k in (0..anchor).rev() {
        let (a, b) = (grid.x(k), grid.x(k + 1));
        let h = b - a;
        let gl = g(a, Side::Right)?;
        let gm = g(0.5 * (a + b), Side::Right)?;
        let gr = g(b, Side::Left)?;
        phi[k] = phi[k + 1] - h * slope[k + 1] + h * h / 6.0 * (2.0 * gm + gr);
        slope[k] = slope[k + 1] - h / 6.0 * (gl + 4.0 * gm + gr);
    }
    Ok((phi, slope))
}

fn anchor_index(grid: &BeliefGrid, z: f64) -> Result<usize> {
    grid.index_of(z).ok_or_else(|| Error::InvalidBelief(z, "cost-transform anchor must be a grid point".into()))
}

/// Full cost transform including slopes.
pub fn cost_transform(c: &CostSpec, process: &ProcessSpec, grid: &Arc<BeliefGrid>, z: f64) -> Result<CostTransform> {
    c.validate()?;
    let anchor = anchor_index(grid, z)?;
    if c.is_zero() {
        let zeros = vec![0.0; grid.len()];
        return Ok(CostTransform { phi: GridFunction::new(grid.clone(), zeros.clone())?, slope: zeros, anchor });
    }
    let (phi, slope) = integrate_twice(grid, anchor, |x, side| {
        let cost = c.eval(x, side);
        if cost < 0.0 {
            return Err(Error::NegativeCost { belief: x, value: cost });
        }
        Ok(2.0 * cost / qv_at(process, x)?)
    })?;
    Ok(CostTransform { phi: GridFunction::new(grid.clone(), phi)?, slope, anchor })
}

/// `phi` with `phi(z) = phi'(z) = 0` and `phi'' = 2 c / qv`.
pub fn phi_transform(c: &CostSpec, process: &ProcessSpec, grid: &Arc<BeliefGrid>, z: f64) -> Result<GridFunction> {
    cost_transform(c, process, grid, z).map(|t| t.phi)
}

/// Second derivative of `phi` at `p`.
pub fn phi_curvature(c: &CostSpec, process: &ProcessSpec, p: f64, side: Side) -> Result<f64> {
    Ok(2.0 * c.eval(p, side) / qv_at(process, p)?)
}

/// Closed form `(c sigma^2 / 2)(2p - 1) ln(p / (1 - p))` for constant cost under diffusion.
/// It already has value and slope zero at one half.
pub fn phi_closed_form_diffusion(c_const: f64, sigma: f64, grid: &Arc<BeliefGrid>) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |p| closed_form_value(c_const, sigma, p))
}

pub(crate) fn closed_form_value(c: f64, sigma: f64, p: f64) -> f64 {
    0.5 * c * sigma * sigma * (2.0 * p - 1.0) * (p / (1.0 - p)).ln()
}

/// Pointwise `u - phi`.
pub fn net_payoff(u: &GridFunction, phi: &GridFunction) -> Result<GridFunction> {
    u.sub(phi)
}
