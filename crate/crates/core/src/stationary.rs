//! Stationary states `k_alpha(x)` with `A(x, k_alpha(x)) = alpha`, their grid
//! samplings, and the a priori bound `M` on the solution.

use crate::error::{Error, Result};
use crate::flux::{FluxModel, Side, TOL_ROOT};
use crate::scheme::{Grid1D, SolverState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// Increasing branch, `k >= u_M^+`.
    Plus,
    /// Decreasing branch, `k <= u_M^-`.
    Minus,
    /// `alpha = 0` only: the plateau point `u_M = beta^{-1}(x, 0)`.
    Plateau,
}

/// A stationary state sampled at the cell centers, ghosts included.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryState {
    pub alpha: f64,
    pub branch: Branch,
    pub values: Vec<f64>,
    pub ghost_left: f64,
    pub ghost_right: f64,
}

impl StationaryState {
    /// Ghost, interior values, ghost.
    pub fn extended(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.values.len() + 2);
        v.push(self.ghost_left);
        v.extend_from_slice(&self.values);
        v.push(self.ghost_right);
        v
    }

    pub fn to_state(&self) -> SolverState {
        SolverState::new(self.values.clone(), self.ghost_left, self.ghost_right)
    }

    pub fn max_abs(&self) -> f64 {
        self.extended().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `max_j A(x_j, u_j^0)` over the cells and both ghosts.
pub fn compute_alpha_bar(state0: &SolverState, grid: &Grid1D, model: &FluxModel) -> f64 {
    grid.extended_centers()
        .iter()
        .zip(state0.extended())
        .map(|(x, u)| model.at(*x).flux(u))
        .fold(0.0, f64::max)
}

/// Number of intervals of the model's breakpoint set that hold no grid center.
/// A nonzero count means the grid maximum can undershoot the true supremum.
pub fn unsampled_intervals(grid: &Grid1D, model: &FluxModel) -> usize {
    let xs = grid.extended_centers();
    let b = model.transform().breakpoints();
    if b.is_empty() {
        return 0;
    }
    crate::coefficient::Breakpoints::new(b.to_vec())
        .map(|bp| bp.intervals_without_samples(&xs))
        .unwrap_or(0)
}

/// The point on the requested branch where `A(x, .) = alpha`.
pub fn solve_k_alpha(x: f64, alpha: f64, branch: Branch, model: &FluxModel) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha must be finite and nonnegative, got {alpha}")));
    }
    let local = model.at(x);
    let side = match branch {
        Branch::Plus => Side::Plus,
        Branch::Minus => Side::Minus,
        Branch::Plateau => {
            if alpha != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "the plateau branch exists only at alpha = 0, got {alpha}"
                )));
            }
            return local.plateau().map(|p| p.u_m);
        }
    };
    let z = model.profile().level_inverse(alpha, side).ok_or_else(|| {
        Error::RootFailure(format!("flux level {alpha} is not attained on the {side:?} branch"))
    })?;
    let k = local.beta.inverse(z)?;
    let residual = (local.flux(k) - alpha).abs();
    // The local Lipschitz constant converts the inverse's tolerance into a flux residual.
    let slack = TOL_ROOT * (1.0 + model.lipschitz_g(z.abs() + 1.0)) + 4.0 * f64::EPSILON * alpha;
    if residual > slack {
        return Err(Error::RootFailure(format!(
            "A(x, k) - alpha = {residual:e} at x = {x}, alpha = {alpha}"
        )));
    }
    Ok(k)
}

pub fn discrete_stationary_state(grid: &Grid1D, alpha: f64, branch: Branch, model: &FluxModel) -> Result<StationaryState> {
    let ext = grid
        .extended_centers()
        .iter()
        .map(|x| solve_k_alpha(*x, alpha, branch, model))
        .collect::<Result<Vec<_>>>()?;
    let m = grid.m_cells();
    Ok(StationaryState {
        alpha,
        branch,
        values: ext[1..=m].to_vec(),
        ghost_left: ext[0],
        ghost_right: ext[m + 1],
    })
}

/// The bound `M` on `|u|`: the largest `|k^{+-}_{alpha_bar}|` on the grid, or
/// for `alpha_bar = 0` the larger of `|u0|` and `sup |u_M^{+-}|`.
pub fn solution_bound(state0: &SolverState, grid: &Grid1D, model: &FluxModel, alpha_bar: f64) -> Result<f64> {
    if alpha_bar == 0.0 {
        let data = state0.extended().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut plateau: f64 = 0.0;
        for x in grid.extended_centers() {
            let p = model.plateau_bounds(x)?;
            plateau = plateau.max(p.u_m_minus.abs()).max(p.u_m_plus.abs());
        }
        return Ok(data.max(plateau));
    }
    let plus = discrete_stationary_state(grid, alpha_bar, Branch::Plus, model)?;
    let minus = discrete_stationary_state(grid, alpha_bar, Branch::Minus, model)?;
    Ok(plus.max_abs().max(minus.max_abs()))
}
