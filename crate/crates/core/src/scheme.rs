//! Grid, time stepping and the generalized Godunov scheme.
//!
//! The scheme marches `u_j^{n+1} = u_j^n - lambda (F_{j+1/2} - F_{j-1/2})`
//! with the interface flux
//!
//! ```text
//! F(u, v, x_l, x_r) = max{ A(x_l, max(u, u_M(x_l))), A(x_r, min(v, u_M(x_r))) }
//! ```
//!
//! where `u_M(x) = beta^{-1}(x, 0)`. One frozen ghost cell sits on each side
//! of the window; it holds the far-field value of the initial data.

use std::collections::BTreeSet;

use crate::diagnostics::{DiagnosticsRecord, Monitor};
use crate::error::{ensure_finite, Error, Result};
use crate::flux::{BoundSet, FluxModel, LocalFlux};

/// Slack allowed on the L-infinity bound after each step.
pub const LINF_SLACK: f64 = 1e-10;

/// Default fraction of the stability limit used when picking lambda.
pub const DEFAULT_CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    x_left: f64,
    x_right: f64,
    m_cells: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, m_cells: usize) -> Result<Self> {
        ensure_finite("x_left", x_left)?;
        ensure_finite("x_right", x_right)?;
        if x_right <= x_left {
            return Err(Error::InvalidInput(format!(
                "empty domain [{x_left}, {x_right}]"
            )));
        }
        if m_cells < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 cells, got {m_cells}"
            )));
        }
        Ok(Self {
            x_left,
            x_right,
            m_cells,
            dx: (x_right - x_left) / m_cells as f64,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn m_cells(&self) -> usize {
        self.m_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center of interior cell `j`; `j = -1` and `j = m` are the ghosts.
    pub fn center(&self, j: isize) -> f64 {
        self.x_left + (j as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m_cells as isize).map(|j| self.center(j)).collect()
    }

    pub fn ghost_left_x(&self) -> f64 {
        self.center(-1)
    }

    pub fn ghost_right_x(&self) -> f64 {
        self.center(self.m_cells as isize)
    }

    /// Ghost, interior cells, ghost.
    pub fn extended_centers(&self) -> Vec<f64> {
        (-1..=self.m_cells as isize).map(|j| self.center(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TimeStepping {
    pub lambda: f64,
    pub dt: f64,
    pub t_final: f64,
    pub n_steps: usize,
}

impl TimeStepping {
    /// Chooses `lambda = cfl_safety / (2 L_g L_beta)`, then lands exactly on
    /// `t_final` with `N = max(1, round(t_final / dt))` and `dt = t_final / N`.
    pub fn from_cfl(grid: &Grid1D, bounds: &BoundSet, t_final: f64, cfl_safety: f64) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::InvalidInput(format!("t_final must be positive, got {t_final}")));
        }
        if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "cfl_safety must lie in (0, 1], got {cfl_safety}"
            )));
        }
        let speed = bounds.l_g * bounds.l_beta;
        let lambda0 = if speed > 0.0 {
            0.5 * cfl_safety / speed
        } else {
            0.5 * cfl_safety
        };
        let dt0 = lambda0 * grid.dx();
        let mut n_steps = ((t_final / dt0).round() as usize).max(1);
        loop {
            let ts = Self::landing(grid, t_final, n_steps);
            if ts.satisfies_cfl(bounds) {
                return Ok(ts);
            }
            n_steps += 1;
        }
    }

    fn landing(grid: &Grid1D, t_final: f64, n_steps: usize) -> Self {
        let dt = t_final / n_steps as f64;
        Self {
            lambda: dt / grid.dx(),
            dt,
            t_final,
            n_steps,
        }
    }

    /// Explicit `lambda` and step count, e.g. replayed from a manifest.
    pub fn fixed(grid: &Grid1D, lambda: f64, n_steps: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
        }
        let dt = lambda * grid.dx();
        Ok(Self {
            lambda,
            dt,
            t_final: dt * n_steps as f64,
            n_steps,
        })
    }

    pub fn satisfies_cfl(&self, bounds: &BoundSet) -> bool {
        self.lambda * bounds.l_g * bounds.l_beta <= 0.5
    }

    pub fn time_of(&self, level: usize) -> f64 {
        if level == self.n_steps {
            self.t_final
        } else {
            level as f64 * self.dt
        }
    }

    /// Nearest level to time `t`, clamped to `[0, N]`.
    pub fn level_of(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.n_steps)
    }
}

/// Cell values at one time level, with the two frozen ghosts.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub level: usize,
    pub u: Vec<f64>,
    pub ghost_left: f64,
    pub ghost_right: f64,
}

impl SolverState {
    pub fn new(u: Vec<f64>, ghost_left: f64, ghost_right: f64) -> Self {
        Self {
            level: 0,
            u,
            ghost_left,
            ghost_right,
        }
    }

    /// Ghost, interior values, ghost.
    pub fn extended(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.u.len() + 2);
        v.push(self.ghost_left);
        v.extend_from_slice(&self.u);
        v.push(self.ghost_right);
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Point-samples `u0` at the cell centers (and the ghost centers).
pub fn sample_initial_data(u0: impl Fn(f64) -> f64, grid: &Grid1D) -> Result<SolverState> {
    let ext: Vec<f64> = grid.extended_centers().into_iter().map(&u0).collect();
    if let Some((i, v)) = ext.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "initial data is {v} at x = {}",
            grid.extended_centers()[i]
        )));
    }
    let m = grid.m_cells();
    Ok(SolverState::new(ext[1..=m].to_vec(), ext[0], ext[m + 1]))
}

/// Godunov flux for `g`: `max{ g(max(p, 0)), g(min(q, 0)) }`.
pub fn godunov_flux_g(p: f64, q: f64, model: &FluxModel) -> f64 {
    model.g(p.max(0.0)).max(model.g(q.min(0.0)))
}

/// The generalized Godunov interface flux between a left state `u` at `x_l`
/// and a right state `v` at `x_r`.
pub fn godunov_interface_flux(u: f64, v: f64, x_l: f64, x_r: f64, model: &FluxModel) -> Result<f64> {
    let (left, right) = (model.at(x_l), model.at(x_r));
    let cl = left.plateau()?.u_m;
    let cr = right.plateau()?.u_m;
    Ok(interface_flux(&left, cl, u, &right, cr, v))
}

#[inline]
fn interface_flux(
    left: &LocalFlux<'_>,
    left_center: f64,
    u: f64,
    right: &LocalFlux<'_>,
    right_center: f64,
    v: f64,
) -> f64 {
    left.flux(u.max(left_center))
        .max(right.flux(v.min(right_center)))
}

/// Brute-force classical Godunov flux at a single `x`: the min (u <= v) or
/// max (u >= v) of `A(x, .)` over `n_samples + 1` equally spaced points.
/// Test oracle only.
pub fn classical_godunov_oracle(u: f64, v: f64, x: f64, model: &FluxModel, n_samples: usize) -> f64 {
    let n = n_samples.max(2);
    let loc = model.at(x);
    let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
    let samples = (0..=n).map(|i| loc.flux(lo + (hi - lo) * i as f64 / n as f64));
    if u <= v {
        samples.fold(f64::INFINITY, f64::min)
    } else {
        samples.fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Coefficients of the incremental form of the scheme at one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementalCoefficients {
    pub c: f64,
    pub d: f64,
    pub theta: f64,
}

/// Final state of a run together with its per-level diagnostics.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: SolverState,
    pub records: Vec<DiagnosticsRecord>,
}

/// A configured scheme: model, grid, time stepping and the bound `M` on `|u|`.
///
/// Per-cell flux data (the local `beta` and the plateau point `u_M`) is
/// resolved once at construction.
pub struct Solver<'m> {
    model: &'m FluxModel,
    grid: Grid1D,
    stepping: TimeStepping,
    m_bound: f64,
    cells: Vec<LocalFlux<'m>>,
    centers: Vec<f64>,
}

impl<'m> Solver<'m> {
    pub fn new(model: &'m FluxModel, grid: Grid1D, stepping: TimeStepping, m_bound: f64) -> Result<Self> {
        let xs = grid.extended_centers();
        let cells: Vec<LocalFlux<'m>> = xs.iter().map(|x| model.at(*x)).collect();
        let centers = cells
            .iter()
            .map(|c| c.plateau().map(|p| p.u_m))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            model,
            grid,
            stepping,
            m_bound,
            cells,
            centers,
        })
    }

    pub fn model(&self) -> &'m FluxModel {
        self.model
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn stepping(&self) -> &TimeStepping {
        &self.stepping
    }

    pub fn lambda(&self) -> f64 {
        self.stepping.lambda
    }

    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// Local flux of extended cell `i` (0 is the left ghost).
    pub fn cell(&self, i: usize) -> &LocalFlux<'m> {
        &self.cells[i]
    }

    /// `u_M` at extended cell `i`.
    pub fn plateau_center(&self, i: usize) -> f64 {
        self.centers[i]
    }

    /// Interface flux between extended cells `i` and `i + 1`.
    #[inline]
    pub fn numerical_flux(&self, i: usize, u: f64, v: f64) -> f64 {
        interface_flux(
            &self.cells[i],
            self.centers[i],
            u,
            &self.cells[i + 1],
            self.centers[i + 1],
            v,
        )
    }

    /// `beta` of every extended cell value (ghosts included).
    pub fn beta_extended(&self, state: &SolverState) -> Vec<f64> {
        state
            .extended()
            .iter()
            .zip(&self.cells)
            .map(|(u, c)| c.beta(*u))
            .collect()
    }

    /// The `m + 1` interface fluxes; entry `i` sits between extended cells `i` and `i + 1`.
    pub fn interface_fluxes(&self, state: &SolverState) -> Vec<f64> {
        let ext = state.extended();
        (0..ext.len() - 1)
            .map(|i| self.numerical_flux(i, ext[i], ext[i + 1]))
            .collect()
    }

    /// One step of the conservative scheme, returning the new state and the
    /// interface fluxes it used.
    pub fn step_with_fluxes(&self, state: &SolverState) -> Result<(SolverState, Vec<f64>)> {
        if state.u.len() != self.grid.m_cells() {
            return Err(Error::InvalidInput(format!(
                "state has {} cells, grid has {}",
                state.u.len(),
                self.grid.m_cells()
            )));
        }
        let fluxes = self.interface_fluxes(state);
        let lambda = self.stepping.lambda;
        let limit = self.m_bound + LINF_SLACK;
        let mut u = Vec::with_capacity(state.u.len());
        for (j, &uj) in state.u.iter().enumerate() {
            let next = uj - lambda * (fluxes[j + 1] - fluxes[j]);
            if !next.is_finite() || next.abs() > limit {
                return Err(Error::InvariantViolation(format!(
                    "|u| = {} exceeds M = {} at cell {j}, level {}",
                    next.abs(),
                    self.m_bound,
                    state.level + 1
                )));
            }
            u.push(next);
        }
        Ok((
            SolverState {
                level: state.level + 1,
                u,
                ghost_left: state.ghost_left,
                ghost_right: state.ghost_right,
            },
            fluxes,
        ))
    }

    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        self.step_with_fluxes(state).map(|(s, _)| s)
    }

    /// Runs `N` steps from `state0`. `hook` sees every level listed in
    /// `snapshot_levels` (level 0 included); `monitor` records diagnostics for
    /// every level.
    pub fn run(
        &self,
        state0: SolverState,
        monitor: &mut Monitor,
        snapshot_levels: &BTreeSet<usize>,
        mut hook: impl FnMut(usize, f64, &SolverState),
    ) -> Result<RunOutput> {
        let mut records = Vec::with_capacity(self.stepping.n_steps + 1);
        records.push(monitor.record_initial(self, &state0));
        if snapshot_levels.contains(&0) {
            hook(0, 0.0, &state0);
        }
        let mut state = state0;
        for _ in 0..self.stepping.n_steps {
            let (next, fluxes) = self.step_with_fluxes(&state)?;
            records.push(monitor.record_step(self, &state, &next, &fluxes)?);
            if snapshot_levels.contains(&next.level) {
                hook(next.level, self.stepping.time_of(next.level), &next);
            }
            state = next;
        }
        Ok(RunOutput {
            final_state: state,
            records,
        })
    }

    /// Runs `N` steps without diagnostics.
    pub fn advance(&self, state0: SolverState) -> Result<SolverState> {
        (0..self.stepping.n_steps).try_fold(state0, |s, _| self.step(&s))
    }

    /// Coefficients of the beta-space incremental form at interior cell `j`,
    /// given the state before and after a step.
    pub fn incremental_coefficients(
        &self,
        prev: &SolverState,
        next: &SolverState,
        j: usize,
    ) -> IncrementalCoefficients {
        let i = j + 1;
        let b = self.beta_extended(prev);
        let lambda = self.stepping.lambda;
        let du = next.u[j] - prev.u[j];
        let theta = if du != 0.0 {
            (self.cells[i].beta(next.u[j]) - b[i]) / du
        } else {
            0.0
        };
        let gbar = |p: f64, q: f64| godunov_flux_g(p, q, self.model);
        let dp = b[i + 1] - b[i];
        let c = if dp != 0.0 {
            -lambda * theta * (gbar(b[i], b[i + 1]) - gbar(b[i], b[i])) / dp
        } else {
            0.0
        };
        let dm = b[i] - b[i - 1];
        let d = if dm != 0.0 {
            lambda * theta * (gbar(b[i], b[i]) - gbar(b[i - 1], b[i])) / dm
        } else {
            0.0
        };
        IncrementalCoefficients { c, d, theta }
    }

    /// Coefficients of the u-space incremental form at interior cell `j`.
    ///
    /// Only defined where the flux does not change across cells `j - 1 ..= j + 1`;
    /// returns `None` next to a spatial discontinuity.
    pub fn incremental_coefficients_u(&self, state: &SolverState, j: usize) -> Option<(f64, f64)> {
        let i = j + 1;
        if self.cells[i - 1].beta != self.cells[i].beta || self.cells[i + 1].beta != self.cells[i].beta {
            return None;
        }
        let ext = state.extended();
        let lambda = self.stepping.lambda;
        let same = |u: f64, v: f64| self.numerical_flux_at(i, u, v);
        let dp = ext[i + 1] - ext[i];
        let c = if dp != 0.0 {
            -lambda * (same(ext[i], ext[i + 1]) - same(ext[i], ext[i])) / dp
        } else {
            0.0
        };
        let dm = ext[i] - ext[i - 1];
        let d = if dm != 0.0 {
            lambda * (same(ext[i], ext[i]) - same(ext[i - 1], ext[i])) / dm
        } else {
            0.0
        };
        Some((c, d))
    }

    fn numerical_flux_at(&self, i: usize, u: f64, v: f64) -> f64 {
        let c = &self.cells[i];
        interface_flux(c, self.centers[i], u, c, self.centers[i], v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::SpatialCoefficient;
    use crate::flux::{Profile, Transform};

    fn burgers() -> FluxModel {
        FluxModel::new(
            Profile::Quadratic,
            Transform::Shift {
                offset: SpatialCoefficient::constant(0.0).unwrap(),
            },
        )
        .unwrap()
    }

    fn ex2_like(breaks: Vec<f64>, r: Vec<f64>) -> FluxModel {
        FluxModel::new(
            Profile::PlateauLinear {
                z_minus: -1.0,
                z_plus: 0.0,
                left_slope: 1.0,
                right_slope: 1.0,
            },
            Transform::Shift {
                offset: SpatialCoefficient::new(breaks, r).unwrap(),
            },
        )
        .unwrap()
    }

    #[test]
    fn grid_centers() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.centers(), vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(g.ghost_left_x(), -1.25);
        assert_eq!(g.ghost_right_x(), 1.25);
        assert!(Grid1D::new(0.0, 1.0, 1).is_err());
        assert!(Grid1D::new(1.0, 0.0, 4).is_err());
    }

    #[test]
    fn sampling_is_pointwise() {
        let g = Grid1D::new(-1.0, 1.0, 4).unwrap();
        let s = sample_initial_data(|x| if x < 0.0 { 1.0 } else { 0.0 }, &g).unwrap();
        assert_eq!(s.u, vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!((s.ghost_left, s.ghost_right), (1.0, 0.0));
        assert!(sample_initial_data(|_| f64::NAN, &g).is_err());
    }

    #[test]
    fn godunov_g_examples() {
        let m = burgers();
        assert_eq!(godunov_flux_g(1.0, 2.0, &m), 0.5);
        assert_eq!(godunov_flux_g(-1.0, 1.0, &m), 0.0);
        assert_eq!(godunov_flux_g(2.0, -2.0, &m), 2.0);
    }

    #[test]
    fn interface_flux_examples() {
        let m = ex2_like(vec![1.0, 2.0], vec![2.0, 1.8, 1.0]);
        assert_eq!(godunov_interface_flux(2.0, 1.8, 0.5, 1.5, &m).unwrap(), 0.0);
        assert_eq!(godunov_interface_flux(3.0, 1.0, 0.5, 2.5, &m).unwrap(), 1.0);
        assert_eq!(godunov_interface_flux(-1.0, 1.0, 0.0, 0.0, &burgers()).unwrap(), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let b = burgers();
        assert_eq!(classical_godunov_oracle(0.7, 0.7, 0.0, &b, 10), b.eval_flux(0.0, 0.7).unwrap());
        assert!(classical_godunov_oracle(-1.0, 1.0, 0.0, &b, 1000).abs() < 5e-7);
        let m = ex2_like(vec![], vec![1.0]);
        assert_eq!(classical_godunov_oracle(3.0, 0.0, 0.0, &m, 1000), 2.0);
    }

    fn solver_for<'a>(m: &'a FluxModel, grid: Grid1D, lambda: f64, steps: usize, bound: f64) -> Solver<'a> {
        let ts = TimeStepping::fixed(&grid, lambda, steps).unwrap();
        Solver::new(m, grid, ts, bound).unwrap()
    }

    #[test]
    fn riemann_step_by_hand() {
        let m = burgers();
        let grid = Grid1D::new(-1.0, 1.0, 4).unwrap();
        let s = solver_for(&m, grid, 0.2, 1, 10.0);
        let state = SolverState::new(vec![2.0, 2.0, 0.0, 0.0], 2.0, 0.0);
        let next = s.step(&state).unwrap();
        assert_eq!(next.level, 1);
        assert_eq!(next.u[2], 0.4);
        assert_eq!(next.u[0], 2.0);
    }

    #[test]
    fn constant_state_is_unchanged() {
        let m = burgers();
        let grid = Grid1D::new(0.0, 1.0, 10).unwrap();
        let s = solver_for(&m, grid, 0.2, 5, 10.0);
        let state = SolverState::new(vec![0.3; 10], 0.3, 0.3);
        let out = s.advance(state.clone()).unwrap();
        assert_eq!(out.u, state.u);
    }

    #[test]
    fn zero_steps_returns_input() {
        let m = burgers();
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let s = solver_for(&m, grid, 0.2, 0, 10.0);
        let state = SolverState::new(vec![0.1, 0.2, 0.3, 0.4], 0.0, 0.5);
        assert_eq!(s.advance(state.clone()).unwrap(), state);
    }

    #[test]
    fn bound_violation_is_reported() {
        let m = burgers();
        let grid = Grid1D::new(-1.0, 1.0, 4).unwrap();
        let s = solver_for(&m, grid, 0.2, 1, 0.1);
        let state = SolverState::new(vec![2.0, 2.0, 0.0, 0.0], 2.0, 0.0);
        assert!(matches!(s.step(&state), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn incremental_hand_case() {
        let m = burgers();
        let grid = Grid1D::new(0.0, 3.0, 3).unwrap();
        let s = solver_for(&m, grid, 0.2, 1, 10.0);
        let prev = SolverState::new(vec![0.0, 1.0, 1.0], 0.0, 1.0);
        let next = s.step(&prev).unwrap();
        let k = s.incremental_coefficients(&prev, &next, 1);
        assert!((k.d - 0.1).abs() < 1e-15);
        assert_eq!(k.c, 0.0);
        assert!((k.theta - 1.0).abs() < 1e-15);
        let (c, d) = s.incremental_coefficients_u(&prev, 1).unwrap();
        assert_eq!(c, 0.0);
        assert!((d - 0.1).abs() < 1e-15);
    }

    #[test]
    fn incremental_constant_state_is_zero() {
        let m = burgers();
        let grid = Grid1D::new(0.0, 3.0, 3).unwrap();
        let s = solver_for(&m, grid, 0.2, 1, 10.0);
        let prev = SolverState::new(vec![0.5; 3], 0.5, 0.5);
        let next = s.step(&prev).unwrap();
        let k = s.incremental_coefficients(&prev, &next, 1);
        assert_eq!((k.c, k.d, k.theta), (0.0, 0.0, 0.0));
    }

    #[test]
    fn u_space_coefficients_undefined_at_discontinuity() {
        let m = ex2_like(vec![1.5], vec![2.0, 1.0]);
        let grid = Grid1D::new(0.0, 3.0, 3).unwrap();
        let s = solver_for(&m, grid, 0.2, 1, 10.0);
        let st = SolverState::new(vec![2.0, 2.0, 2.0], 2.0, 2.0);
        assert!(s.incremental_coefficients_u(&st, 1).is_none());
    }

    #[test]
    fn landing_hits_t_final_within_cfl() {
        let m = burgers();
        let grid = Grid1D::new(0.0, 6.0, 100).unwrap();
        let b = m.lipschitz_bounds(5.0).unwrap();
        let ts = TimeStepping::from_cfl(&grid, &b, 1.0, 0.9).unwrap();
        assert!(ts.satisfies_cfl(&b));
        assert!((ts.dt * ts.n_steps as f64 - 1.0).abs() < 1e-12);
        assert_eq!(ts.time_of(ts.n_steps), 1.0);
        // tiny final time still takes one step
        let ts = TimeStepping::from_cfl(&grid, &b, 1e-6, 0.9).unwrap();
        assert_eq!(ts.n_steps, 1);
        assert_eq!(ts.dt, 1e-6);
    }
}
