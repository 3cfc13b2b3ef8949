//! Per-step checks of the discrete properties of the scheme: total variation
//! in `u` and `beta`, adapted entropy inequalities, time continuity, mass
//! balance and errors against reference solutions.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scheme::{Grid1D, Solver, SolverState};
use crate::stationary::{discrete_stationary_state, Branch, StationaryState};

/// Base tolerance of the entropy residual; scaled by `1 + M`.
pub const ENTROPY_TOL: f64 = 1e-12;
/// Slack on total-variation comparisons.
pub const TV_TOL: f64 = 1e-10;
/// Slack on the time continuity bounds.
pub const TIME_CONTINUITY_TOL: f64 = 1e-10;
/// Absolute slack on the per-step mass balance.
pub const MASS_TOL: f64 = 1e-12;

/// Compensated (Neumaier) sum.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn total_variation(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// `beta(x_j, u_j)` at the interior cells.
pub fn beta_values(state: &SolverState, solver: &Solver<'_>) -> Vec<f64> {
    state
        .u
        .iter()
        .enumerate()
        .map(|(j, u)| solver.cell(j + 1).beta(*u))
        .collect()
}

/// Total variation of `beta` over the interior cells.
pub fn tv_beta(state: &SolverState, solver: &Solver<'_>) -> f64 {
    total_variation(&beta_values(state, solver))
}

pub fn mass(state: &SolverState, dx: f64) -> f64 {
    dx * stable_sum(state.u.iter().copied())
}

/// `|sum_j (u_j^{n+1} - u_j^n) + lambda (F_right - F_left)|`, zero up to rounding
/// for a conservative update.
pub fn mass_balance_defect(prev: &SolverState, next: &SolverState, fluxes: &[f64], lambda: f64) -> f64 {
    let change = stable_sum(next.u.iter().zip(&prev.u).map(|(a, b)| a - b));
    let boundary = lambda * (fluxes[fluxes.len() - 1] - fluxes[0]);
    (change + boundary).abs()
}

/// `dx * sum_j |u_j - exact(x_j)|`.
pub fn l1_error(state: &SolverState, grid: &Grid1D, exact: impl Fn(f64) -> f64) -> f64 {
    let diffs = state
        .u
        .iter()
        .zip(grid.centers())
        .map(|(u, x)| (u - exact(x)).abs());
    grid.dx() * stable_sum(diffs)
}

/// Largest violation, over interior cells, of the cell entropy inequality
///
/// ```text
/// |u_j^{n+1} - k_j| - |u_j^n - k_j| + lambda (Phi_{j+1/2} - Phi_{j-1/2}) <= 0
/// ```
///
/// with `Phi = F(u v k, u' v k') - F(u ^ k, u' ^ k')`.
pub fn discrete_entropy_residual(
    prev: &SolverState,
    next: &SolverState,
    k: &StationaryState,
    solver: &Solver<'_>,
) -> Result<f64> {
    let m = solver.grid().m_cells();
    if prev.u.len() != m || next.u.len() != m || k.values.len() != m {
        return Err(Error::InvalidInput(format!(
            "length mismatch: prev {}, next {}, k {}, grid {m}",
            prev.u.len(),
            next.u.len(),
            k.values.len()
        )));
    }
    let u = prev.extended();
    let kk = k.extended();
    let phi: Vec<f64> = (0..=m)
        .map(|i| {
            let hi = solver.numerical_flux(i, u[i].max(kk[i]), u[i + 1].max(kk[i + 1]));
            let lo = solver.numerical_flux(i, u[i].min(kk[i]), u[i + 1].min(kk[i + 1]));
            hi - lo
        })
        .collect();
    let lambda = solver.lambda();
    let residual = (0..m)
        .map(|j| {
            let kj = kk[j + 1];
            (next.u[j] - kj).abs() - (prev.u[j] - kj).abs() + lambda * (phi[j + 1] - phi[j])
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(residual)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TimeContinuity {
    pub sum: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `2 lambda (eta_bar TV(a) + L TV(u0) + L TV(u_M))`, with every variation
/// taken over the grid samples, ghosts included.
pub fn time_continuity_bound(solver: &Solver<'_>, state0: &SolverState) -> Result<f64> {
    let model = solver.model();
    let bounds = model.lipschitz_bounds(solver.m_bound())?;
    let xs = solver.grid().extended_centers();
    let a: Vec<f64> = xs.iter().map(|x| model.variation_coefficient(*x)).collect();
    let u_m: Vec<f64> = (0..xs.len()).map(|i| solver.plateau_center(i)).collect();
    Ok(2.0
        * solver.lambda()
        * (bounds.eta_bar * total_variation(&a)
            + bounds.l * total_variation(&state0.extended())
            + bounds.l * total_variation(&u_m)))
}

pub fn time_continuity_check(prev: &SolverState, next: &SolverState, bound: f64) -> TimeContinuity {
    let sum = stable_sum(next.u.iter().zip(&prev.u).map(|(a, b)| (a - b).abs()));
    TimeContinuity {
        sum,
        bound,
        pass: sum <= bound + TIME_CONTINUITY_TOL,
    }
}

/// `sum_j |beta_j^{n+1} - beta_j^n|`.
pub fn beta_time_variation(prev: &SolverState, next: &SolverState, solver: &Solver<'_>) -> f64 {
    let a = beta_values(prev, solver);
    let b = beta_values(next, solver);
    stable_sum(a.iter().zip(&b).map(|(x, y)| (x - y).abs()))
}

/// Computable bound on `TV(u)` at every level:
/// `(TV(beta^0) + sup_{|u| <= M} K4(u) TV(alpha)) / K2`.
pub fn tv_u_bound(solver: &Solver<'_>, tv_beta0: f64) -> f64 {
    let model = solver.model();
    let m = solver.m_bound();
    const SAMPLES: usize = 400;
    let k4 = (0..=SAMPLES)
        .map(|i| model.lipschitz_beta_x(-m + 2.0 * m * i as f64 / SAMPLES as f64))
        .fold(0.0, f64::max);
    let a: Vec<f64> = solver
        .grid()
        .extended_centers()
        .iter()
        .map(|x| model.variation_coefficient(*x))
        .collect();
    (tv_beta0 + k4 * total_variation(&a)) / model.lower_slope()
}

/// Diagnostics of one time level. Step-dependent fields are zero at level 0.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticsRecord {
    pub level: usize,
    pub time: f64,
    pub tv_u: f64,
    pub tv_beta: f64,
    pub mass: f64,
    pub entropy_residual_max: f64,
    pub time_continuity_sum: f64,
    pub l1_error: Option<f64>,
}

/// Tally of one property check over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct CheckStat {
    pub evaluations: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen; negative when the check always held with room.
    pub worst_excess: f64,
}

impl CheckStat {
    fn record(&mut self, excess: f64, pass: bool) {
        if self.evaluations == 0 || excess > self.worst_excess {
            self.worst_excess = excess;
        }
        self.evaluations += 1;
        if !pass {
            self.violations += 1;
        }
    }
}

pub const CHECK_BETA_TVD: &str = "beta_tvd";
pub const CHECK_TV_BETA_BOUND: &str = "tv_beta_bound";
pub const CHECK_TV_U_BOUND: &str = "tv_u_bound";
pub const CHECK_ENTROPY: &str = "entropy";
pub const CHECK_TIME_CONTINUITY: &str = "time_continuity";
pub const CHECK_BETA_TIME_CONTINUITY: &str = "beta_time_continuity";
pub const CHECK_MASS_BALANCE: &str = "mass_balance";
pub const CHECK_LINF: &str = "linf_bound";

/// Runs every per-step check and keeps a tally of violations.
#[derive(Debug, Clone)]
pub struct Monitor {
    entropy_states: Vec<StationaryState>,
    entropy_tol: f64,
    time_bound: f64,
    tv_beta0: f64,
    tv_u_bound: f64,
    prev_tv_beta: f64,
    checks: BTreeMap<&'static str, CheckStat>,
}

impl Monitor {
    /// Monitor with the given entropy test states.
    pub fn new(solver: &Solver<'_>, state0: &SolverState, entropy_states: Vec<StationaryState>) -> Result<Self> {
        let tv_beta0 = tv_beta(state0, solver);
        Ok(Self {
            entropy_states,
            entropy_tol: ENTROPY_TOL * (1.0 + solver.m_bound()),
            time_bound: time_continuity_bound(solver, state0)?,
            tv_beta0,
            tv_u_bound: tv_u_bound(solver, tv_beta0),
            prev_tv_beta: tv_beta0,
            checks: BTreeMap::new(),
        })
    }

    /// Monitor testing both branches at `alpha` in `{0, alpha_bar / 2, alpha_bar}`.
    pub fn standard(solver: &Solver<'_>, state0: &SolverState, alpha_bar: f64) -> Result<Self> {
        let states = entropy_test_states(solver.grid(), solver.model(), alpha_bar)?;
        Self::new(solver, state0, states)
    }

    /// Skips entropy checks; the cheapest monitor.
    pub fn light(solver: &Solver<'_>, state0: &SolverState) -> Result<Self> {
        Self::new(solver, state0, Vec::new())
    }

    pub fn time_continuity_bound(&self) -> f64 {
        self.time_bound
    }

    pub fn tv_beta0(&self) -> f64 {
        self.tv_beta0
    }

    pub fn tv_u_bound(&self) -> f64 {
        self.tv_u_bound
    }

    pub fn entropy_tolerance(&self) -> f64 {
        self.entropy_tol
    }

    pub fn checks(&self) -> &BTreeMap<&'static str, CheckStat> {
        &self.checks
    }

    pub fn violations(&self) -> usize {
        self.checks.values().map(|c| c.violations).sum()
    }

    pub fn all_passed(&self) -> bool {
        self.violations() == 0
    }

    fn tally(&mut self, name: &'static str, lhs: f64, rhs: f64, tol: f64) {
        let excess = lhs - rhs;
        self.checks
            .entry(name)
            .or_default()
            .record(excess, excess <= tol);
    }

    pub fn record_initial(&mut self, solver: &Solver<'_>, state0: &SolverState) -> DiagnosticsRecord {
        let tv_b = tv_beta(state0, solver);
        let tv_u = total_variation(&state0.u);
        self.tally(CHECK_TV_U_BOUND, tv_u, self.tv_u_bound, TV_TOL);
        self.tally(CHECK_LINF, state0.max_abs(), solver.m_bound(), crate::scheme::LINF_SLACK);
        DiagnosticsRecord {
            level: 0,
            time: 0.0,
            tv_u,
            tv_beta: tv_b,
            mass: mass(state0, solver.grid().dx()),
            entropy_residual_max: 0.0,
            time_continuity_sum: 0.0,
            l1_error: None,
        }
    }

    pub fn record_step(
        &mut self,
        solver: &Solver<'_>,
        prev: &SolverState,
        next: &SolverState,
        fluxes: &[f64],
    ) -> Result<DiagnosticsRecord> {
        let tv_b = tv_beta(next, solver);
        let tv_u = total_variation(&next.u);
        self.tally(CHECK_BETA_TVD, tv_b, self.prev_tv_beta, TV_TOL);
        self.tally(CHECK_TV_BETA_BOUND, tv_b, self.tv_beta0, TV_TOL);
        self.tally(CHECK_TV_U_BOUND, tv_u, self.tv_u_bound, TV_TOL);
        self.prev_tv_beta = tv_b;

        let mut entropy = f64::NEG_INFINITY;
        for k in &self.entropy_states {
            entropy = entropy.max(discrete_entropy_residual(prev, next, k, solver)?);
        }
        if !self.entropy_states.is_empty() {
            self.tally(CHECK_ENTROPY, entropy, 0.0, self.entropy_tol);
        }

        let tc = time_continuity_check(prev, next, self.time_bound);
        self.tally(CHECK_TIME_CONTINUITY, tc.sum, tc.bound, TIME_CONTINUITY_TOL);
        let beta_tc = beta_time_variation(prev, next, solver);
        self.tally(CHECK_BETA_TIME_CONTINUITY, beta_tc, self.tv_beta0, TIME_CONTINUITY_TOL);

        let defect = mass_balance_defect(prev, next, fluxes, solver.lambda());
        self.tally(CHECK_MASS_BALANCE, defect, 0.0, MASS_TOL);
        self.tally(CHECK_LINF, next.max_abs(), solver.m_bound(), crate::scheme::LINF_SLACK);

        Ok(DiagnosticsRecord {
            level: next.level,
            time: solver.stepping().time_of(next.level),
            tv_u,
            tv_beta: tv_b,
            mass: mass(next, solver.grid().dx()),
            entropy_residual_max: if self.entropy_states.is_empty() { 0.0 } else { entropy },
            time_continuity_sum: tc.sum,
            l1_error: None,
        })
    }
}

/// Discrete stationary states on both branches at `alpha` in
/// `{0, alpha_bar / 2, alpha_bar}` (duplicates dropped when `alpha_bar = 0`).
pub fn entropy_test_states(grid: &Grid1D, model: &crate::flux::FluxModel, alpha_bar: f64) -> Result<Vec<StationaryState>> {
    let mut alphas = vec![0.0];
    if alpha_bar > 0.0 {
        alphas.extend([0.5 * alpha_bar, alpha_bar]);
    }
    let mut out = Vec::with_capacity(2 * alphas.len());
    for a in alphas {
        for b in [Branch::Plus, Branch::Minus] {
            out.push(discrete_stationary_state(grid, a, b, model)?);
        }
    }
    Ok(out)
}

/// Random bounded-variation data: the plateau profile `u_M` plus a
/// piecewise-constant perturbation with `jumps` breakpoints, supported in the
/// middle half of the window so the frozen ghosts stay consistent with the data.
pub fn random_bv_state(
    grid: &Grid1D,
    model: &crate::flux::FluxModel,
    rng: &mut impl Rng,
    jumps: usize,
    amplitude: f64,
) -> Result<SolverState> {
    let (a, b) = (grid.x_left(), grid.x_right());
    let (lo, hi) = (a + 0.25 * (b - a), b - 0.25 * (b - a));
    let mut cuts: Vec<f64> = (0..jumps.max(1)).map(|_| rng.gen_range(lo..hi)).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    let levels: Vec<f64> = (0..cuts.len() - 1)
        .map(|_| rng.gen_range(-amplitude..=amplitude))
        .collect();
    let perturbation = |x: f64| {
        if x < lo || x >= hi {
            return 0.0;
        }
        let i = cuts.partition_point(|c| *c <= x) - 1;
        levels[i.min(levels.len() - 1)]
    };
    let ext = grid
        .extended_centers()
        .iter()
        .map(|x| Ok(model.plateau_bounds(*x)?.u_m + perturbation(*x)))
        .collect::<Result<Vec<f64>>>()?;
    let m = grid.m_cells();
    Ok(SolverState::new(ext[1..=m].to_vec(), ext[0], ext[m + 1]))
}
