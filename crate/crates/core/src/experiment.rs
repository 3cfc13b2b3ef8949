//! Run orchestration independent of any file format: setting up the bound
//! constants and time step, marching with diagnostics, collecting snapshots,
//! and the sweep and property-suite drivers built on top.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{
    self, discrete_entropy_residual, entropy_test_states, total_variation, CheckStat, DiagnosticsRecord, Monitor,
};
use crate::error::{Error, Result};
use crate::flux::{BoundSet, FluxModel};
use crate::reference::Reference;
use crate::scheme::{godunov_flux_g, godunov_interface_flux, Grid1D, Solver, SolverState, TimeStepping};
use crate::stationary::{compute_alpha_bar, discrete_stationary_state, solution_bound, unsampled_intervals, Branch};

/// Explicit replacements for the computed run constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub m_bound: Option<f64>,
    pub lambda: Option<f64>,
    pub n_steps: Option<usize>,
}

/// Every constant a run used, in a form that can be fed back as overrides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConstants {
    pub m_cells: usize,
    pub dx: f64,
    pub alpha_bar: f64,
    pub m_bound: f64,
    pub l_g: f64,
    pub l_beta: f64,
    pub l: f64,
    pub eta_bar: f64,
    pub p_bound: f64,
    pub lambda: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub t_final: f64,
    /// `TV(beta^0)`, the bound on `TV(beta)` at every later level.
    pub tv_beta0: f64,
    pub tv_u_bound: f64,
    pub time_continuity_bound: f64,
    pub entropy_tolerance: f64,
    /// Breakpoint intervals containing no cell center.
    pub unsampled_intervals: usize,
}

/// Everything needed to describe one run.
pub struct RunSpec<'a> {
    pub model: &'a FluxModel,
    pub initial: &'a (dyn Fn(f64) -> f64 + Sync),
    pub reference: Option<&'a Reference>,
    pub grid: Grid1D,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub overrides: Overrides,
    /// Times at which to keep the solution; snapped to the nearest level.
    pub snapshot_times: Vec<f64>,
    /// Test the entropy inequalities at every step (the costliest check).
    pub entropy_checks: bool,
}

/// A solver ready to march, with its initial state.
pub struct Prepared<'a> {
    pub solver: Solver<'a>,
    pub state0: SolverState,
    pub alpha_bar: f64,
    pub bounds: BoundSet,
}

/// Samples the data and derives `alpha_bar`, `M`, the Lipschitz bounds and the time step.
pub fn prepare<'a>(spec: &RunSpec<'a>) -> Result<Prepared<'a>> {
    let grid = spec.grid.clone();
    let state0 = crate::scheme::sample_initial_data(spec.initial, &grid)?;
    let alpha_bar = compute_alpha_bar(&state0, &grid, spec.model);
    let m_bound = match spec.overrides.m_bound {
        Some(m) => m,
        None => solution_bound(&state0, &grid, spec.model, alpha_bar)?,
    };
    let bounds = spec.model.lipschitz_bounds(m_bound)?;
    let stepping = stepping_for(&grid, &bounds, spec.t_final, spec.cfl_safety, &spec.overrides)?;
    let solver = Solver::new(spec.model, grid, stepping, m_bound)?;
    Ok(Prepared {
        solver,
        state0,
        alpha_bar,
        bounds,
    })
}

fn stepping_for(
    grid: &Grid1D,
    bounds: &BoundSet,
    t_final: f64,
    cfl_safety: f64,
    ov: &Overrides,
) -> Result<TimeStepping> {
    match (ov.lambda, ov.n_steps) {
        (None, None) => TimeStepping::from_cfl(grid, bounds, t_final, cfl_safety),
        (Some(lambda), Some(n)) => {
            let mut ts = TimeStepping::fixed(grid, lambda, n)?;
            // Keep the configured final time when it agrees, so replayed
            // runs report identical times.
            if n > 0 && (ts.t_final - t_final).abs() <= 1e-9 * t_final {
                ts.t_final = t_final;
                ts.dt = t_final / n as f64;
            }
            Ok(ts)
        }
        (Some(lambda), None) => {
            let n = ((t_final / (lambda * grid.dx())).round() as usize).max(1);
            TimeStepping::fixed(grid, lambda, n)
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(Error::InvalidInput("n_steps override must be positive".into()));
            }
            let dt = t_final / n as f64;
            Ok(TimeStepping {
                lambda: dt / grid.dx(),
                dt,
                t_final,
                n_steps: n,
            })
        }
    }
}

/// The solution at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub level: usize,
    pub time: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub beta: Vec<f64>,
    /// Exact solution at the centers, when the level sits on the reference time.
    pub exact: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub constants: RunConstants,
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub checks: BTreeMap<&'static str, CheckStat>,
    pub final_state: Option<SolverState>,
    /// Error against the reference at the final level, when defined there.
    pub l1_error: Option<f64>,
    /// The error that stopped the run early, if any.
    pub failure: Option<String>,
}

impl RunResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.checks.values().all(|c| c.violations == 0)
    }

    pub fn last_record(&self) -> Option<&DiagnosticsRecord> {
        self.records.last()
    }
}

fn exact_at(reference: Option<&Reference>, grid: &Grid1D, t: f64) -> Option<Vec<f64>> {
    let r = reference?;
    let xs = grid.centers();
    xs.iter().map(|x| r.exact(*x, t).ok()).collect()
}

fn snapshot(solver: &Solver<'_>, reference: Option<&Reference>, level: usize, time: f64, state: &SolverState) -> Snapshot {
    let grid = solver.grid();
    Snapshot {
        level,
        time,
        x: grid.centers(),
        u: state.u.clone(),
        beta: diagnostics::beta_values(state, solver),
        exact: exact_at(reference, grid, time),
    }
}

/// Runs one configuration to completion.
///
/// Invariant violations inside the marching loop end the run early and are
/// reported in [`RunResult::failure`]; configuration errors are returned as `Err`.
pub fn execute(spec: &RunSpec<'_>) -> Result<RunResult> {
    let prepared = prepare(spec)?;
    let Prepared {
        solver,
        state0,
        alpha_bar,
        bounds,
    } = prepared;
    let ts = *solver.stepping();
    for t in &spec.snapshot_times {
        if !(*t >= 0.0 && *t <= ts.t_final * (1.0 + 1e-12)) {
            return Err(Error::InvalidInput(format!(
                "snapshot time {t} outside [0, {}]",
                ts.t_final
            )));
        }
    }
    let levels: BTreeSet<usize> = spec.snapshot_times.iter().map(|t| ts.level_of(*t)).collect();

    let mut monitor = if spec.entropy_checks {
        Monitor::standard(&solver, &state0, alpha_bar)?
    } else {
        Monitor::light(&solver, &state0)?
    };
    let constants = RunConstants {
        m_cells: solver.grid().m_cells(),
        dx: solver.grid().dx(),
        alpha_bar,
        m_bound: solver.m_bound(),
        l_g: bounds.l_g,
        l_beta: bounds.l_beta,
        l: bounds.l,
        eta_bar: bounds.eta_bar,
        p_bound: bounds.p_bound,
        lambda: ts.lambda,
        dt: ts.dt,
        n_steps: ts.n_steps,
        t_final: ts.t_final,
        tv_beta0: monitor.tv_beta0(),
        tv_u_bound: monitor.tv_u_bound(),
        time_continuity_bound: monitor.time_continuity_bound(),
        entropy_tolerance: monitor.entropy_tolerance(),
        unsampled_intervals: unsampled_intervals(solver.grid(), spec.model),
    };

    let mut snapshots = Vec::new();
    let outcome = solver.run(state0, &mut monitor, &levels, |level, time, state| {
        snapshots.push(snapshot(&solver, spec.reference, level, time, state));
    });
    let (records, final_state, failure) = match outcome {
        Ok(out) => (out.records, Some(out.final_state), None),
        Err(e @ Error::InvariantViolation(_)) => (Vec::new(), None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let mut records = records;
    let l1_error = final_state.as_ref().and_then(|s| {
        let exact = exact_at(spec.reference, solver.grid(), ts.t_final)?;
        let e = solver.grid().dx()
            * diagnostics::stable_sum(s.u.iter().zip(&exact).map(|(u, v)| (u - v).abs()));
        Some(e)
    });
    if let (Some(e), Some(last)) = (l1_error, records.last_mut()) {
        last.l1_error = Some(e);
    }
    Ok(RunResult {
        constants,
        records,
        snapshots,
        checks: monitor.checks().clone(),
        final_state,
        l1_error,
        failure,
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub m_cells: usize,
    pub l1_error: f64,
    pub tv_u: f64,
    pub tv_beta: f64,
    pub passed: bool,
}

/// Runs the same problem on several grids in parallel; rows come back ordered by `M`.
pub fn convergence_sweep(
    model: &FluxModel,
    reference: &Reference,
    domain: (f64, f64),
    m_list: &[usize],
    t_final: f64,
    cfl_safety: f64,
    entropy_checks: bool,
) -> Result<Vec<(ConvergenceRow, RunResult)>> {
    let initial = |x: f64| reference.initial(x);
    let mut ms = m_list.to_vec();
    ms.sort_unstable();
    ms.dedup();
    ms.par_iter()
        .map(|&m| {
            let spec = RunSpec {
                model,
                initial: &initial,
                reference: Some(reference),
                grid: Grid1D::new(domain.0, domain.1, m)?,
                t_final,
                cfl_safety,
                overrides: Overrides::default(),
                snapshot_times: vec![t_final],
                entropy_checks,
            };
            let result = execute(&spec)?;
            let last = result.last_record().cloned();
            let row = ConvergenceRow {
                m_cells: m,
                l1_error: result.l1_error.ok_or_else(|| {
                    Error::UnsupportedReference(format!(
                        "no exact solution for {} at t = {t_final}",
                        reference.id()
                    ))
                })?,
                tv_u: last.as_ref().map_or(f64::NAN, |r| r.tv_u),
                tv_beta: last.as_ref().map_or(f64::NAN, |r| r.tv_beta),
                passed: result.passed(),
            };
            Ok((row, result))
        })
        .collect()
}

/// A solver for the given states with `M` large enough for all of them and
/// `lambda` at 90% of the stability limit.
pub fn solver_for_states<'a>(
    model: &'a FluxModel,
    grid: &Grid1D,
    states: &[&SolverState],
    n_steps: usize,
) -> Result<Solver<'a>> {
    let alpha_bar = states
        .iter()
        .map(|s| compute_alpha_bar(s, grid, model))
        .fold(0.0, f64::max);
    let mut m_bound: f64 = 0.0;
    for s in states {
        m_bound = m_bound.max(solution_bound(s, grid, model, alpha_bar)?);
    }
    let bounds = model.lipschitz_bounds(m_bound)?;
    let lambda = if bounds.l > 0.0 {
        0.5 * crate::scheme::DEFAULT_CFL_SAFETY / bounds.l
    } else {
        0.5 * crate::scheme::DEFAULT_CFL_SAFETY
    };
    let ts = TimeStepping::fixed(grid, lambda, n_steps)?;
    Solver::new(model, grid.clone(), ts, m_bound)
}

/// One row of a total-variation history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvHistoryRow {
    pub time: f64,
    pub tv_u: f64,
    pub tv_beta: f64,
}

/// `(t, TV(u), TV(beta))` at each snapshot of a finished run.
pub fn tv_history(result: &RunResult) -> Vec<TvHistoryRow> {
    result
        .snapshots
        .iter()
        .map(|s| TvHistoryRow {
            time: s.time,
            tv_u: total_variation(&s.u),
            tv_beta: total_variation(&s.beta),
        })
        .collect()
}

/// Whether `TV(beta)` never increases down the rows.
pub fn tv_beta_nonincreasing(rows: &[TvHistoryRow]) -> bool {
    rows.windows(2)
        .all(|w| w[1].tv_beta <= w[0].tv_beta + diagnostics::TV_TOL)
}

/// Outcome of one discrete property check in the validation suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Property suite on a small grid: monotonicity, L1 contraction, flux
/// identities, stationary fixed points, entropy inequalities, beta-TVD, time
/// continuity and mass balance, using seeded random data.
pub fn property_suite(
    model: &FluxModel,
    initial: &(dyn Fn(f64) -> f64 + Sync),
    domain: (f64, f64),
    m_cells: usize,
    seed: u64,
) -> Vec<PropertyCheck> {
    let mut out = Vec::new();
    let grid = match Grid1D::new(domain.0, domain.1, m_cells) {
        Ok(g) => g,
        Err(e) => {
            out.push(PropertyCheck {
                name: "setup",
                passed: false,
                detail: e.to_string(),
            });
            return out;
        }
    };
    let spec = RunSpec {
        model,
        initial,
        reference: None,
        grid: grid.clone(),
        t_final: 1.0,
        cfl_safety: 0.9,
        overrides: Overrides {
            n_steps: None,
            ..Overrides::default()
        },
        snapshot_times: Vec::new(),
        entropy_checks: true,
    };
    let prepared = match prepare(&spec) {
        Ok(p) => p,
        Err(e) => {
            out.push(PropertyCheck {
                name: "setup",
                passed: false,
                detail: e.to_string(),
            });
            return out;
        }
    };
    let solver = &prepared.solver;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m_bound = solver.m_bound();
    const STEPS: usize = 20;

    let mut push = |name: &'static str, result: Result<String>, passed: bool| {
        let (passed, detail) = match result {
            Ok(d) => (passed, d),
            Err(e) => (false, e.to_string()),
        };
        out.push(PropertyCheck { name, passed, detail });
    };

    // Plateau profile plus independent per-cell noise; ghosts stay on the plateau.
    let noisy_state = |rng: &mut ChaCha8Rng, amplitude: f64| -> SolverState {
        let m = grid.m_cells();
        let u = (1..=m)
            .map(|i| solver.plateau_center(i) + rng.gen_range(-amplitude..=amplitude))
            .collect();
        SolverState::new(u, solver.plateau_center(0), solver.plateau_center(m + 1))
    };

    // Monotonicity and L1 contraction.
    let mut mono_bad = 0;
    let mut contraction_bad = 0;
    let mut err = None;
    for _ in 0..20 {
        let pair = (|| -> Result<(usize, usize)> {
            let v = noisy_state(&mut rng, 1.0);
            let mut w = v.clone();
            for u in w.u.iter_mut() {
                *u += rng.gen_range(0.0..0.5);
            }
            let z = noisy_state(&mut rng, 1.0);
            let local = solver_for_states(model, &grid, &[&v, &w, &z], STEPS)?;
            let (mut a, mut b, mut c) = (v, w, z);
            let (mut mono, mut contr) = (0, 0);
            for _ in 0..STEPS {
                let (na, nb, nc) = (local.step(&a)?, local.step(&b)?, local.step(&c)?);
                if na.u.iter().zip(&nb.u).any(|(x, y)| x > y) {
                    mono += 1;
                }
                let before: f64 = a.u.iter().zip(&c.u).map(|(x, y)| (x - y).abs()).sum();
                let after: f64 = na.u.iter().zip(&nc.u).map(|(x, y)| (x - y).abs()).sum();
                if after > before + 1e-12 * (1.0 + before) {
                    contr += 1;
                }
                a = na;
                b = nb;
                c = nc;
            }
            Ok((mono, contr))
        })();
        match pair {
            Ok((m, c)) => {
                mono_bad += m;
                contraction_bad += c;
            }
            Err(e) => err = Some(e),
        }
    }
    match err {
        Some(e) => {
            push("monotonicity", Err(e.clone()), false);
            push("l1_contraction", Err(e), false);
        }
        None => {
            push("monotonicity", Ok(format!("{mono_bad} order violations")), mono_bad == 0);
            push(
                "l1_contraction",
                Ok(format!("{contraction_bad} expanding steps")),
                contraction_bad == 0,
            );
        }
    }

    // Interface flux against the beta-space Godunov flux and the sampling oracle.
    let (xa, xb) = domain;
    let mut worst_eq: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut flux_err = None;
    for _ in 0..500 {
        let u = rng.gen_range(-m_bound..=m_bound);
        let v = rng.gen_range(-m_bound..=m_bound);
        let x = rng.gen_range(xa..xb);
        let y = rng.gen_range(xa..xb);
        match godunov_interface_flux(u, v, x, y, model) {
            Ok(f) => {
                let g = godunov_flux_g(model.at(x).beta(u), model.at(y).beta(v), model);
                worst_eq = worst_eq.max((f - g).abs());
                let same = godunov_interface_flux(u, v, x, x, model).unwrap_or(f64::NAN);
                let oracle = crate::scheme::classical_godunov_oracle(u, v, x, model, 2000);
                let resolution = 2.0 * prepared.bounds.l * (u - v).abs() / 2000.0 + 1e-12;
                worst_oracle = worst_oracle.max((same - oracle).abs() - resolution);
            }
            Err(e) => flux_err = Some(e),
        }
    }
    match flux_err {
        Some(e) => push("flux_identity", Err(e), false),
        None => {
            push("flux_identity", Ok(format!("max difference {worst_eq:e}")), worst_eq <= 1e-12);
            push(
                "godunov_oracle",
                Ok(format!("max excess over resolution {worst_oracle:e}")),
                worst_oracle <= 0.0,
            );
        }
    }

    // Stationary states are fixed points.
    let fixed = (|| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for a in [0.0, 0.5 * prepared.alpha_bar, prepared.alpha_bar] {
            for b in [Branch::Plus, Branch::Minus] {
                let k = discrete_stationary_state(&grid, a, b, model)?;
                let s = k.to_state();
                let n = solver.step(&s)?;
                for (x, y) in n.u.iter().zip(&s.u) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        Ok(worst)
    })();
    let ok = matches!(fixed, Ok(w) if w <= 1e-14);
    push("stationary_fixed_point", fixed.map(|w| format!("max drift {w:e}")), ok);

    // Entropy inequalities and per-step checks along a run from random BV data.
    let walk = (|| -> Result<(f64, f64, BTreeMap<&'static str, CheckStat>)> {
        let s0 = diagnostics::random_bv_state(&grid, model, &mut rng, 6, 1.0)?;
        let local = solver_for_states(model, &grid, &[&s0], STEPS)?;
        let alpha_bar = compute_alpha_bar(&s0, &grid, model);
        let states = entropy_test_states(&grid, model, alpha_bar)?;
        let mut monitor = Monitor::new(&local, &s0, states.clone())?;
        let mut worst = f64::NEG_INFINITY;
        let mut s = s0;
        monitor.record_initial(&local, &s);
        for _ in 0..STEPS {
            let (n, fl) = local.step_with_fluxes(&s)?;
            for k in &states {
                worst = worst.max(discrete_entropy_residual(&s, &n, k, &local)?);
            }
            monitor.record_step(&local, &s, &n, &fl)?;
            s = n;
        }
        Ok((worst, local.m_bound(), monitor.checks().clone()))
    })();
    match walk {
        Ok((worst, walk_bound, checks)) => {
            let tol = diagnostics::ENTROPY_TOL * (1.0 + walk_bound);
            push("entropy_inequality", Ok(format!("max residual {worst:e}")), worst <= tol);
            for (name, stat) in checks {
                if name == diagnostics::CHECK_ENTROPY {
                    continue;
                }
                push(
                    name,
                    Ok(format!(
                        "{} violations in {} evaluations, worst excess {:e}",
                        stat.violations, stat.evaluations, stat.worst_excess
                    )),
                    stat.violations == 0,
                );
            }
        }
        Err(e) => push("entropy_inequality", Err(e), false),
    }
    out
}
