//! Command-line front end. The binary only forwards its arguments to [`main_with_args`].
//!
//! Exit codes: 0 when every check passed, 1 when a check failed, 2 for usage
//! or configuration errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{Problem, RunConfig};
use crate::error::{Error, Result};
use crate::experiment::{
    self, convergence_sweep, execute, property_suite, tv_beta_nonincreasing, tv_history, RunResult, RunSpec,
};
use crate::output::{self, write_file, RunManifest};
use crate::scheme::Grid1D;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Grid size used by `validate` for its property suite.
pub const VALIDATE_CELLS: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "adflux", version, about = "Godunov solver for conservation laws with discontinuous, degenerate flux")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `outputs.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized property checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run each configured grid and write snapshots, diagnostics and a manifest.
    Run,
    /// Error and total variation against the reference for every grid size.
    Convergence,
    /// Total variation at each snapshot time.
    TvHistory,
    /// Check the flux assumptions and the discrete properties on a small grid.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Convergence => "convergence",
            Command::TvHistory => "tv-history",
            Command::Validate => "validate",
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidInput(_) | Error::UnsupportedReference(_) => EXIT_USAGE,
        Error::RootFailure(_) | Error::InvariantViolation(_) => EXIT_CHECK_FAILED,
    }
}

struct Context {
    config: RunConfig,
    problem: Problem,
    out: PathBuf,
    seed: u64,
    command: Command,
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let config = RunConfig::load(path)?;
    let problem = config.resolve()?;
    let out = cli.out.clone().unwrap_or_else(|| config.outputs.dir.clone());
    let ctx = Context {
        config,
        problem,
        out,
        seed: cli.seed,
        command: cli.command,
    };
    let work = || match cli.command {
        Command::Run => cmd_run(&ctx),
        Command::Convergence => cmd_convergence(&ctx),
        Command::TvHistory => cmd_tv_history(&ctx),
        Command::Validate => cmd_validate(&ctx),
    };
    match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn spec_for<'a>(ctx: &'a Context, grid: Grid1D, initial: &'a (dyn Fn(f64) -> f64 + Sync), snapshot_times: Vec<f64>) -> RunSpec<'a> {
    RunSpec {
        model: &ctx.problem.model,
        initial,
        reference: ctx.problem.reference.as_ref(),
        grid,
        t_final: ctx.problem.t_final,
        cfl_safety: ctx.problem.cfl_safety,
        overrides: ctx.config.overrides,
        snapshot_times,
        entropy_checks: ctx.config.outputs.entropy_checks,
    }
}

fn manifest(ctx: &Context, result: &RunResult, elapsed: f64) -> RunManifest {
    RunManifest {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: ctx.command.name().to_string(),
        config: ctx.config.to_toml(),
        seed: Some(ctx.seed),
        constants: result.constants.clone(),
        checks: result.checks.clone(),
        l1_error: result.l1_error,
        failure: result.failure.clone(),
        passed: result.passed(),
        wall_clock_seconds: elapsed,
    }
}

fn run_one(ctx: &Context, m: usize, dir: &Path) -> Result<RunResult> {
    let start = Instant::now();
    let initial = |x: f64| ctx.problem.initial.eval(x);
    let grid = Grid1D::new(ctx.problem.domain.0, ctx.problem.domain.1, m)?;
    let spec = spec_for(ctx, grid, &initial, ctx.problem.snapshot_times.clone());
    let result = execute(&spec)?;
    let outputs = &ctx.config.outputs;
    if outputs.snapshots {
        for s in &result.snapshots {
            output::write_snapshot(dir, s, outputs.plots)?;
        }
    }
    if outputs.diagnostics {
        let csv = output::diagnostics_csv(&result.records, ctx.problem.reference.is_some());
        write_file(&dir.join("diagnostics.csv"), &csv)?;
    }
    let m = manifest(ctx, &result, start.elapsed().as_secs_f64());
    write_file(&dir.join("manifest.json"), &m.to_json())?;
    Ok(result)
}

fn failed_checks(result: &RunResult) -> String {
    let mut names: Vec<String> = result
        .checks
        .iter()
        .filter(|(_, c)| c.violations > 0)
        .map(|(n, c)| format!("{n} ({} violations)", c.violations))
        .collect();
    if let Some(f) = &result.failure {
        names.push(f.clone());
    }
    names.join(", ")
}

fn cmd_run(ctx: &Context) -> Result<i32> {
    let ms = &ctx.problem.m_list;
    let single = ms.len() == 1;
    let results: Vec<(usize, Result<RunResult>)> = ms
        .par_iter()
        .map(|&m| {
            let dir = if single { ctx.out.clone() } else { ctx.out.join(format!("m{m}")) };
            (m, run_one(ctx, m, &dir))
        })
        .collect();
    let mut all_passed = true;
    for (m, r) in results {
        let r = r?;
        let last = r.last_record();
        println!(
            "M={m} N={} lambda={} tv_u={} tv_beta={}{} {}",
            r.constants.n_steps,
            r.constants.lambda,
            last.map_or(f64::NAN, |l| l.tv_u),
            last.map_or(f64::NAN, |l| l.tv_beta),
            r.l1_error.map(|e| format!(" l1_error={e}")).unwrap_or_default(),
            if r.passed() { "PASS".to_string() } else { format!("FAIL: {}", failed_checks(&r)) }
        );
        all_passed &= r.passed();
    }
    Ok(if all_passed { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn cmd_convergence(ctx: &Context) -> Result<i32> {
    let reference = ctx
        .problem
        .reference
        .as_ref()
        .ok_or_else(|| Error::Config("convergence needs run.reference".into()))?;
    let start = Instant::now();
    let results = convergence_sweep(
        &ctx.problem.model,
        reference,
        ctx.problem.domain,
        &ctx.problem.m_list,
        ctx.problem.t_final,
        ctx.problem.cfl_safety,
        ctx.config.outputs.entropy_checks,
    )?;
    let rows: Vec<_> = results.iter().map(|(r, _)| r.clone()).collect();
    write_file(&ctx.out.join("convergence.csv"), &output::convergence_csv(&rows))?;
    let text = output::convergence_text(&rows);
    write_file(&ctx.out.join("convergence.txt"), &text)?;
    print!("{text}");
    let elapsed = start.elapsed().as_secs_f64();
    let manifests: Vec<RunManifest> = results.iter().map(|(_, r)| manifest(ctx, r, elapsed)).collect();
    let json = serde_json::to_string_pretty(&manifests).map_err(|e| Error::Config(e.to_string()))?;
    write_file(&ctx.out.join("manifest.json"), &json)?;
    let mut ok = true;
    for (row, r) in &results {
        if !r.passed() {
            println!("M={} FAIL: {}", row.m_cells, failed_checks(r));
            ok = false;
        }
    }
    Ok(if ok { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn cmd_tv_history(ctx: &Context) -> Result<i32> {
    let m = match ctx.problem.m_list.as_slice() {
        [m] => *m,
        other => {
            return Err(Error::Config(format!("tv-history needs a single m_cells, got {other:?}")));
        }
    };
    let start = Instant::now();
    let times = match &ctx.config.run.snapshot_times {
        Some(t) => t.clone(),
        None => {
            let t_final = ctx.problem.t_final;
            let mut t: Vec<f64> = (0..=t_final.floor() as usize).map(|k| k as f64).collect();
            if t.last() != Some(&t_final) {
                t.push(t_final);
            }
            t
        }
    };
    let initial = |x: f64| ctx.problem.initial.eval(x);
    let grid = Grid1D::new(ctx.problem.domain.0, ctx.problem.domain.1, m)?;
    let spec = spec_for(ctx, grid, &initial, times);
    let result = execute(&spec)?;
    let rows = tv_history(&result);
    write_file(&ctx.out.join("tv_history.csv"), &output::tv_history_csv(&rows))?;
    let text = output::tv_history_text(&rows);
    write_file(&ctx.out.join("tv_history.txt"), &text)?;
    print!("{text}");
    write_file(
        &ctx.out.join("manifest.json"),
        &manifest(ctx, &result, start.elapsed().as_secs_f64()).to_json(),
    )?;
    let monotone = tv_beta_nonincreasing(&rows);
    if !monotone {
        println!("FAIL: TV(beta) increased between snapshots");
    }
    if !result.passed() {
        println!("FAIL: {}", failed_checks(&result));
    }
    Ok(if monotone && result.passed() { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

/// Sample points for the assumption checks: the cell centers plus both sides
/// of every breakpoint inside the window.
fn validation_points(ctx: &Context, grid: &Grid1D) -> Vec<f64> {
    let mut xs = grid.extended_centers();
    let (a, b) = (grid.ghost_left_x(), grid.ghost_right_x());
    for &p in ctx.problem.model.transform().breakpoints() {
        if p >= a && p <= b {
            let h = 1e-9 * (1.0 + p.abs());
            xs.extend([p - h, p]);
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

fn cmd_validate(ctx: &Context) -> Result<i32> {
    let m = ctx.problem.m_list[0].min(VALIDATE_CELLS).max(2);
    let (xa, xb) = ctx.problem.domain;
    let grid = Grid1D::new(xa, xb, m)?;
    let initial = |x: f64| ctx.problem.initial.eval(x);
    let u_range = {
        let spec = spec_for(ctx, grid.clone(), &initial, Vec::new());
        experiment::prepare(&spec).map_or(1.0, |p| p.solver.m_bound().max(1.0))
    };
    let report = ctx
        .problem
        .model
        .validate_assumptions(&validation_points(ctx, &grid), u_range);
    let mut text = report.to_string();
    let mut ok = report.all_passed();
    for check in property_suite(&ctx.problem.model, &initial, ctx.problem.domain, m, ctx.seed) {
        text.push_str(&format!(
            "{} {} [{}]\n",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        ));
        ok &= check.passed;
    }
    text.push_str(&format!("{}\n", if ok { "ALL PASS" } else { "SOME CHECKS FAILED" }));
    write_file(&ctx.out.join("validate.txt"), &text)?;
    print!("{text}");
    Ok(if ok { EXIT_PASS } else { EXIT_CHECK_FAILED })
}
