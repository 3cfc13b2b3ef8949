//! Artifact writers: CSV tables, two-column plot data, a small SVG renderer
//! and the JSON run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! value reads back bit-for-bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{CheckStat, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::experiment::{ConvergenceRow, RunConstants, Snapshot, TvHistoryRow};

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("cannot write {}: {e}", path.display()))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// `x,u,beta[,exact,abs_error]`, one row per cell.
pub fn snapshot_csv(s: &Snapshot) -> String {
    let mut out = String::new();
    match &s.exact {
        Some(exact) => {
            out.push_str("x,u,beta,exact,abs_error\n");
            for (((x, u), b), e) in s.x.iter().zip(&s.u).zip(&s.beta).zip(exact) {
                let _ = writeln!(out, "{},{},{},{},{}", num(*x), num(*u), num(*b), num(*e), num((u - e).abs()));
            }
        }
        None => {
            out.push_str("x,u,beta\n");
            for ((x, u), b) in s.x.iter().zip(&s.u).zip(&s.beta) {
                let _ = writeln!(out, "{},{},{}", num(*x), num(*u), num(*b));
            }
        }
    }
    out
}

/// One row per level; the `l1_error` column appears when a reference is configured.
pub fn diagnostics_csv(records: &[DiagnosticsRecord], with_l1: bool) -> String {
    let mut out = String::from("n,t,tv_u,tv_beta,mass,entropy_residual_max,time_continuity_sum");
    out.push_str(if with_l1 { ",l1_error\n" } else { "\n" });
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            r.level,
            num(r.time),
            num(r.tv_u),
            num(r.tv_beta),
            num(r.mass),
            num(r.entropy_residual_max),
            num(r.time_continuity_sum)
        );
        if with_l1 {
            out.push(',');
            if let Some(e) = r.l1_error {
                out.push_str(&num(e));
            }
        }
        out.push('\n');
    }
    out
}

/// Whitespace-separated two-column data.
pub fn two_column(x: &[f64], y: &[f64]) -> String {
    let mut out = String::new();
    for (a, b) in x.iter().zip(y) {
        let _ = writeln!(out, "{} {}", num(*a), num(*b));
    }
    out
}

/// Line plot of the numerical solution, with the exact solution overlaid
/// when known.
pub fn snapshot_svg(s: &Snapshot) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let mut ys: Vec<f64> = s.u.clone();
    if let Some(e) = &s.exact {
        ys.extend(e);
    }
    let (x0, x1) = (s.x[0], s.x[s.x.len() - 1]);
    let mut y0 = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let mut y1 = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let line = |vals: &[f64]| -> String {
        s.x.iter()
            .zip(vals)
            .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(
        out,
        "<text x=\"{PAD}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">t = {}   x in [{}, {}]   u in [{:.4}, {:.4}]</text>",
        PAD - 10.0,
        s.time,
        x0,
        x1,
        y0,
        y1
    );
    if let Some(e) = &s.exact {
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"{}\"/>", line(e));
    }
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"1.5\" stroke-dasharray=\"4 2\" points=\"{}\"/>",
        line(&s.u)
    );
    out.push_str("</svg>\n");
    out
}

/// Writes the CSV, plot data and SVG of one snapshot into `dir`.
pub fn write_snapshot(dir: &Path, s: &Snapshot, plots: bool) -> Result<()> {
    let stem = format!("snapshot_{:06}", s.level);
    write_file(&dir.join(format!("{stem}.csv")), &snapshot_csv(s))?;
    if plots {
        write_file(&dir.join(format!("{stem}_u.dat")), &two_column(&s.x, &s.u))?;
        if let Some(e) = &s.exact {
            write_file(&dir.join(format!("{stem}_exact.dat")), &two_column(&s.x, e))?;
        }
        write_file(&dir.join(format!("{stem}.svg")), &snapshot_svg(s))?;
    }
    Ok(())
}

/// Reproducibility record of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub software: &'static str,
    pub version: &'static str,
    pub command: String,
    /// The configuration as parsed, in TOML.
    pub config: String,
    pub seed: Option<u64>,
    pub constants: RunConstants,
    pub checks: BTreeMap<&'static str, CheckStat>,
    pub l1_error: Option<f64>,
    pub failure: Option<String>,
    pub passed: bool,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default()
    }
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("M,l1_error,tv_u,tv_beta\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.m_cells, num(r.l1_error), num(r.tv_u), num(r.tv_beta));
    }
    out
}

fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let fmt_row = |cells: Vec<&str>| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = fmt_row(header.to_vec());
    out.push('\n');
    for r in rows {
        out.push_str(&fmt_row(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

pub fn convergence_text(rows: &[ConvergenceRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.m_cells.to_string(),
                format!("{:.4e}", r.l1_error),
                format!("{:.4}", r.tv_u),
                format!("{:.4e}", r.tv_beta),
            ]
        })
        .collect();
    aligned(&["M", "e_dx", "TV(u)", "TV(beta)"], &body)
}

pub fn tv_history_csv(rows: &[TvHistoryRow]) -> String {
    let mut out = String::from("t,tv_u,tv_beta\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", num(r.time), num(r.tv_u), num(r.tv_beta));
    }
    out
}

pub fn tv_history_text(rows: &[TvHistoryRow]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![format!("{}", r.time), format!("{:.4}", r.tv_u), format!("{:.4e}", r.tv_beta)])
        .collect();
    aligned(&["t", "TV(u)", "TV(beta)"], &body)
}
