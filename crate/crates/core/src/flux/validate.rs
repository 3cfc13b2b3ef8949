//! Sampling-based spot checks of the structural assumptions on the flux.

use std::fmt;

use super::FluxModel;

const REL: f64 = 1e-9;
const ABS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub id: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    /// Worst sample found, or a note on what was evaluated.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<4} {} [{}]",
                if c.passed { "PASS" } else { "FAIL" },
                c.id,
                c.statement,
                c.detail
            )?;
        }
        Ok(())
    }
}

/// Tracks the worst ratio `lhs / rhs` seen over a sampled inequality `lhs <= rhs`.
struct Worst {
    excess: f64,
    at: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self {
            excess: f64::NEG_INFINITY,
            at: None,
        }
    }

    fn record(&mut self, excess: f64, at: impl FnOnce() -> String) {
        if excess > self.excess {
            self.excess = excess;
            self.at = Some(at());
        }
    }

    fn passed(&self) -> bool {
        self.excess <= 0.0
    }

    fn detail(&self) -> String {
        match &self.at {
            Some(at) => format!("worst margin {:.3e} at {}", -self.excess, at),
            None => "no samples".to_string(),
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

pub(super) fn validate(model: &FluxModel, sample_xs: &[f64], u_range: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let u_range = u_range.abs().max(1e-6);
    let xs: Vec<f64> = if sample_xs.is_empty() {
        vec![0.0]
    } else {
        sample_xs.to_vec()
    };
    let mut us = linspace(-u_range, u_range, 400);
    us.push(0.0);
    us.sort_by(f64::total_cmp);
    us.dedup();

    let profile = model.profile();
    let (zm, zp) = profile.plateau();
    let p_bound = model.beta_sup(u_range);
    let z_span = p_bound.max(zp.abs()).max(zm.abs()) + 1.0;
    let mut zs = linspace(-z_span, z_span, 800);
    zs.extend([zm, zp, 0.0]);
    zs.sort_by(f64::total_cmp);
    zs.dedup();

    let k2 = model.lower_slope();
    let k3 = model.lipschitz_beta_u(u_range);
    let bounds = model.lipschitz_bounds(u_range).ok();

    // A-1
    report.checks.push(AssumptionCheck {
        id: "A-1",
        statement: "A(x, .) continuous off a closed null set of x",
        passed: true,
        detail: format!(
            "{} spatial breakpoints, flux continuous in u",
            model.transform().breakpoints().len()
        ),
    });

    // A-2
    {
        let mut w = Worst::new();
        match bounds {
            Some(b) => {
                for &x in &xs {
                    let loc = model.at(x);
                    for pair in us.windows(2) {
                        let lhs = (loc.flux(pair[1]) - loc.flux(pair[0])).abs();
                        let rhs = b.l * (pair[1] - pair[0]);
                        w.record(lhs - rhs * (1.0 + REL) - ABS, || {
                            format!("x={x}, u={}", pair[0])
                        });
                    }
                }
                report.checks.push(AssumptionCheck {
                    id: "A-2",
                    statement: "A(x, .) Lipschitz on bounded sets",
                    passed: w.passed(),
                    detail: format!("q = {}; {}", b.l, w.detail()),
                });
            }
            None => report.checks.push(AssumptionCheck {
                id: "A-2",
                statement: "A(x, .) Lipschitz on bounded sets",
                passed: false,
                detail: "could not compute bound constants".into(),
            }),
        }
    }

    // A-3 and A-4
    {
        let mut plateau = Worst::new();
        let mut growth = Worst::new();
        let mut inverse_failed = None;
        for &x in &xs {
            let loc = model.at(x);
            let p = match loc.plateau() {
                Ok(p) => p,
                Err(e) => {
                    inverse_failed = Some(format!("x={x}: {e}"));
                    continue;
                }
            };
            for t in linspace(p.u_m_minus, p.u_m_plus, 10) {
                let a = loc.flux(t);
                plateau.record(a.abs() - ABS, || format!("A(x={x}, u={t}) = {a} on plateau"));
            }
            let right = linspace(p.u_m_plus, p.u_m_plus + 2.0 * u_range, 100);
            for pair in right.windows(2) {
                let d = loc.flux(pair[1]) - loc.flux(pair[0]);
                plateau.record(if d > 0.0 { -d } else { 1.0 }, || {
                    format!("A(x={x}, .) not increasing at u={}", pair[0])
                });
            }
            let left = linspace(p.u_m_minus - 2.0 * u_range, p.u_m_minus, 100);
            for pair in left.windows(2) {
                let d = loc.flux(pair[0]) - loc.flux(pair[1]);
                plateau.record(if d > 0.0 { -d } else { 1.0 }, || {
                    format!("A(x={x}, .) not decreasing at u={}", pair[1])
                });
            }
            let gamma = |s: f64| model.growth(k2 * s);
            for &u in right.iter().skip(1) {
                let need = gamma(u - p.u_m_plus);
                growth.record(need * (1.0 - REL) - loc.flux(u) - ABS, || {
                    format!("x={x}, u={u}")
                });
            }
            for &u in left.iter().take(left.len() - 1) {
                let need = gamma(p.u_m_minus - u);
                growth.record(need * (1.0 - REL) - loc.flux(u) - ABS, || {
                    format!("x={x}, u={u}")
                });
            }
            if !(gamma(1.0) > 0.0) {
                growth.record(1.0, || "gamma(1) = 0, not strictly increasing".into());
            }
        }
        let (p_ok, p_detail) = match &inverse_failed {
            Some(e) => (false, e.clone()),
            None => (plateau.passed(), plateau.detail()),
        };
        report.checks.push(AssumptionCheck {
            id: "A-3",
            statement: "A(x, .) vanishes on [u_M^-, u_M^+], decreasing left and increasing right",
            passed: p_ok,
            detail: p_detail,
        });
        report.checks.push(AssumptionCheck {
            id: "A-4",
            statement: "A(x, u) >= gamma(dist(u, plateau)) with gamma(s) = kappa(K2 s)",
            passed: growth.passed() && inverse_failed.is_none(),
            detail: growth.detail(),
        });
    }

    // B-1
    report.checks.push(AssumptionCheck {
        id: "B-1",
        statement: "x -> A(x, u) piecewise constant",
        passed: true,
        detail: "all coefficient families are piecewise constant in x".into(),
    });

    // B-2
    {
        let mut w = Worst::new();
        let mut failed = None;
        for &u in us.iter().step_by(10) {
            let eta = match model.eta(u) {
                Ok(e) => e,
                Err(e) => {
                    failed = Some(e.to_string());
                    break;
                }
            };
            for (i, &x) in xs.iter().enumerate() {
                for &y in xs.iter().skip(i + 1) {
                    let lhs = (model.at(x).flux(u) - model.at(y).flux(u)).abs();
                    let rhs = eta
                        * (model.variation_coefficient(x) - model.variation_coefficient(y)).abs();
                    w.record(lhs - rhs * (1.0 + REL) - ABS, || {
                        format!("u={u}, x={x}, y={y}")
                    });
                }
            }
        }
        report.checks.push(AssumptionCheck {
            id: "B-2",
            statement: "|A(x,u) - A(y,u)| <= eta(u) |a(x) - a(y)| with a BV",
            passed: failed.is_none() && w.passed(),
            detail: failed.unwrap_or_else(|| {
                format!(
                    "TV(a) = {}; {}",
                    model.transform().variation_total(),
                    w.detail()
                )
            }),
        });
    }

    // B-3
    {
        let pieces = model.transform().pieces();
        let (zm, zp) = profile.plateau();
        let mut tv = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        let mut failed = None;
        for p in &pieces {
            match (p.inverse(zm), p.inverse(zp)) {
                (Ok(a), Ok(b)) => {
                    if let Some((pa, pb)) = prev {
                        tv += (a - pa).abs() + (b - pb).abs();
                    }
                    prev = Some((a, b));
                }
                (Err(e), _) | (_, Err(e)) => {
                    failed = Some(e.to_string());
                    break;
                }
            }
        }
        report.checks.push(AssumptionCheck {
            id: "B-3",
            statement: "u_M^+ and u_M^- have bounded variation",
            passed: failed.is_none() && tv.is_finite(),
            detail: failed.unwrap_or_else(|| format!("TV(u_M^-) + TV(u_M^+) = {tv}")),
        });
    }

    // C-1
    report.checks.push(AssumptionCheck {
        id: "C-1",
        statement: "flux has the form A(x,u) = g(beta(x,u))",
        passed: true,
        detail: "holds by construction".into(),
    });

    // C-2
    {
        let mut w = Worst::new();
        for &z in zs.iter().filter(|z| **z >= zm && **z <= zp) {
            let g = profile.eval(z);
            w.record(g.abs() - ABS, || format!("g({z}) = {g} on plateau"));
        }
        let left: Vec<f64> = zs.iter().copied().filter(|z| *z <= zm).collect();
        for pair in left.windows(2) {
            let d = profile.eval(pair[0]) - profile.eval(pair[1]);
            w.record(if d > 0.0 { -d } else { 1.0 }, || {
                format!("g not strictly decreasing at z={}", pair[0])
            });
            let need = profile.growth(zm - pair[0]);
            w.record(need * (1.0 - REL) - profile.eval(pair[0]) - ABS, || {
                format!("g({}) below kappa", pair[0])
            });
        }
        let right: Vec<f64> = zs.iter().copied().filter(|z| *z >= zp).collect();
        for pair in right.windows(2) {
            let d = profile.eval(pair[1]) - profile.eval(pair[0]);
            w.record(if d > 0.0 { -d } else { 1.0 }, || {
                format!("g not strictly increasing at z={}", pair[1])
            });
            let need = profile.growth(pair[1] - zp);
            w.record(need * (1.0 - REL) - profile.eval(pair[1]) - ABS, || {
                format!("g({}) below kappa", pair[1])
            });
        }
        if !(profile.growth(1.0) > 0.0) {
            w.record(1.0, || "kappa(1) = 0, kappa not strictly increasing".into());
        }
        report.checks.push(AssumptionCheck {
            id: "C-2",
            statement: "g = 0 on [z-, z+], strictly monotone outside, g >= kappa(dist)",
            passed: w.passed(),
            detail: w.detail(),
        });
    }

    // C-3
    {
        let mut w = Worst::new();
        for pair in zs.windows(2) {
            let r = pair[0].abs().max(pair[1].abs());
            let lhs = (profile.eval(pair[1]) - profile.eval(pair[0])).abs();
            let rhs = profile.lipschitz(r) * (pair[1] - pair[0]);
            w.record(lhs - rhs * (1.0 + REL) - ABS, || format!("z={}", pair[0]));
        }
        report.checks.push(AssumptionCheck {
            id: "C-3",
            statement: "g locally Lipschitz with constant K1(r)",
            passed: w.passed(),
            detail: w.detail(),
        });
    }

    // C-4
    {
        let mut w = Worst::new();
        for &x in &xs {
            let loc = model.at(x);
            for pair in us.windows(2) {
                let d = loc.beta(pair[1]) - loc.beta(pair[0]);
                w.record(if d > 0.0 { -d } else { 1.0 }, || {
                    format!("beta(x={x}, .) not increasing at u={}", pair[0])
                });
            }
            let far = 1e6 * (1.0 + u_range);
            let grows = loc.beta(far) > loc.beta(u_range) && loc.beta(-far) < loc.beta(-u_range);
            if !grows {
                w.record(1.0, || format!("beta(x={x}, .) bounded"));
            }
        }
        report.checks.push(AssumptionCheck {
            id: "C-4",
            statement: "u -> beta(x,u) strictly increasing and unbounded",
            passed: w.passed(),
            detail: w.detail(),
        });
    }

    // C-5
    {
        let mut w = Worst::new();
        for &x in &xs {
            let loc = model.at(x);
            for pair in us.windows(2) {
                let slope = (loc.beta(pair[1]) - loc.beta(pair[0])) / (pair[1] - pair[0]);
                w.record(slope - k3 * (1.0 + REL) - ABS, || {
                    format!("slope {slope} > K3 = {k3} at x={x}, u={}", pair[0])
                });
            }
        }
        for &u in us.iter().step_by(10) {
            let k4 = model.lipschitz_beta_x(u);
            for (i, &x) in xs.iter().enumerate() {
                for &y in xs.iter().skip(i + 1) {
                    let lhs = (model.at(x).beta(u) - model.at(y).beta(u)).abs();
                    let rhs = k4
                        * (model.variation_coefficient(x) - model.variation_coefficient(y)).abs();
                    w.record(lhs - rhs * (1.0 + REL) - ABS, || {
                        format!("x-variation at u={u}, x={x}, y={y}")
                    });
                }
            }
        }
        report.checks.push(AssumptionCheck {
            id: "C-5",
            statement: "beta Lipschitz in u (K3) and BV-controlled in x (K4, alpha)",
            passed: w.passed(),
            detail: w.detail(),
        });
    }

    // C-6
    {
        let mut w = Worst::new();
        if !(k2 > 0.0) {
            w.record(1.0, || format!("uniform lower slope K2 = {k2} is not positive"));
        }
        let mut min_slope = f64::INFINITY;
        let mut min_at = String::new();
        for &x in &xs {
            let loc = model.at(x);
            for pair in us.windows(2) {
                let slope = (loc.beta(pair[1]) - loc.beta(pair[0])) / (pair[1] - pair[0]);
                if slope < min_slope {
                    min_slope = slope;
                    min_at = format!("x={x}, u={}", pair[0]);
                }
                w.record(k2 * (1.0 - REL) - slope, || {
                    format!("slope {slope} < K2 = {k2} at x={x}, u={}", pair[0])
                });
            }
        }
        report.checks.push(AssumptionCheck {
            id: "C-6",
            statement: "beta(x, .) has a uniform positive lower slope K2",
            passed: w.passed(),
            detail: format!("K2 = {k2}, min sampled slope {min_slope:.4e} at {min_at}; {}", w.detail()),
        });
    }

    report
}
