//! Two benchmark problems with infinitely many flux discontinuities
//! accumulating at a point, and their exact solutions at one reference time.
//!
//! * `paper-ex1`: `g(z) = z^2 / 2`, `beta = u + r(x)`; the solution at `t = 1`
//!   is a chain of rarefactions and stationary shocks.
//! * `paper-ex2`: a degenerate piecewise-linear `g`, `beta = u - r(x)`,
//!   `u0 = 2`; at `t = 6` the solution has settled onto `r`.
//!
//! The breakpoint sequences are kept until consecutive points coincide in
//! floating point, so the discrete models carry every interval a grid can see.

use std::fmt;
use std::str::FromStr;

use crate::coefficient::SpatialCoefficient;
use crate::diagnostics::stable_sum;
use crate::error::{Error, Result};
use crate::flux::{FluxModel, Profile, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceId {
    Benchmark1,
    Benchmark2,
}

impl ReferenceId {
    pub const ALL: [ReferenceId; 2] = [ReferenceId::Benchmark1, ReferenceId::Benchmark2];

    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceId::Benchmark1 => "paper-ex1",
            ReferenceId::Benchmark2 => "paper-ex2",
        }
    }

    /// The only time at which the exact solution is known.
    pub fn reference_time(self) -> f64 {
        match self {
            ReferenceId::Benchmark1 => 1.0,
            ReferenceId::Benchmark2 => 6.0,
        }
    }

    pub fn default_domain(self) -> (f64, f64) {
        (0.0, 6.0)
    }
}

impl fmt::Display for ReferenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReferenceId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnsupportedReference(format!("unknown reference `{s}`")))
    }
}

/// Where a point falls relative to a geometric partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// `x < a_1`.
    Left,
    /// `a_n <= x < a_{n+1}`, with `n` counted from 1.
    Cell(usize),
    /// `x >= a_inf`.
    Right,
}

/// Points `a_1 < a_2 < ...` accumulating at `a_inf`; the interval
/// `[a_n, a_{n+1})` is called `C_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricPartition {
    pub p: f64,
    pub q: f64,
    /// `a[0] = a_1`.
    pub a: Vec<f64>,
    pub accumulation: f64,
}

impl GeometricPartition {
    /// Width of `C_n` in the first benchmark: `p q^{n-1} - p q^n` for odd `n`,
    /// `p q^{n-2} - p q^{n-1}` for even `n`.
    pub fn example1_width(p: f64, q: f64, n: usize) -> f64 {
        let e = if n % 2 == 1 { n - 1 } else { n - 2 };
        p * q.powi(e as i32) * (1.0 - q)
    }

    pub fn example1(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) || !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidInput(format!(
                "need p > 0 and 0 < q < 1, got p = {p}, q = {q}"
            )));
        }
        // a_inf = 1 + sum of widths, summed until the tail is below 1e-15 relative.
        let mut widths = Vec::new();
        let mut n = 1;
        loop {
            let w = Self::example1_width(p, q, n);
            widths.push(w);
            let sum = 1.0 + stable_sum(widths.iter().copied());
            // Remaining tail after an even index is q^2 / (1 - q^2) times the
            // current pair, which bounds it for either parity.
            let tail = 2.0 * w / (1.0 - q * q);
            if n % 2 == 0 && tail < 1e-15 * sum {
                break;
            }
            n += 1;
        }
        let accumulation = 1.0 + stable_sum(widths.iter().copied());
        let mut a = vec![1.0];
        for n in 1.. {
            let last = *a.last().unwrap();
            let next = last + Self::example1_width(p, q, n);
            if next <= last || next >= accumulation {
                break;
            }
            a.push(next);
        }
        Ok(Self {
            p,
            q,
            a,
            accumulation,
        })
    }

    /// `a_n = 5 (1 - 0.8^n)`, accumulating at 5.
    pub fn example2() -> Self {
        let q: f64 = 0.8;
        let mut a: Vec<f64> = Vec::new();
        for n in 1.. {
            let v = 5.0 * (1.0 - q.powi(n));
            if a.last().is_some_and(|l| v <= *l) || v >= 5.0 {
                break;
            }
            a.push(v);
        }
        Self {
            p: 1.0,
            q,
            a,
            accumulation: 5.0,
        }
    }

    /// Number of partition points kept.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `a_n` for `n >= 1`, with `a_inf` past the last kept point.
    pub fn point(&self, n: usize) -> f64 {
        assert!(n >= 1, "partition points are numbered from 1");
        self.a.get(n - 1).copied().unwrap_or(self.accumulation)
    }

    pub fn locate(&self, x: f64) -> Location {
        if x < self.a[0] {
            Location::Left
        } else if x >= self.accumulation {
            Location::Right
        } else {
            Location::Cell(self.a.partition_point(|b| *b <= x))
        }
    }

    /// Builds a coefficient with `left` before `a_1`, `cell(n)` on `C_n` and
    /// `right` from `a_inf` on.
    fn coefficient(&self, left: f64, cell: impl Fn(usize) -> f64, right: f64) -> Result<SpatialCoefficient> {
        let mut breaks = self.a.clone();
        breaks.push(self.accumulation);
        let mut values = vec![left];
        values.extend((1..=self.a.len()).map(cell));
        values.push(right);
        SpatialCoefficient::new(breaks, values)
    }
}

/// The first benchmark: rarefactions and stationary shocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Example1 {
    pub partition: GeometricPartition,
}

impl Example1 {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        Ok(Self {
            partition: GeometricPartition::example1(p, q)?,
        })
    }

    fn pq(&self, e: i32) -> f64 {
        self.partition.p * self.partition.q.powi(e)
    }

    /// `r(x)`: 4 left of `a_1`, `p q^{n-1}` on `C_n`, 0 from `a_inf` on.
    pub fn r(&self, x: f64) -> f64 {
        match self.partition.locate(x) {
            Location::Left => 4.0,
            Location::Cell(n) => self.pq(n as i32 - 1),
            Location::Right => 0.0,
        }
    }

    pub fn model(&self) -> Result<FluxModel> {
        let r = self
            .partition
            .coefficient(4.0, |n| self.pq(n as i32 - 1), 0.0)?;
        // beta = u + r is a shift by -r.
        FluxModel::new(Profile::Quadratic, Transform::Shift { offset: r.map(|v| -v)? })
    }

    pub fn initial(&self, x: f64) -> f64 {
        match self.partition.locate(x) {
            Location::Left => -self.pq(1),
            Location::Cell(n) if n % 2 == 1 => -self.pq(n as i32),
            Location::Cell(n) => -self.pq(n as i32 - 2),
            Location::Right => 0.0,
        }
    }

    /// Exact solution at `t = 1`.
    pub fn exact(&self, x: f64) -> f64 {
        let part = &self.partition;
        match part.locate(x) {
            Location::Left | Location::Cell(1) => -self.pq(1),
            Location::Cell(n) if n % 2 == 1 => x - part.point(n) - self.pq(n as i32 - 1),
            Location::Cell(n) => x - part.point(n + 1) - self.pq(n as i32 - 1),
            Location::Right => 0.0,
        }
    }
}

/// The second benchmark: relaxation onto the plateau.
#[derive(Debug, Clone, PartialEq)]
pub struct Example2 {
    pub partition: GeometricPartition,
}

impl Default for Example2 {
    fn default() -> Self {
        Self::new()
    }
}

impl Example2 {
    pub fn new() -> Self {
        Self {
            partition: GeometricPartition::example2(),
        }
    }

    fn r_n(n: usize) -> f64 {
        1.0 - (-0.8_f64).powi(n as i32)
    }

    /// `r(x)`: 2 left of 1, `1 - (-0.8)^n` on `C_n`, 1 from 5 on.
    pub fn r(&self, x: f64) -> f64 {
        match self.partition.locate(x) {
            Location::Left => 2.0,
            Location::Cell(n) => Self::r_n(n),
            Location::Right => 1.0,
        }
    }

    pub fn profile() -> Profile {
        Profile::PlateauLinear {
            z_minus: -1.0,
            z_plus: 0.0,
            left_slope: 1.0,
            right_slope: 1.0,
        }
    }

    pub fn model(&self) -> Result<FluxModel> {
        let r = self.partition.coefficient(2.0, Self::r_n, 1.0)?;
        FluxModel::new(Self::profile(), Transform::Shift { offset: r })
    }

    pub fn initial(&self, _x: f64) -> f64 {
        2.0
    }

    /// Exact solution at `t = 6`.
    pub fn exact(&self, x: f64) -> f64 {
        self.r(x)
    }
}

/// A benchmark problem: flux model, initial data and exact solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Ex1(Example1),
    Ex2(Example2),
}

impl Reference {
    pub fn new(id: ReferenceId) -> Result<Self> {
        Ok(match id {
            ReferenceId::Benchmark1 => Reference::Ex1(Example1::new(4.0, 0.8)?),
            ReferenceId::Benchmark2 => Reference::Ex2(Example2::new()),
        })
    }

    pub fn id(&self) -> ReferenceId {
        match self {
            Reference::Ex1(_) => ReferenceId::Benchmark1,
            Reference::Ex2(_) => ReferenceId::Benchmark2,
        }
    }

    pub fn model(&self) -> Result<FluxModel> {
        match self {
            Reference::Ex1(e) => e.model(),
            Reference::Ex2(e) => e.model(),
        }
    }

    pub fn initial(&self, x: f64) -> f64 {
        match self {
            Reference::Ex1(e) => e.initial(x),
            Reference::Ex2(e) => e.initial(x),
        }
    }

    /// Exact solution; only the reference time is supported.
    pub fn exact(&self, x: f64, t: f64) -> Result<f64> {
        let t_ref = self.id().reference_time();
        if (t - t_ref).abs() > 1e-12 * t_ref {
            return Err(Error::UnsupportedReference(format!(
                "{} has an exact solution only at t = {t_ref}, not t = {t}",
                self.id()
            )));
        }
        Ok(match self {
            Reference::Ex1(e) => e.exact(x),
            Reference::Ex2(e) => e.exact(x),
        })
    }
}

pub fn example1_model(p: f64, q: f64) -> Result<(FluxModel, Example1)> {
    let e = Example1::new(p, q)?;
    Ok((e.model()?, e))
}

pub fn example2_model() -> Result<(FluxModel, Example2)> {
    let e = Example2::new();
    Ok((e.model()?, e))
}

pub fn eval_exact(id: ReferenceId, x: f64, t: f64) -> Result<f64> {
    Reference::new(id)?.exact(x, t)
}
