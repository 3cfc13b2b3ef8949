//! Piecewise-constant spatial coefficients.
//!
//! A coefficient is described by a strictly increasing list of breakpoints
//! `b_0 < b_1 < ... < b_{k-1}` and `k + 1` values: `values[0]` holds on
//! `(-inf, b_0)`, `values[i]` on `[b_{i-1}, b_i)` and `values[k]` on
//! `[b_{k-1}, inf)`. Intervals are half-open, so a coefficient evaluated
//! exactly at a breakpoint takes the value of the interval to its right.

use crate::error::{Error, Result};

/// Strictly increasing breakpoint list shared by all piecewise-in-x objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints(Vec<f64>);

impl Breakpoints {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!("breakpoint {p} is not finite")));
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "breakpoints must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        Ok(Self(points))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the interval containing `x` (0 ..= len).
    pub fn locate(&self, x: f64) -> usize {
        self.0.partition_point(|b| *b <= x)
    }

    /// Number of bounded intervals `[b_i, b_{i+1})` containing no point of `xs`.
    pub fn intervals_without_samples(&self, xs: &[f64]) -> usize {
        self.0
            .windows(2)
            .filter(|w| !xs.iter().any(|x| *x >= w[0] && *x < w[1]))
            .count()
    }
}

/// A real-valued coefficient that is constant between breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCoefficient {
    breakpoints: Breakpoints,
    values: Vec<f64>,
}

impl SpatialCoefficient {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let breakpoints = Breakpoints::new(breakpoints)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("coefficient value {v} is not finite")));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(Vec::new(), vec![value])
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.values[self.breakpoints.locate(x)]
    }

    pub fn breakpoints(&self) -> &[f64] {
        self.breakpoints.as_slice()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_tail(&self) -> f64 {
        self.values[0]
    }

    pub fn right_tail(&self) -> f64 {
        *self.values.last().expect("at least one value")
    }

    /// Total variation of the coefficient over the real line.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.breakpoints.as_slice().to_vec(),
            self.values.iter().map(|v| f(*v)).collect(),
        )
    }
}
