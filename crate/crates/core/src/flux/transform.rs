//! The inner map `beta(x, u)` of a composite flux `A(x, u) = g(beta(x, u))`.

use super::root::solve_increasing;
use crate::coefficient::{Breakpoints, SpatialCoefficient};
use crate::error::{Error, Result};

/// Inflation applied to slope bounds estimated from tabulated data.
pub const TABLE_SLOPE_INFLATION: f64 = 1.05;

/// A strictly increasing map `u -> beta`, sampled at nodes and linearly
/// interpolated (and extrapolated with the end slopes).
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTable {
    u: Vec<f64>,
    beta: Vec<f64>,
}

impl MonotoneTable {
    pub fn new(u: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if u.len() < 2 || u.len() != beta.len() {
            return Err(Error::InvalidInput(format!(
                "monotone table needs matching columns of length >= 2 (got {} and {})",
                u.len(),
                beta.len()
            )));
        }
        if u.iter().chain(beta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("monotone table has non-finite entries".into()));
        }
        if u.windows(2).any(|w| w[0] >= w[1]) || beta.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "monotone table columns must be strictly increasing".into(),
            ));
        }
        Ok(Self { u, beta })
    }

    /// Tabulates `f` at `n + 1` equally spaced nodes of `[lo, hi]`.
    pub fn sample(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let n = n.max(1);
        let u: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let beta = u.iter().map(|v| f(*v)).collect();
        Self::new(u, beta)
    }

    fn slopes(&self) -> impl Iterator<Item = f64> + '_ {
        self.u
            .windows(2)
            .zip(self.beta.windows(2))
            .map(|(u, b)| (b[1] - b[0]) / (u[1] - u[0]))
    }

    pub fn eval(&self, u: f64) -> f64 {
        let n = self.u.len();
        let i = self.u.partition_point(|v| *v <= u).clamp(1, n - 1);
        let (u0, u1) = (self.u[i - 1], self.u[i]);
        let (b0, b1) = (self.beta[i - 1], self.beta[i]);
        b0 + (b1 - b0) * (u - u0) / (u1 - u0)
    }

    fn max_slope(&self) -> f64 {
        self.slopes().fold(0.0, f64::max) * TABLE_SLOPE_INFLATION
    }

    fn min_slope(&self) -> f64 {
        self.slopes().fold(f64::INFINITY, f64::min) / TABLE_SLOPE_INFLATION
    }
}

/// Strictly increasing maps usable as one piece of a piecewise `beta`.
#[derive(Debug, Clone, PartialEq)]
pub enum MonotoneMap {
    /// `slope * u + intercept`, `slope > 0`.
    Affine { slope: f64, intercept: f64 },
    /// `u |u|`. Its slope vanishes at 0, so it violates the uniform lower slope bound.
    SignedSquare,
    /// `slope * u + sin(u + phase)`, `slope > 1`.
    Trig { slope: f64, phase: f64 },
    /// `u + u^3`.
    Cubic,
    Table(MonotoneTable),
}

impl MonotoneMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            MonotoneMap::Affine { slope, intercept } => {
                if !(*slope > 0.0 && slope.is_finite() && intercept.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "affine map needs a positive finite slope (got {slope})"
                    )));
                }
            }
            MonotoneMap::Trig { slope, phase } => {
                if !(*slope > 1.0 && slope.is_finite() && phase.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "trig map needs slope > 1 to stay strictly increasing (got {slope})"
                    )));
                }
            }
            MonotoneMap::SignedSquare | MonotoneMap::Cubic | MonotoneMap::Table(_) => {}
        }
        Ok(())
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            MonotoneMap::Affine { slope, intercept } => slope * u + intercept,
            MonotoneMap::SignedSquare => u * u.abs(),
            MonotoneMap::Trig { slope, phase } => slope * u + (u + phase).sin(),
            MonotoneMap::Cubic => u + u * u * u,
            MonotoneMap::Table(t) => t.eval(u),
        }
    }

    pub fn inverse(&self, z: f64) -> Result<f64> {
        match self {
            MonotoneMap::Affine { slope, intercept } => Ok((z - intercept) / slope),
            MonotoneMap::SignedSquare => Ok(z.signum() * z.abs().sqrt()),
            _ => solve_increasing(|u| self.eval(u), z, 0.0, self.lower_slope()),
        }
    }

    /// Upper bound on the slope over `[-r, r]`.
    pub fn upper_slope(&self, r: f64) -> f64 {
        let r = r.abs();
        match self {
            MonotoneMap::Affine { slope, .. } => *slope,
            MonotoneMap::SignedSquare => 2.0 * r,
            MonotoneMap::Trig { slope, .. } => slope + 1.0,
            MonotoneMap::Cubic => 1.0 + 3.0 * r * r,
            MonotoneMap::Table(t) => t.max_slope(),
        }
    }

    /// Lower bound on the slope over the whole real line.
    pub fn lower_slope(&self) -> f64 {
        match self {
            MonotoneMap::Affine { slope, .. } => *slope,
            MonotoneMap::SignedSquare => 0.0,
            MonotoneMap::Trig { slope, .. } => slope - 1.0,
            MonotoneMap::Cubic => 1.0,
            MonotoneMap::Table(t) => t.min_slope(),
        }
    }
}

/// The map `beta(x, u)`, piecewise constant in `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// `beta = u - offset(x)`.
    Shift { offset: SpatialCoefficient },
    /// `beta = factor(x) * u`, `factor > 0`.
    Scale { factor: SpatialCoefficient },
    /// `beta = maps[i](u)` on the i-th interval of `breakpoints`.
    Piecewise {
        breakpoints: Breakpoints,
        maps: Vec<MonotoneMap>,
    },
}

impl Transform {
    pub fn validate(&self) -> Result<()> {
        match self {
            Transform::Shift { .. } => Ok(()),
            Transform::Scale { factor } => {
                if factor.min() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidInput(format!(
                        "scale factor must be positive (min {})",
                        factor.min()
                    )))
                }
            }
            Transform::Piecewise { breakpoints, maps } => {
                if maps.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidInput(format!(
                        "{} breakpoints need {} maps, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        maps.len()
                    )));
                }
                maps.iter().try_for_each(MonotoneMap::validate)
            }
        }
    }

    pub fn at(&self, x: f64) -> LocalBeta<'_> {
        match self {
            Transform::Shift { offset } => LocalBeta::Shift(offset.eval(x)),
            Transform::Scale { factor } => LocalBeta::Scale(factor.eval(x)),
            Transform::Piecewise { breakpoints, maps } => {
                LocalBeta::Map(&maps[breakpoints.locate(x)])
            }
        }
    }

    /// One local map per interval, tails included.
    pub fn pieces(&self) -> Vec<LocalBeta<'_>> {
        match self {
            Transform::Shift { offset } => {
                offset.values().iter().map(|v| LocalBeta::Shift(*v)).collect()
            }
            Transform::Scale { factor } => {
                factor.values().iter().map(|v| LocalBeta::Scale(*v)).collect()
            }
            Transform::Piecewise { maps, .. } => maps.iter().map(LocalBeta::Map).collect(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        match self {
            Transform::Shift { offset } => offset.breakpoints(),
            Transform::Scale { factor } => factor.breakpoints(),
            Transform::Piecewise { breakpoints, .. } => breakpoints.as_slice(),
        }
    }

    /// The BV function `alpha(x)` controlling the x-variation of `beta`.
    pub fn variation_coefficient(&self, x: f64) -> f64 {
        match self {
            Transform::Shift { offset } => offset.eval(x),
            Transform::Scale { factor } => factor.eval(x),
            Transform::Piecewise { breakpoints, .. } => breakpoints.locate(x) as f64,
        }
    }

    /// `K4(u)`: `|beta(x,u) - beta(y,u)| <= K4(u) |alpha(x) - alpha(y)|`.
    pub fn variation_weight(&self, u: f64) -> f64 {
        match self {
            Transform::Shift { .. } => 1.0,
            Transform::Scale { .. } => u.abs(),
            Transform::Piecewise { maps, .. } => {
                let vals: Vec<f64> = maps.iter().map(|m| m.eval(u)).collect();
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            }
        }
    }

    /// Total variation of `alpha` over the real line.
    pub fn variation_total(&self) -> f64 {
        match self {
            Transform::Shift { offset } => offset.total_variation(),
            Transform::Scale { factor } => factor.total_variation(),
            Transform::Piecewise { breakpoints, .. } => breakpoints.len() as f64,
        }
    }

    /// `K3(r)`: upper slope bound of `u -> beta(x, u)` on `[-r, r]`, uniform in x.
    pub fn upper_slope(&self, r: f64) -> f64 {
        self.pieces()
            .iter()
            .map(|p| p.upper_slope(r))
            .fold(0.0, f64::max)
    }

    /// `K2`: lower slope bound of `u -> beta(x, u)`, uniform in x and u.
    pub fn lower_slope(&self) -> f64 {
        self.pieces()
            .iter()
            .map(LocalBeta::lower_slope)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `beta(x, .)` resolved at a fixed `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalBeta<'a> {
    Shift(f64),
    Scale(f64),
    Map(&'a MonotoneMap),
}

impl LocalBeta<'_> {
    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            LocalBeta::Shift(offset) => u - offset,
            LocalBeta::Scale(factor) => factor * u,
            LocalBeta::Map(m) => m.eval(u),
        }
    }

    pub fn inverse(&self, z: f64) -> Result<f64> {
        match self {
            LocalBeta::Shift(offset) => Ok(z + offset),
            LocalBeta::Scale(factor) => Ok(z / factor),
            LocalBeta::Map(m) => m.inverse(z),
        }
    }

    pub fn upper_slope(&self, r: f64) -> f64 {
        match self {
            LocalBeta::Shift(_) => 1.0,
            LocalBeta::Scale(factor) => *factor,
            LocalBeta::Map(m) => m.upper_slope(r),
        }
    }

    pub fn lower_slope(&self) -> f64 {
        match self {
            LocalBeta::Shift(_) => 1.0,
            LocalBeta::Scale(factor) => *factor,
            LocalBeta::Map(m) => m.lower_slope(),
        }
    }
}
