//! The outer function `g` of a composite flux `A(x, u) = g(beta(x, u))`.

use crate::error::{Error, Result};

/// Side of the plateau on which a level set of `g` is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Decreasing branch, `z <= z_minus`.
    Minus,
    /// Increasing branch, `z >= z_plus`.
    Plus,
}

/// Shapes of `g` supported by the solver. Each vanishes on a plateau
/// `[z_minus, z_plus]` containing 0 and is monotone on either side of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `g(z) = z^2 / 2`.
    Quadratic,
    /// `g(z) = (z - z_plus)^2` right of the plateau, `(z - z_minus)^2` left of it.
    PlateauQuadratic { z_minus: f64, z_plus: f64 },
    /// `right_slope (z - z_plus)` right of the plateau, `left_slope (z_minus - z)` left of it.
    PlateauLinear {
        z_minus: f64,
        z_plus: f64,
        left_slope: f64,
        right_slope: f64,
    },
    /// `g(z) = |z|`.
    Abs,
    /// `g = 0` everywhere. Fully degenerate; only useful as a negative control.
    Zero,
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let (zm, zp) = self.plateau();
        if !(zm.is_finite() && zp.is_finite()) || zm > 0.0 || zp < 0.0 {
            return Err(Error::InvalidInput(format!(
                "plateau [{zm}, {zp}] must be finite and contain 0"
            )));
        }
        if let Profile::PlateauLinear {
            left_slope,
            right_slope,
            ..
        } = self
        {
            if !(*left_slope > 0.0 && *right_slope > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "plateau-linear slopes must be positive ({left_slope}, {right_slope})"
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: f64) -> f64 {
        match *self {
            Profile::Quadratic => 0.5 * z * z,
            Profile::PlateauQuadratic { z_minus, z_plus } => {
                if z < z_minus {
                    (z - z_minus) * (z - z_minus)
                } else if z > z_plus {
                    (z - z_plus) * (z - z_plus)
                } else {
                    0.0
                }
            }
            Profile::PlateauLinear {
                z_minus,
                z_plus,
                left_slope,
                right_slope,
            } => {
                if z < z_minus {
                    left_slope * (z_minus - z)
                } else if z > z_plus {
                    right_slope * (z - z_plus)
                } else {
                    0.0
                }
            }
            Profile::Abs => z.abs(),
            Profile::Zero => 0.0,
        }
    }

    /// The declared plateau `(z_minus, z_plus)`.
    pub fn plateau(&self) -> (f64, f64) {
        match *self {
            Profile::PlateauQuadratic { z_minus, z_plus }
            | Profile::PlateauLinear {
                z_minus, z_plus, ..
            } => (z_minus, z_plus),
            Profile::Quadratic | Profile::Abs | Profile::Zero => (0.0, 0.0),
        }
    }

    /// `K1(r)`: Lipschitz constant of `g` on `[-r, r]`.
    pub fn lipschitz(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match *self {
            Profile::Quadratic => r,
            Profile::PlateauQuadratic { z_minus, z_plus } => {
                2.0 * (r - z_plus).max(r + z_minus).max(0.0)
            }
            Profile::PlateauLinear {
                z_minus,
                z_plus,
                left_slope,
                right_slope,
            } => {
                let mut k: f64 = 0.0;
                if r > z_plus {
                    k = k.max(right_slope);
                }
                if -r < z_minus {
                    k = k.max(left_slope);
                }
                k
            }
            Profile::Abs => 1.0,
            Profile::Zero => 0.0,
        }
    }

    /// `kappa(s)`: growth of `g` away from the plateau.
    pub fn growth(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match *self {
            Profile::Quadratic => 0.5 * s * s,
            Profile::PlateauQuadratic { .. } => s * s,
            Profile::PlateauLinear {
                left_slope,
                right_slope,
                ..
            } => left_slope.min(right_slope) * s,
            Profile::Abs => s,
            Profile::Zero => 0.0,
        }
    }

    /// The point `z` on the requested branch with `g(z) = level`.
    ///
    /// Level 0 maps to the plateau endpoint of that side. Returns `None` when
    /// the level is negative or not attained.
    pub fn level_inverse(&self, level: f64, side: Side) -> Option<f64> {
        if !(level >= 0.0) || !level.is_finite() {
            return None;
        }
        let (zm, zp) = self.plateau();
        if level == 0.0 {
            return Some(match side {
                Side::Minus => zm,
                Side::Plus => zp,
            });
        }
        let z = match (*self, side) {
            (Profile::Quadratic, Side::Plus) => (2.0 * level).sqrt(),
            (Profile::Quadratic, Side::Minus) => -(2.0 * level).sqrt(),
            (Profile::PlateauQuadratic { z_plus, .. }, Side::Plus) => z_plus + level.sqrt(),
            (Profile::PlateauQuadratic { z_minus, .. }, Side::Minus) => z_minus - level.sqrt(),
            (
                Profile::PlateauLinear {
                    z_plus,
                    right_slope,
                    ..
                },
                Side::Plus,
            ) => z_plus + level / right_slope,
            (
                Profile::PlateauLinear {
                    z_minus,
                    left_slope,
                    ..
                },
                Side::Minus,
            ) => z_minus - level / left_slope,
            (Profile::Abs, Side::Plus) => level,
            (Profile::Abs, Side::Minus) => -level,
            (Profile::Zero, _) => return None,
        };
        Some(z)
    }
}
