//! Flux model `A(x, u) = g(beta(x, u))`.
//!
//! `g` vanishes on a plateau `[z_minus, z_plus]` and is strictly monotone on
//! either side; `u -> beta(x, u)` is strictly increasing and piecewise constant
//! in `x`. The model also carries the bound functions the scheme needs:
//!
//! | symbol | method                    | meaning                                  |
//! |--------|---------------------------|------------------------------------------|
//! | K1(r)  | [`FluxModel::lipschitz_g`]      | Lipschitz constant of g on [-r, r]  |
//! | K2     | [`FluxModel::lower_slope`]      | uniform lower slope of beta in u    |
//! | K3(r)  | [`FluxModel::lipschitz_beta_u`] | upper slope of beta in u on [-r, r] |
//! | K4(u)  | [`FluxModel::lipschitz_beta_x`] | x-variation weight of beta          |
//! | kappa  | [`FluxModel::growth`]           | growth of g off the plateau         |

mod profile;
mod root;
mod transform;
mod validate;

pub use profile::{Profile, Side};
pub use root::{solve_increasing, MAX_BISECTIONS, TOL_ROOT};
pub use transform::{LocalBeta, MonotoneMap, MonotoneTable, Transform, TABLE_SLOPE_INFLATION};
pub use validate::{AssumptionCheck, ValidationReport};

use crate::error::{ensure_finite, Error, Result};

/// Plateau geometry of `u -> A(x, u)` at a fixed `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauInfo {
    pub u_m_minus: f64,
    pub u_m_plus: f64,
    /// `beta^{-1}(x, 0)`, the plateau point the interface flux clamps to.
    pub u_m: f64,
}

/// Constants derived from a bound `m` on `|u|`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundSet {
    /// Lipschitz constant of `u -> A(x, u)` on `[-m, m]`, taken as `l_g * l_beta`.
    pub l: f64,
    pub l_g: f64,
    pub l_beta: f64,
    pub eta_bar: f64,
    /// `sup |beta(x, u)|` over `|u| <= m` and all `x`.
    pub p_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxModel {
    profile: Profile,
    transform: Transform,
}

/// The flux resolved at a fixed `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFlux<'a> {
    pub profile: &'a Profile,
    pub beta: LocalBeta<'a>,
}

impl LocalFlux<'_> {
    #[inline]
    pub fn flux(&self, u: f64) -> f64 {
        self.profile.eval(self.beta.eval(u))
    }

    #[inline]
    pub fn beta(&self, u: f64) -> f64 {
        self.beta.eval(u)
    }

    pub fn plateau(&self) -> Result<PlateauInfo> {
        let (zm, zp) = self.profile.plateau();
        Ok(PlateauInfo {
            u_m_minus: self.beta.inverse(zm)?,
            u_m_plus: self.beta.inverse(zp)?,
            u_m: self.beta.inverse(0.0)?,
        })
    }
}

impl FluxModel {
    pub fn new(profile: Profile, transform: Transform) -> Result<Self> {
        profile.validate()?;
        transform.validate()?;
        Ok(Self { profile, transform })
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    #[inline]
    pub fn at(&self, x: f64) -> LocalFlux<'_> {
        LocalFlux {
            profile: &self.profile,
            beta: self.transform.at(x),
        }
    }

    pub fn g(&self, z: f64) -> f64 {
        self.profile.eval(z)
    }

    pub fn eval_flux(&self, x: f64, u: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        ensure_finite("u", u)?;
        Ok(self.at(x).flux(u))
    }

    pub fn eval_beta(&self, x: f64, u: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        ensure_finite("u", u)?;
        Ok(self.at(x).beta(u))
    }

    pub fn eval_beta_inverse(&self, x: f64, z: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        ensure_finite("z", z)?;
        self.transform.at(x).inverse(z)
    }

    pub fn plateau_bounds(&self, x: f64) -> Result<PlateauInfo> {
        ensure_finite("x", x)?;
        self.at(x).plateau()
    }

    /// K1.
    pub fn lipschitz_g(&self, r: f64) -> f64 {
        self.profile.lipschitz(r)
    }

    /// K3.
    pub fn lipschitz_beta_u(&self, r: f64) -> f64 {
        self.transform.upper_slope(r)
    }

    /// K2.
    pub fn lower_slope(&self) -> f64 {
        self.transform.lower_slope()
    }

    /// K4.
    pub fn lipschitz_beta_x(&self, u: f64) -> f64 {
        self.transform.variation_weight(u)
    }

    /// kappa.
    pub fn growth(&self, s: f64) -> f64 {
        self.profile.growth(s)
    }

    /// `alpha(x)`, the BV coefficient whose jumps bound the x-variation of beta.
    pub fn variation_coefficient(&self, x: f64) -> f64 {
        self.transform.variation_coefficient(x)
    }

    /// `sup_x |u_M(x)|`, exact over the finitely many pieces of beta.
    pub fn plateau_center_bound(&self) -> Result<f64> {
        self.transform
            .pieces()
            .iter()
            .try_fold(0.0_f64, |m, p| Ok(m.max(p.inverse(0.0)?.abs())))
    }

    /// `sup |beta(x, u)|` over `|u| <= m` and all `x`.
    pub fn beta_sup(&self, m: f64) -> f64 {
        let m = m.abs();
        self.transform
            .pieces()
            .iter()
            .map(|p| p.eval(-m).abs().max(p.eval(m).abs()))
            .fold(0.0, f64::max)
    }

    /// `eta(u) = K1(K3(|u|) (|u| + K0)) K4(u)`.
    pub fn eta(&self, u: f64) -> Result<f64> {
        let a = u.abs();
        let k0 = self.plateau_center_bound()?;
        let k3_tilde = self.lipschitz_beta_u(a) * (a + k0);
        Ok(self.lipschitz_g(k3_tilde) * self.lipschitz_beta_x(u))
    }

    pub fn lipschitz_bounds(&self, m_bound: f64) -> Result<BoundSet> {
        if !(m_bound >= 0.0) || !m_bound.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bound on |u| must be finite and nonnegative (got {m_bound})"
            )));
        }
        let p_bound = self.beta_sup(m_bound);
        let l_g = self.lipschitz_g(p_bound);
        let l_beta = self.lipschitz_beta_u(m_bound);
        let k0 = self.plateau_center_bound()?;
        const SAMPLES: usize = 200;
        let mut eta_bar: f64 = 0.0;
        for i in 0..=SAMPLES {
            let u = -m_bound + 2.0 * m_bound * i as f64 / SAMPLES as f64;
            let a = u.abs();
            let k3_tilde = self.lipschitz_beta_u(a) * (a + k0);
            eta_bar = eta_bar.max(self.lipschitz_g(k3_tilde) * self.lipschitz_beta_x(u));
        }
        Ok(BoundSet {
            l: l_g * l_beta,
            l_g,
            l_beta,
            eta_bar,
            p_bound,
        })
    }

    pub fn validate_assumptions(&self, sample_xs: &[f64], u_range: f64) -> ValidationReport {
        validate::validate(self, sample_xs, u_range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::SpatialCoefficient;

    fn shift(breaks: Vec<f64>, offsets: Vec<f64>, profile: Profile) -> FluxModel {
        FluxModel::new(
            profile,
            Transform::Shift {
                offset: SpatialCoefficient::new(breaks, offsets).unwrap(),
            },
        )
        .unwrap()
    }

    fn ex2_profile() -> Profile {
        Profile::PlateauLinear {
            z_minus: -1.0,
            z_plus: 0.0,
            left_slope: 1.0,
            right_slope: 1.0,
        }
    }

    #[test]
    fn flux_composition() {
        // beta = u + 4 left of x = 1
        let m = shift(vec![1.0], vec![-4.0, 0.0], Profile::Quadratic);
        assert!((m.eval_beta(0.0, -3.2).unwrap() - 0.8).abs() < 1e-15);
        assert!((m.eval_flux(0.0, -3.2).unwrap() - 0.32).abs() < 1e-15);
        // independent evaluation: (u + r)^2 / 2
        let (u, r) = (-3.2_f64, 4.0_f64);
        assert!((m.eval_flux(0.0, u).unwrap() - (u + r).powi(2) / 2.0).abs() < 1e-15);
        assert!(m.eval_flux(f64::NAN, 0.0).is_err());
        assert!(m.eval_flux(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn degenerate_flux_vanishes_on_its_stationary_profile() {
        let m = shift(vec![1.0], vec![2.0, 1.8], ex2_profile());
        assert_eq!(m.eval_flux(0.5, 2.0).unwrap(), 0.0);
        assert_eq!(m.eval_flux(1.5, 1.8).unwrap(), 0.0);
        assert_eq!(m.eval_beta(0.5, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn beta_inverse_examples() {
        let m = shift(vec![1.0], vec![2.0, 1.8], ex2_profile());
        assert_eq!(m.eval_beta_inverse(0.0, 0.0).unwrap(), 2.0);
        assert!((m.eval_beta_inverse(1.2, 1.0).unwrap() - 2.8).abs() < 1e-15);

        let s = FluxModel::new(
            Profile::Quadratic,
            Transform::Scale {
                factor: SpatialCoefficient::constant(2.0).unwrap(),
            },
        )
        .unwrap();
        assert_eq!(s.eval_beta(7.0, 3.0).unwrap(), 6.0);

        let t = MonotoneTable::sample(|u| u + u * u * u, -3.0, 3.0, 60).unwrap();
        let tab = FluxModel::new(
            Profile::Quadratic,
            Transform::Piecewise {
                breakpoints: crate::coefficient::Breakpoints::empty(),
                maps: vec![MonotoneMap::Table(t)],
            },
        )
        .unwrap();
        assert!((tab.eval_beta_inverse(0.0, 2.0).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn plateau_bound_examples() {
        let m = shift(vec![], vec![2.0], ex2_profile());
        let p = m.plateau_bounds(0.0).unwrap();
        assert_eq!((p.u_m_minus, p.u_m_plus, p.u_m), (1.0, 2.0, 2.0));

        let m = shift(vec![], vec![4.0], Profile::Quadratic);
        let p = m.plateau_bounds(0.0).unwrap();
        assert_eq!((p.u_m_minus, p.u_m_plus, p.u_m), (4.0, 4.0, 4.0));

        let s = FluxModel::new(
            Profile::PlateauQuadratic {
                z_minus: -1.0,
                z_plus: 1.0,
            },
            Transform::Scale {
                factor: SpatialCoefficient::constant(2.0).unwrap(),
            },
        )
        .unwrap();
        let p = s.plateau_bounds(0.0).unwrap();
        assert_eq!((p.u_m_minus, p.u_m_plus, p.u_m), (-0.5, 0.5, 0.0));
    }

    #[test]
    fn lipschitz_bound_examples() {
        let m = shift(vec![0.0, 1.0], vec![4.0, -4.0, 0.0], Profile::Quadratic);
        let b = m.lipschitz_bounds(8.0).unwrap();
        assert_eq!((b.p_bound, b.l_g, b.l_beta, b.l), (12.0, 12.0, 1.0, 12.0));

        let m2 = shift(vec![1.0], vec![2.0, 1.8], ex2_profile());
        for mb in [0.5, 3.0, 40.0] {
            let b = m2.lipschitz_bounds(mb).unwrap();
            assert_eq!((b.l_g, b.l_beta, b.l), (1.0, 1.0, 1.0));
        }

        let z = shift(vec![], vec![0.0], Profile::Quadratic);
        let b = z.lipschitz_bounds(0.0).unwrap();
        assert_eq!((b.p_bound, b.l), (0.0, 0.0));
        assert!(z.lipschitz_bounds(-1.0).is_err());
    }

    #[test]
    fn eta_bounds_x_variation_of_flux() {
        let m = shift(vec![0.0, 1.0], vec![4.0, -4.0, 0.0], Profile::Quadratic);
        for u in [-3.0, -0.5, 0.0, 2.5] {
            let eta = m.eta(u).unwrap();
            for (x, y) in [(-1.0, 0.5), (0.5, 2.0), (-1.0, 2.0)] {
                let lhs = (m.eval_flux(x, u).unwrap() - m.eval_flux(y, u).unwrap()).abs();
                let rhs = eta * (m.variation_coefficient(x) - m.variation_coefficient(y)).abs();
                assert!(lhs <= rhs + 1e-12, "u={u} x={x} y={y}: {lhs} > {rhs}");
            }
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::coefficient::SpatialCoefficient;
    use proptest::prelude::*;

    fn models() -> Vec<FluxModel> {
        let offset =
            SpatialCoefficient::new(vec![-1.0, 0.0, 1.5], vec![0.3, -2.0, 1.0, 0.5]).unwrap();
        let factor = SpatialCoefficient::new(vec![0.0], vec![0.5, 3.0]).unwrap();
        vec![
            FluxModel::new(Profile::Quadratic, Transform::Shift { offset: offset.clone() })
                .unwrap(),
            FluxModel::new(
                Profile::PlateauLinear {
                    z_minus: -1.0,
                    z_plus: 0.5,
                    left_slope: 2.0,
                    right_slope: 1.0,
                },
                Transform::Scale { factor },
            )
            .unwrap(),
            FluxModel::new(
                Profile::PlateauQuadratic {
                    z_minus: -0.5,
                    z_plus: 0.0,
                },
                Transform::Piecewise {
                    breakpoints: crate::coefficient::Breakpoints::new(vec![0.0]).unwrap(),
                    maps: vec![
                        MonotoneMap::Trig {
                            slope: 2.0,
                            phase: 0.0,
                        },
                        MonotoneMap::Cubic,
                    ],
                },
            )
            .unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn beta_slope_bounds(x in -3.0f64..3.0, a in -4.0f64..4.0, b in -4.0f64..4.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (u1, u2) = if a < b { (a, b) } else { (b, a) };
            for m in models() {
                let d = m.eval_beta(x, u2).unwrap() - m.eval_beta(x, u1).unwrap();
                let k2 = m.lower_slope();
                let k3 = m.lipschitz_beta_u(4.0);
                prop_assert!(d >= k2 * (u2 - u1) * (1.0 - 1e-12));
                prop_assert!(d <= k3 * (u2 - u1) * (1.0 + 1e-12));
            }
        }

        #[test]
        fn beta_inverse_round_trip(x in -3.0f64..3.0, u in -5.0f64..5.0) {
            for m in models() {
                let z = m.eval_beta(x, u).unwrap();
                let back = m.eval_beta_inverse(x, z).unwrap();
                let k2 = m.lower_slope();
                // |u - back| <= |beta(back) - z| / K2
                prop_assert!((back - u).abs() <= 2.0 * TOL_ROOT / k2 + 1e-13 * (1.0 + u.abs()));
            }
        }

        #[test]
        fn flux_vanishes_exactly_on_plateau(x in -3.0f64..3.0, u in -5.0f64..5.0) {
            for m in models() {
                let z = m.eval_beta(x, u).unwrap();
                let (zm, zp) = m.profile().plateau();
                let a = m.eval_flux(x, u).unwrap();
                if z >= zm && z <= zp {
                    prop_assert_eq!(a, 0.0);
                } else if z < zm - TOL_ROOT || z > zp + TOL_ROOT {
                    prop_assert!(a > 0.0);
                }
            }
        }

        #[test]
        fn plateau_center_bounded_by_beta_at_zero(x in -3.0f64..3.0) {
            for m in models() {
                let p = m.plateau_bounds(x).unwrap();
                prop_assert!(p.u_m_minus <= p.u_m && p.u_m <= p.u_m_plus);
                let bound = m.eval_beta(x, 0.0).unwrap().abs() / m.lower_slope();
                prop_assert!(p.u_m.abs() <= bound * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}
