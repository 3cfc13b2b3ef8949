use adflux::coefficient::{Breakpoints, SpatialCoefficient};
use adflux::flux::{MonotoneMap, MonotoneTable, Profile, Transform};
use adflux::reference::{example1_model, example2_model};
use adflux::{Error, FluxModel};
use proptest::prelude::*;

fn shift(r: f64, profile: Profile) -> FluxModel {
    FluxModel::new(
        profile,
        Transform::Shift {
            offset: SpatialCoefficient::constant(r).unwrap(),
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

/// Independent evaluation of the first benchmark flux: `(u + r(x))^2 / 2`
/// with `r` rebuilt from the partition widths.
fn ex1_flux_oracle(x: f64, u: f64) -> f64 {
    let (p, q) = (4.0_f64, 0.8_f64);
    let mut a = 1.0;
    let r = if x < 1.0 {
        4.0
    } else {
        let mut value = 0.0;
        for n in 1..400 {
            let e = if n % 2 == 1 { n - 1 } else { n - 2 };
            let next = a + p * q.powi(e) * (1.0 - q);
            if x < next {
                value = p * q.powi(n - 1);
                break;
            }
            a = next;
        }
        value
    };
    0.5 * (u + r) * (u + r)
}

#[test]
fn composition_examples() {
    let (m1, _) = example1_model(4.0, 0.8).unwrap();
    assert!((m1.eval_flux(0.0, -3.2).unwrap() - 0.32).abs() < 1e-15);
    assert!((m1.eval_beta(0.0, -3.2).unwrap() - 0.8).abs() < 1e-15);

    let (m2, ex2) = example2_model().unwrap();
    for x in [0.5, 1.2, 2.0, 3.0, 4.9, 5.5] {
        assert_eq!(m2.eval_flux(x, ex2.r(x)).unwrap(), 0.0);
    }
    assert_eq!(m2.eval_flux(0.5, 2.0).unwrap(), 0.0);
    assert_eq!(m2.eval_beta(0.5, 2.0).unwrap(), 0.0);

    let scaled = FluxModel::new(
        Profile::Quadratic,
        Transform::Scale {
            factor: SpatialCoefficient::constant(2.0).unwrap(),
        },
    )
    .unwrap();
    assert_eq!(scaled.eval_beta(0.3, 3.0).unwrap(), 6.0);
}

#[test]
fn first_benchmark_matches_independent_evaluation() {
    let (m, _) = example1_model(4.0, 0.8).unwrap();
    for i in 0..600 {
        let x = 0.01 * i as f64;
        for u in [-4.0, -1.3, 0.0, 0.7, 2.5] {
            let got = m.eval_flux(x, u).unwrap();
            let want = ex1_flux_oracle(x, u);
            assert!((got - want).abs() <= 1e-12 * (1.0 + want), "x={x} u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn inverse_examples() {
    let m = shift(2.0, ex2_profile());
    assert_eq!(m.eval_beta_inverse(0.0, 0.0).unwrap(), 2.0);
    let m = shift(1.8, ex2_profile());
    assert!((m.eval_beta_inverse(0.0, 1.0).unwrap() - 2.8).abs() < 1e-15);

    let table = MonotoneTable::sample(|u| u + u * u * u, -3.0, 3.0, 6000).unwrap();
    let t = FluxModel::new(
        Profile::Quadratic,
        Transform::Piecewise {
            breakpoints: Breakpoints::empty(),
            maps: vec![MonotoneMap::Table(table)],
        },
    )
    .unwrap();
    assert!((t.eval_beta_inverse(0.0, 2.0).unwrap() - 1.0).abs() < 1e-10);

    let cubic = FluxModel::new(
        Profile::Quadratic,
        Transform::Piecewise {
            breakpoints: Breakpoints::empty(),
            maps: vec![MonotoneMap::Cubic],
        },
    )
    .unwrap();
    assert!((cubic.eval_beta_inverse(0.0, 2.0).unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn plateau_examples() {
    let p = shift(2.0, ex2_profile()).plateau_bounds(0.0).unwrap();
    assert_eq!((p.u_m_minus, p.u_m_plus, p.u_m), (1.0, 2.0, 2.0));
    let p = shift(4.0, Profile::Quadratic).plateau_bounds(0.0).unwrap();
    assert_eq!((p.u_m_minus, p.u_m_plus, p.u_m), (4.0, 4.0, 4.0));
    let scaled = FluxModel::new(
        Profile::PlateauQuadratic {
            z_minus: -1.0,
            z_plus: 1.0,
        },
        Transform::Scale {
            factor: SpatialCoefficient::constant(2.0).unwrap(),
        },
    )
    .unwrap();
    let p = scaled.plateau_bounds(0.0).unwrap();
    assert_eq!((p.u_m_minus, p.u_m, p.u_m_plus), (-0.5, 0.0, 0.5));
}

#[test]
fn bound_examples() {
    let m = FluxModel::new(
        Profile::Quadratic,
        Transform::Shift {
            offset: SpatialCoefficient::new(vec![0.0], vec![-4.0, 4.0]).unwrap(),
        },
    )
    .unwrap();
    let b = m.lipschitz_bounds(8.0).unwrap();
    assert_eq!((b.p_bound, b.l_g, b.l_beta, b.l), (12.0, 12.0, 1.0, 12.0));

    let (m2, _) = example2_model().unwrap();
    for bound in [0.5, 3.0, 50.0] {
        let b = m2.lipschitz_bounds(bound).unwrap();
        assert_eq!((b.l_g, b.l_beta, b.l), (1.0, 1.0, 1.0));
    }

    let b = shift(0.0, Profile::Quadratic).lipschitz_bounds(0.0).unwrap();
    assert_eq!((b.p_bound, b.l), (0.0, 0.0));
}

#[test]
fn non_finite_inputs_are_rejected() {
    let m = shift(1.0, Profile::Quadratic);
    assert!(matches!(m.eval_flux(f64::NAN, 0.0), Err(Error::InvalidInput(_))));
    assert!(matches!(m.eval_beta(0.0, f64::INFINITY), Err(Error::InvalidInput(_))));
    assert!(matches!(m.eval_beta_inverse(0.0, f64::NAN), Err(Error::InvalidInput(_))));
}

#[test]
fn validator_on_built_in_and_broken_fluxes() {
    let (m1, _) = example1_model(4.0, 0.8).unwrap();
    let xs: Vec<f64> = (0..60).map(|i| 0.05 + 0.1 * i as f64).collect();
    let report = m1.validate_assumptions(&xs, 5.0);
    assert!(report.all_passed(), "{report:?}");

    let blowup = FluxModel::new(
        Profile::Abs,
        Transform::Piecewise {
            breakpoints: Breakpoints::new(vec![0.0]).unwrap(),
            maps: vec![
                MonotoneMap::SignedSquare,
                MonotoneMap::Affine {
                    slope: 1.0,
                    intercept: 0.0,
                },
            ],
        },
    )
    .unwrap();
    let report = blowup.validate_assumptions(&[-1.0, -0.5, 0.5, 1.0], 2.0);
    let c6 = report.checks.iter().find(|c| c.id == "C-6").unwrap();
    assert!(!c6.passed);

    let flat = shift(0.0, Profile::Zero);
    let report = flat.validate_assumptions(&[0.0, 1.0], 2.0);
    let c2 = report.checks.iter().find(|c| c.id == "C-2").unwrap();
    assert!(!c2.passed);
}

fn arb_model() -> impl Strategy<Value = FluxModel> {
    let breaks = prop::collection::btree_set(-40i32..40, 0..5)
        .prop_map(|s| s.into_iter().map(|v| v as f64 * 0.1).collect::<Vec<_>>());
    (breaks, 0usize..3, prop::collection::vec(-3.0f64..3.0, 6), prop::collection::vec(0.3f64..3.0, 6))
        .prop_map(|(b, kind, offsets, factors)| {
            let n = b.len() + 1;
            let profile = match kind {
                0 => Profile::Quadratic,
                1 => ex2_profile(),
                _ => Profile::PlateauQuadratic {
                    z_minus: -0.5,
                    z_plus: 0.25,
                },
            };
            let transform = if kind == 2 {
                Transform::Scale {
                    factor: SpatialCoefficient::new(b, factors[..n].to_vec()).unwrap(),
                }
            } else {
                Transform::Shift {
                    offset: SpatialCoefficient::new(b, offsets[..n].to_vec()).unwrap(),
                }
            };
            FluxModel::new(profile, transform).unwrap()
        })
}

proptest! {
    #[test]
    fn flux_is_g_of_beta_and_nonnegative(m in arb_model(), x in -5.0f64..5.0, u in -6.0f64..6.0) {
        let a = m.eval_flux(x, u).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, m.g(m.eval_beta(x, u).unwrap()));
    }

    #[test]
    fn beta_increasing_and_inverse_round_trips(m in arb_model(), x in -5.0f64..5.0, u in -6.0f64..6.0, du in 1e-6f64..3.0) {
        let b0 = m.eval_beta(x, u).unwrap();
        prop_assert!(m.eval_beta(x, u + du).unwrap() > b0);
        let back = m.eval_beta_inverse(x, b0).unwrap();
        prop_assert!((back - u).abs() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn plateau_is_ordered_and_flat(m in arb_model(), x in -5.0f64..5.0, s in 0.0f64..=1.0) {
        let p = m.plateau_bounds(x).unwrap();
        prop_assert!(p.u_m_minus <= p.u_m && p.u_m <= p.u_m_plus);
        let u = p.u_m_minus + s * (p.u_m_plus - p.u_m_minus);
        prop_assert!(m.eval_flux(x, u).unwrap() <= 1e-15);
    }

    #[test]
    fn lipschitz_constant_bounds_difference_quotients(
        m in arb_model(), x in -5.0f64..5.0, bound in 0.5f64..6.0, s in -1.0f64..1.0, t in -1.0f64..1.0,
    ) {
        let b = m.lipschitz_bounds(bound).unwrap();
        let (u, v) = (s * bound, t * bound);
        let diff = (m.eval_flux(x, u).unwrap() - m.eval_flux(x, v).unwrap()).abs();
        prop_assert!(diff <= b.l * (u - v).abs() * (1.0 + 1e-12) + 1e-13);
        prop_assert!(m.eval_beta(x, u).unwrap().abs() <= b.p_bound * (1.0 + 1e-12));
    }
}
