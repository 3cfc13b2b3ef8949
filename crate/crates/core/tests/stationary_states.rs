use adflux::coefficient::SpatialCoefficient;
use adflux::flux::{Profile, Transform};
use adflux::reference::{example1_model, example2_model};
use adflux::scheme::sample_initial_data;
use adflux::stationary::{compute_alpha_bar, discrete_stationary_state, solution_bound, solve_k_alpha, Branch};
use adflux::{FluxModel, Grid1D};
use proptest::prelude::*;

#[test]
fn closed_form_quadratic_branches() {
    // beta = u + r with r = 4: A = (u + 4)^2 / 2, so k^+ = sqrt(2 alpha) - 4
    let m = FluxModel::new(
        Profile::Quadratic,
        Transform::Shift {
            offset: SpatialCoefficient::constant(-4.0).unwrap(),
        },
    )
    .unwrap();
    for alpha in [0.0, 0.5, 2.0, 7.3] {
        let want = (2.0 * alpha as f64).sqrt() - 4.0;
        assert!((solve_k_alpha(0.0, alpha, Branch::Plus, &m).unwrap() - want).abs() < 1e-14);
        let want = -(2.0 * alpha as f64).sqrt() - 4.0;
        assert!((solve_k_alpha(0.0, alpha, Branch::Minus, &m).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn second_benchmark_branches() {
    let (m, ex) = example2_model().unwrap();
    let r1 = 1.0 + 0.8;
    let x = 1.2;
    assert!((ex.r(x) - r1).abs() < 1e-15);
    // g(z) = z on z >= 0, so k^+ = r + alpha; g(z) = -z - 1 on z <= -1, so k^- = r - 1 - alpha.
    assert!((solve_k_alpha(x, 1.0, Branch::Plus, &m).unwrap() - (r1 + 1.0)).abs() < 1e-15);
    assert!((solve_k_alpha(x, 1.0, Branch::Minus, &m).unwrap() - (r1 - 2.0)).abs() < 1e-15);
    assert_eq!(solve_k_alpha(x, 0.0, Branch::Plus, &m).unwrap(), ex.r(x));

    let grid = Grid1D::new(0.0, 6.0, 400).unwrap();
    let k = discrete_stationary_state(&grid, 0.0, Branch::Plus, &m).unwrap();
    for (v, x) in k.values.iter().zip(grid.centers()) {
        assert_eq!(*v, ex.r(x));
    }
    assert_eq!(k.ghost_left, 2.0);
    assert_eq!(k.ghost_right, 1.0);
}

#[test]
fn minus_branch_lies_below_plateau() {
    let (m, ex) = example1_model(4.0, 0.8).unwrap();
    let grid = Grid1D::new(0.0, 6.0, 200).unwrap();
    let s0 = sample_initial_data(|x| ex.initial(x), &grid).unwrap();
    let alpha_bar = compute_alpha_bar(&s0, &grid, &m);
    let k = discrete_stationary_state(&grid, alpha_bar, Branch::Minus, &m).unwrap();
    for (v, x) in k.values.iter().zip(grid.centers()) {
        assert!(*v <= m.plateau_bounds(x).unwrap().u_m_minus);
        assert!((m.eval_flux(x, *v).unwrap() - alpha_bar).abs() < 1e-12);
    }
    // u0 sits between the two branches at level alpha_bar, hence within M.
    let bound = solution_bound(&s0, &grid, &m, alpha_bar).unwrap();
    assert!(s0.max_abs() <= bound);
}

#[test]
fn data_on_plateau_has_zero_alpha_bar() {
    let (m, _) = example2_model().unwrap();
    let grid = Grid1D::new(0.0, 6.0, 100).unwrap();
    let s = sample_initial_data(|x| m.plateau_bounds(x).unwrap().u_m, &grid).unwrap();
    assert_eq!(compute_alpha_bar(&s, &grid, &m), 0.0);
    assert_eq!(solution_bound(&s, &grid, &m, 0.0).unwrap(), 2.0);
}

#[test]
fn spatially_constant_flux_gives_constant_vector() {
    let m = FluxModel::new(
        Profile::PlateauQuadratic {
            z_minus: -1.0,
            z_plus: 0.5,
        },
        Transform::Scale {
            factor: SpatialCoefficient::constant(1.5).unwrap(),
        },
    )
    .unwrap();
    let grid = Grid1D::new(-2.0, 2.0, 17).unwrap();
    for branch in [Branch::Plus, Branch::Minus] {
        let k = discrete_stationary_state(&grid, 0.9, branch, &m).unwrap();
        assert!(k.extended().iter().all(|v| *v == k.values[0]));
    }
}

proptest! {
    #[test]
    fn k_alpha_solves_level_equation(which: bool, x in 0.0f64..6.0, alpha in 0.0f64..5.0, plus: bool) {
        let m = if which { example1_model(4.0, 0.8).unwrap().0 } else { example2_model().unwrap().0 };
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let k = solve_k_alpha(x, alpha, branch, &m).unwrap();
        prop_assert!((m.eval_flux(x, k).unwrap() - alpha).abs() <= 1e-12 * (1.0 + alpha));
        let p = m.plateau_bounds(x).unwrap();
        if plus {
            prop_assert!(k >= p.u_m_plus);
        } else {
            prop_assert!(k <= p.u_m_minus);
        }
    }
}
