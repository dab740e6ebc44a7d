use proptest::prelude::*;

use trap_core::observables::{p_stay_symmetric, EnergySpectrum};
use trap_core::potentials::{eval_potential, PotentialShape, ShapeKind, TrapSchedule};
use trap_core::propagator::{propagate, Domain, Grid};
use trap_core::runner::{retention, RunControls, Scenario};
use trap_core::scaling::{rescale_spectrum, scaling_params};
use trap_core::stationary::{solve_bound_states, BoundStateOptions};

fn kind() -> impl Strategy<Value = ShapeKind> {
    prop_oneof![
        Just(ShapeKind::Square),
        Just(ShapeKind::Parabolic),
        Just(ShapeKind::Asymmetric)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_box_evolution_is_unitary(
        k in kind(),
        nu in 0.5f64..4.0,
        v in 0.2f64..5.0,
        dt in 1e-3f64..5e-2,
        t0 in -2.0f64..-0.2,
    ) {
        let shape = PotentialShape::new(k, 1.0).unwrap();
        let sched = TrapSchedule::culling(1.0, nu, v, 0).unwrap();
        let grid = Grid::full_line(8.0, 161).unwrap();
        let opts = BoundStateOptions { max_states: Some(1), tail_tolerance: None };
        let phi = &solve_bound_states(&shape, sched.strength(t0), 1.0, 1.0, &grid, &opts).unwrap()[0];
        let psi = phi.to_wave_field(t0);
        let out = propagate(&psi, &shape, &sched, t0, -t0, dt).unwrap();
        prop_assert!((out.norm_sqr() - psi.norm_sqr()).abs() < 1e-10);
        let p = p_stay_symmetric(&out, &sched).unwrap();
        prop_assert!((0.0..=1.0 + 1e-9).contains(&p));
    }

    #[test]
    fn potential_is_attractive_and_vanishes_outside_support(
        k in kind(),
        a in 0.2f64..3.0,
        x in -10.0f64..10.0,
        t in -3.0f64..3.0,
        squeeze in any::<bool>(),
    ) {
        let shape = PotentialShape::new(k, a).unwrap();
        let sched = if squeeze {
            TrapSchedule::squeezing(0.5, 2.0, 1.5, 1.0, 0).unwrap()
        } else {
            TrapSchedule::culling(0.5, 1.5, 1.0, 0).unwrap()
        };
        let u = eval_potential(&shape, &sched, x, t).unwrap();
        prop_assert!(u <= 0.0);
        if x.abs() > a * sched.width(t) {
            prop_assert_eq!(u, 0.0);
        }
    }

    #[test]
    fn grid_spacing_is_exact_and_box_large_enough(
        l in 1.0f64..200.0,
        dx in 1e-3f64..0.5,
        half in any::<bool>(),
    ) {
        let domain = if half { Domain::HalfLine } else { Domain::FullLine };
        let g = Grid::with_spacing(domain, l, dx).unwrap();
        prop_assert!((g.dx() / dx - 1.0).abs() < 1e-12);
        prop_assert!(g.l_box() >= l * (1.0 - 1e-12));
        prop_assert!(g.l_box() < l + 2.0 * dx);
    }

    #[test]
    fn rescaling_keeps_yield_and_maps_energies(
        mu in 0.2f64..5.0,
        v in 0.2f64..5.0,
        mu2 in 0.2f64..5.0,
        v2 in 0.2f64..5.0,
        nu in 0.3f64..4.0,
        ws in prop::collection::vec(0.0f64..3.0, 2..20),
    ) {
        let samples: Vec<(f64, f64)> = ws.iter().enumerate().map(|(i, &w)| (0.1 * (i + 1) as f64, w)).collect();
        let spec = EnergySpectrum { samples, total_yield: 0.4, valid: true };
        let params = scaling_params(mu, v, mu2, v2, nu).unwrap();
        let scaled = rescale_spectrum(&spec, &params);
        prop_assert_eq!(scaled.total_yield, spec.total_yield);
        for (a, b) in spec.samples.iter().zip(&scaled.samples) {
            prop_assert!((b.0 - params.alpha * a.0).abs() <= 1e-12 * b.0);
            prop_assert!((b.1 * params.alpha - a.1).abs() <= 1e-12 * a.1.max(1e-300));
        }
        prop_assert!((scaled.integral() - spec.integral()).abs() < 1e-10 * spec.integral().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn zero_range_retention_ignores_mass_and_rate(
        mu in 0.5f64..2.0,
        v in 0.5f64..2.0,
    ) {
        let ctl = RunControls { dx_tol: None, ..Default::default() };
        let base = retention(&Scenario::zero_range(2.0, 1.0, 1.0), &ctl).unwrap().p_stay;
        let p = retention(&Scenario::zero_range(2.0, v, mu), &ctl).unwrap().p_stay;
        prop_assert!((p - base).abs() < 2e-3, "{} vs {}", p, base);
    }
}
