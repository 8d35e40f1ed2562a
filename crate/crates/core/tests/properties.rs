use nash_core::holder::{space_norm, DerivativeFamily, Differentiator, Field, NormOptions, NormVariant, SpatialGrid};
use nash_core::lq::{riccati_integrate, CouplingParams, Layout, LqGameSpec};
use nash_core::pde::{
    solve_fpk_grid, solve_grid, stability_limit, DiffusionSpec, FpkOptions, GridOptions, LinearProblem, Profile,
    ScalarFn, VectorFn,
};
use nash_core::weights::{MultiIndex, WeightKind, WeightSequence};
use proptest::prelude::*;

fn poly(a: f64) -> WeightSequence {
    WeightSequence::build(WeightKind::Polynomial { exponent: a }, 16).unwrap()
}

fn index(coords: Vec<usize>) -> MultiIndex {
    MultiIndex::new(&coords).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multi_index_weight_never_exceeds_a_predecessor(
        a in 2.1f64..6.0,
        coords in prop::collection::vec(0usize..5, 1..=3),
    ) {
        let beta = poly(a);
        let alpha = index(coords);
        let w = beta.multi_index_weight(&alpha).unwrap();
        prop_assert!(w > 0.0);
        for p in alpha.predecessors() {
            prop_assert!(w <= beta.multi_index_weight(&p).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn unit_weights_give_unit_multi_index_weights(coords in prop::collection::vec(0usize..5, 0..=3)) {
        let ones = WeightSequence::ones(8);
        prop_assert_eq!(ones.multi_index_weight(&index(coords)).unwrap(), 1.0);
    }

    #[test]
    fn shifted_weights_are_symmetric(a in 2.1f64..6.0, n in 1usize..10, i in 0usize..10, j in 0usize..10) {
        prop_assume!(i < n && j < n);
        let beta = poly(a);
        prop_assert_eq!(beta.shift(i, n).unwrap()[j], beta.shift(j, n).unwrap()[i]);
        prop_assert_eq!(beta.shift_cyclic(i, n).unwrap()[j], beta.shift_cyclic(j, n).unwrap()[i]);
        prop_assert_eq!(beta.shift(i, n).unwrap()[i], beta.at(0));
    }

    #[test]
    fn space_norm_is_homogeneous_and_subadditive(
        c in prop::collection::vec(-1.0f64..1.0, 6),
        k in -3.0f64..3.0,
        minus in any::<bool>(),
    ) {
        let grid = SpatialGrid::new(2, 2.0, 17).unwrap();
        let diff = Differentiator::new(&grid).unwrap();
        let sample = |f: &dyn Fn(&[f64]) -> f64| -> Vec<f64> {
            let mut x = [0.0; 2];
            (0..grid.len()).map(|n| { grid.position(n, &mut x); f(&x) }).collect()
        };
        let u = sample(&|x| c[0] * (x[0] + 0.3 * x[1]).sin() + c[1] * x[0] * x[1] + c[2] * x[1] * x[1]);
        let v = sample(&|x| c[3] * (0.7 * x[1]).cos() + c[4] * x[0] * x[0] * x[0] / 8.0 + c[5]);
        let weights = poly(3.0).shift(0, 2).unwrap();
        let variant = if minus { NormVariant::Minus } else { NormVariant::Full };
        let norm = |vals: &[f64]| {
            let fam = DerivativeFamily::compute(&diff, vals, 2).unwrap();
            space_norm(&diff, &fam, 2, 0.5, &weights, variant, NormOptions::with_collar(2)).unwrap().total
        };
        let (nu, nv) = (norm(&u), norm(&v));
        let ku: Vec<f64> = u.iter().map(|a| k * a).collect();
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!((norm(&ku) - k.abs() * nu).abs() <= 1e-9 * (1.0 + nu));
        prop_assert!(norm(&sum) <= (nu + nv) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn grid_solve_is_linear(
        g in prop::collection::vec(-1.0f64..1.0, 2),
        f in prop::collection::vec(-1.0f64..1.0, 2),
        b in -1.0f64..1.0,
        s in -2.0f64..2.0,
    ) {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let grid = SpatialGrid::new(1, 3.0, 41).unwrap();
        let drift = VectorFn::Constant(vec![b]);
        let g1 = ScalarFn::Sine { coeffs: vec![g[0]] };
        let g2 = ScalarFn::Gaussian { amplitude: g[1], center: vec![0.5], variance: 0.6 };
        let f1 = ScalarFn::Separable { coeffs: vec![f[0]], profile: Profile::Tanh, time_rate: 1.0 };
        let f2 = ScalarFn::Constant(f[1]);
        let solve = |src: &dyn nash_core::pde::ScalarField, term: &dyn nash_core::pde::ScalarField| {
            let p = LinearProblem { diffusion: &a, drift: &drift, source: src, terminal: term, start: 0.0, horizon: 0.2 };
            let dt = 0.8 * stability_limit(&p, &grid);
            solve_grid(&p, &grid, &GridOptions::new(dt)).unwrap().field
        };
        let w1 = solve(&f1, &g1);
        let w2 = solve(&f2, &g2);
        let combo_src = nash_core::pde::FnScalar::new(|t: f64, x: &[f64]| {
            use nash_core::pde::ScalarField;
            f1.eval(t, x) + s * f2.eval(t, x)
        });
        let combo_term = nash_core::pde::FnScalar::new(|t: f64, x: &[f64]| {
            use nash_core::pde::ScalarField;
            g1.eval(t, x) + s * g2.eval(t, x)
        });
        let w = solve(&combo_src, &combo_term);
        let expect = w1.axpby(1.0, &w2, s).unwrap();
        prop_assert!(w.max_abs_diff(&expect).unwrap() < 1e-11);
    }

    #[test]
    fn grid_solve_preserves_sign(
        amp in 0.0f64..2.0,
        center in -1.0f64..1.0,
        f in 0.0f64..1.0,
        b in prop::collection::vec(-1.5f64..1.5, 2),
    ) {
        let a = DiffusionSpec::isotropic(2, 0.5).unwrap();
        let grid = SpatialGrid::new(2, 2.5, 21).unwrap();
        let drift = VectorFn::Coupled { dim: 2, matrix: vec![b[0], 0.3, -0.2, b[1]], profile: Profile::Tanh };
        let term = ScalarFn::Gaussian { amplitude: amp, center: vec![center, -center], variance: 0.5 };
        let src = ScalarFn::Separable { coeffs: vec![f, f], profile: Profile::Gaussian, time_rate: 0.0 };
        let p = LinearProblem { diffusion: &a, drift: &drift, source: &src, terminal: &term, start: 0.0, horizon: 0.15 };
        // the upwind monotonicity bound adds |b|/h to the diffusive rate
        let dt = 0.5 * stability_limit(&p, &grid);
        let w = solve_grid(&p, &grid, &GridOptions::new(dt)).unwrap().field;
        prop_assert!(w.values().iter().all(|v| *v >= 0.0));
        prop_assert!(w.values().iter().copied().fold(0.0, f64::max) <= amp + 0.15 * 2.0 * f + 1e-12);
    }

    #[test]
    fn fpk_conserves_mass(b in -1.0f64..1.0, y in -1.0f64..1.0) {
        let a = DiffusionSpec::isotropic(1, 0.5).unwrap();
        let grid = SpatialGrid::new(1, 5.0, 201).unwrap();
        let drift = VectorFn::Coupled { dim: 1, matrix: vec![b], profile: Profile::Tanh };
        let eps = 4.0 * grid.spacing();
        let h = grid.spacing();
        let opts = FpkOptions { start: 0.0, horizon: 0.3, dt: 0.4 * h * h, save_every: 10 };
        let sol = solve_fpk_grid(&a, &drift, &[y], eps, &grid, &opts).unwrap();
        prop_assert!(sol.max_mass_drift < 1e-10, "{}", sol.max_mass_drift);
        prop_assert!(sol.field.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn riccati_flow_stays_symmetric(
        n in 1usize..5,
        q in 0.1f64..2.0,
        kappa in 0.0f64..0.9,
        g in 0.0f64..2.0,
        horizon in 0.05f64..0.5,
    ) {
        let params = CouplingParams { q, kappa, g, kappa_terminal: kappa, horizon, layout: Layout::Chain, ..Default::default() };
        let spec = LqGameSpec::coupled(n, &poly(3.0), &params).unwrap();
        let traj = riccati_integrate(&spec, horizon / 100.0).unwrap();
        for s in &traj.states {
            prop_assert!(s.max_asymmetry() <= 1e-12 * (1.0 + s.max_entry()));
        }
    }
}

#[test]
fn field_round_trips_through_time_selection() {
    let grid = SpatialGrid::new(1, 1.0, 5).unwrap();
    let f = Field::from_fn(grid, vec![0.0, 0.5, 1.0], None, |t, x| t + x[0]).unwrap();
    let g = f.select_times(&[0, 2]).unwrap();
    assert_eq!(g.times(), &[0.0, 1.0]);
    assert_eq!(g.slice(1), f.slice(2));
}
