use std::sync::Arc;

use maxarea_core::geometry::rescale;
use maxarea_core::solver::{solve, DiscreteProblem, SolverConfig};
use maxarea_core::{BoundaryData, GridDomain, Region, ScalarField};
use proptest::prelude::*;

fn ball(r: f64, h: f64) -> Arc<GridDomain> {
    Arc::new(GridDomain::make(Region::Ball { center: vec![0.0, 0.0], radius: r }, h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rescale_composes(s in 1.0f64..3.0, t in 1.0f64..3.0, a in 0.1f64..1.0, b in 0.2f64..1.5) {
        let h = 0.1;
        let target = ball(1.0, h);
        let mid = ball(t + 2.0 * h, h);
        let src = ball(s * (t + 2.0 * h) + 2.0 * h, h);
        let u = ScalarField::from_fn(src, move |x| a * (b * x[0]).sin() * (b * x[1]).cos()).unwrap();
        let two_step = rescale(&rescale(&u, s, mid).unwrap(), t, target.clone()).unwrap();
        let direct = rescale(&u, s * t, target).unwrap();
        // P1 interpolation error of the smooth generator and of u(s x)/s on the middle grid
        let m = 2.0 * a * b * b;
        let tol = 1e-12 + (2.0 * h * h * m / s + h * h * s * m) / t;
        prop_assert!(two_step.max_diff(&direct).unwrap() <= tol);
    }

    #[test]
    fn evaluate_at_nodes_is_exact(seed in proptest::collection::vec(-5.0f64..5.0, 1..64)) {
        let d = ball(1.0, 0.1);
        let vals: Vec<f64> = (0..d.len()).map(|i| seed[i % seed.len()] * (1.0 + i as f64).ln()).collect();
        let f = ScalarField::new(d.clone(), vals).unwrap();
        for (id, x) in d.points().enumerate() {
            prop_assert_eq!(f.evaluate(x).unwrap(), f.value(id));
        }
    }

    #[test]
    fn adding_a_constant_to_the_data_shifts_the_solution(c in -3.0f64..3.0, a in -0.5f64..0.5) {
        let d = ball(1.0, 0.1);
        let g = move |x: [f64; 2]| a * x[0] + 0.2 * (2.0 * x[1]).sin();
        let p = |shift: f64| DiscreteProblem::new(d.clone(), BoundaryData::from_fn(&d, move |x| g(x) + shift).unwrap(), vec![]).unwrap();
        let cfg = SolverConfig::default();
        let (u, _) = solve(&p(0.0), &cfg).unwrap();
        let (v, _) = solve(&p(c), &cfg).unwrap();
        for i in 0..d.len() {
            prop_assert!((v.value(i) - u.value(i) - c).abs() <= 1e-9);
        }
    }
}
