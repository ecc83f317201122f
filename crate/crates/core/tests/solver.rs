mod common;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use maxarea_core::geometry::check_weakly_spacelike;
use maxarea_core::solver::*;
use maxarea_core::{BoundaryData, Error, GridDomain, Region, ScalarField};

fn ball(r: f64, h: f64) -> Arc<GridDomain> {
    Arc::new(GridDomain::make(Region::Ball { center: vec![0.0, 0.0], radius: r }, h).unwrap())
}

fn unit_square(h: f64) -> Arc<GridDomain> {
    Arc::new(GridDomain::make(Region::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] }, h).unwrap())
}

fn problem(d: &Arc<GridDomain>, g: impl Fn([f64; 2]) -> f64) -> DiscreteProblem {
    DiscreteProblem::new(d.clone(), BoundaryData::from_fn(d, g).unwrap(), vec![]).unwrap()
}

fn max_err(u: &ScalarField, f: impl Fn([f64; 2]) -> f64) -> f64 {
    u.domain().points().enumerate().map(|(i, x)| (u.value(i) - f(x)).abs()).fold(0.0, f64::max)
}

#[test]
fn energy_of_simple_fields() {
    let d = unit_square(0.1);
    let e = |f: fn([f64; 2]) -> f64| energy(&ScalarField::from_fn(d.clone(), f).unwrap()).unwrap();
    assert!((e(|_| 0.0) - 1.0).abs() < 1e-12);
    // sqrt amplifies roundoff in 1 - |p|^2 near the light cone
    assert!(e(|x| x[0]).abs() < 1e-7);
    assert!((e(|x| 0.6 * x[0]) - 0.8).abs() < 1e-12);
    let steep = ScalarField::from_fn(d, |x| 1.5 * x[1]).unwrap();
    assert!(matches!(energy(&steep), Err(Error::Infeasible { .. })));
}

#[test]
fn affine_data_is_reproduced() {
    let d = ball(2.0, 0.1);
    let (u, report) = solve(&problem(&d, |x| 0.5 * x[1]), &SolverConfig::default()).unwrap();
    assert!(max_err(&u, |x| 0.5 * x[1]) < 1e-8);
    assert!(report.converged() && report.feasible);
    let (u, _) = solve(&problem(&d, |x| -0.3 * x[0] + 0.8 * x[1] + 2.0), &SolverConfig::default()).unwrap();
    assert!(max_err(&u, |x| -0.3 * x[0] + 0.8 * x[1] + 2.0) < 1e-8);
}

#[test]
fn inadmissible_data_means_empty_k() {
    let d = ball(1.0, 0.1);
    let err = solve(&problem(&d, |x| 2.0 * x[0]), &SolverConfig::default()).unwrap_err();
    assert!(matches!(err, Error::EmptyK { .. }));
    assert!(format!("{err}").contains("empty K"));
}

#[test]
fn punctured_cone_data_gives_the_cone() {
    let h = 0.1;
    let d = Arc::new(
        GridDomain::make(Region::PuncturedBall { center: vec![0.0, 0.0], radius: 2.0, puncture: Some(vec![0.0, 0.0]), punctures: vec![] }, h)
            .unwrap(),
    );
    let pin = d.punctures()[0].1;
    let g = BoundaryData::from_fn(&d, |x| -libm::hypot(x[0], x[1])).unwrap();
    let p = DiscreteProblem::new(d.clone(), g, vec![(pin, 0.0)]).unwrap();
    let (u, report) = solve(&p, &SolverConfig::default()).unwrap();
    assert!(max_err(&u, |x| -libm::hypot(x[0], x[1])) <= 2.0 * h);
    assert_eq!(u.value(pin), 0.0);
    // light-like data: the discrete constraint set is empty and the report must say so
    assert!(!report.feasible);
    assert!(report.warnings.iter().any(|w| matches!(w, Warning::GridInfeasible { .. })));
}

#[test]
fn tiny_grid_matches_coordinate_ascent_oracle() {
    let d = unit_square(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..3 {
        let (a0, a1) = (rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        let (w, ph) = (rng.gen_range(1.0..2.0), rng.gen_range(0.0..6.0));
        let g = move |x: [f64; 2]| a0 * x[0] + a1 * x[1] + 0.1 * libm::sin(w * x[0] + ph) * libm::cos(w * x[1]);
        let (u, _) = solve(&problem(&d, g), &SolverConfig::default()).unwrap();
        let v = common::coordinate_ascent_oracle(&d, g);
        for i in (0..d.len()).filter(|&i| !d.is_boundary(i)) {
            assert!((u.value(i) - v[i]).abs() <= 1e-7, "node {:?}: {} vs {}", d.lattice(i), u.value(i), v[i]);
        }
    }
}

fn wavy(d: &Arc<GridDomain>, c: f64, s: f64) -> DiscreteProblem {
    problem(d, move |x| c + s * (0.5 * x[0] + 0.3 * libm::sin(2.0 * x[1])))
}

#[test]
fn initialization_does_not_change_the_solution() {
    let d = ball(1.5, 0.1);
    let p = wavy(&d, 0.0, 1.0);
    let cfg = SolverConfig::default();
    let (a, _) = solve(&p, &cfg).unwrap();
    let (b, _) = solve(&p, &cfg.with_init(Init::ZeroInterior)).unwrap();
    assert!(a.max_diff(&b).unwrap() <= 1e-7);
}

#[test]
fn vertical_translation_and_reflection_equivariance() {
    let d = ball(1.5, 0.1);
    let cfg = SolverConfig::default();
    let (a, _) = solve(&wavy(&d, 0.0, 1.0), &cfg).unwrap();
    let (b, _) = solve(&wavy(&d, -1.0, 1.0), &cfg).unwrap();
    let c = comparison_check(&b, &a).unwrap();
    assert!(c.pinned_ordered && c.holds);
    for i in 0..d.len() {
        assert!((b.value(i) - (a.value(i) - 1.0)).abs() <= 1e-9);
    }
    // The split along (i,j)-(i+1,j+1) is preserved by x -> -x and by swapping the axes,
    // so those symmetries are exact; x2 -> -x2 maps it to the other diagonal and holds to O(h).
    let g = |x: [f64; 2]| 0.4 * x[0] * x[1] + 0.3 * x[1] + 0.2 * libm::sin(x[0]);
    let (u, _) = solve(&problem(&d, g), &cfg).unwrap();
    let maps: [(fn([f64; 2]) -> [f64; 2], f64); 3] =
        [(|x| [-x[0], -x[1]], 1e-8), (|x| [x[1], x[0]], 1e-8), (|x| [x[0], -x[1]], 0.1 * 0.1)];
    for (m, tol) in maps {
        let (r, _) = solve(&problem(&d, move |x| g(m(x))), &cfg).unwrap();
        let worst = d.points().enumerate().map(|(i, x)| (u.value(i) - r.value(d.node_near(m(x)).unwrap())).abs()).fold(0.0, f64::max);
        assert!(worst <= tol, "{worst}");
    }
}

#[test]
fn ordered_data_gives_ordered_solutions() {
    let d = ball(1.5, 0.1);
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let bump = rng.gen_range(0.01..0.3);
        let a1 = rng.gen_range(-0.3..0.3);
        let lo = problem(&d, move |x| a1 * x[0] + 0.2 * libm::sin(3.0 * x[1]));
        let hi = problem(&d, move |x| a1 * x[0] + 0.2 * libm::sin(3.0 * x[1]) + bump * (1.0 + libm::cos(2.0 * x[0])) / 2.0);
        let (u, _) = solve(&lo, &cfg).unwrap();
        let (v, _) = solve(&hi, &cfg).unwrap();
        let c = comparison_check(&u, &v).unwrap();
        assert!(c.pinned_ordered && c.holds, "violation {}", c.max_violation);
    }
}

#[test]
fn solution_beats_random_feasible_competitors() {
    let d = ball(1.5, 0.1);
    let (u, _) = solve(&wavy(&d, 0.0, 1.0), &SolverConfig::default()).unwrap();
    let e0 = energy(&u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let xi: Vec<f64> = (0..d.len()).map(|i| if d.is_boundary(i) { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
        let mut t = 0.05;
        let v = loop {
            let vals: Vec<f64> = u.values().iter().zip(&xi).map(|(a, b)| a + t * b).collect();
            let v = ScalarField::new(d.clone(), vals).unwrap();
            if check_weakly_spacelike(&v).spacelike {
                break v;
            }
            t *= 0.5;
        };
        assert!(e0 >= energy(&v).unwrap() - 1e-9);
    }
}

#[test]
fn one_dimensional_solves() {
    let l = solve_1d(0.0, 1.0, 0.0, 0.6).unwrap();
    assert!((l.slope - 0.6).abs() < 1e-15 && (l.energy - 0.8).abs() < 1e-15);
    let l = solve_1d(0.0, 1.0, 0.0, 1.0).unwrap();
    assert_eq!((l.slope, l.energy), (1.0, 0.0));
    assert!(matches!(solve_1d(0.0, 1.0, 0.0, 1.5), Err(Error::EmptyK { .. })));

    let d = Arc::new(GridDomain::make(Region::Box { lo: vec![-1.0], hi: vec![1.0] }, 0.05).unwrap());
    let g = BoundaryData::from_fn(&d, |x| if x[0] < 0.0 { 0.2 } else { -0.7 }).unwrap();
    let (u, _) = solve(&DiscreteProblem::new(d.clone(), g, vec![]).unwrap(), &SolverConfig::default()).unwrap();
    let exact = solve_1d(-1.0, 1.0, 0.2, -0.7).unwrap();
    assert!(max_err(&u, |x| exact.at(x[0])) < 1e-8);
    assert!((energy(&u).unwrap() - exact.energy).abs() < 1e-8);
}

#[test]
fn residual_of_affine_field_vanishes_and_cone_is_degenerate() {
    let d = ball(1.5, 0.1);
    let aff = ScalarField::from_fn(d.clone(), |x| 0.4 * x[0] - 0.5 * x[1]).unwrap();
    let r = residual_mse(&aff);
    assert!(r.max_abs() <= 1e-10);
    assert!(r.entries().iter().any(|e| matches!(e, NodeResidual::Value(_))));
    let cone = ScalarField::from_fn(d.clone(), |x| -libm::hypot(x[0], x[1])).unwrap();
    let r = residual_mse(&cone);
    assert!(r.entries().iter().all(|e| !matches!(e, NodeResidual::Value(_))));
    assert!(!r.degenerate_nodes().is_empty());
}

#[test]
fn comparison_rejects_different_domains() {
    let a = ScalarField::from_fn(ball(1.0, 0.1), |_| 0.0).unwrap();
    let b = ScalarField::from_fn(ball(1.2, 0.1), |_| 0.0).unwrap();
    assert!(matches!(comparison_check(&a, &b), Err(Error::MismatchedDomains)));
}

#[test]
fn config_validation() {
    let mut c = SolverConfig::default();
    assert!(c.validate().is_ok());
    c.delta_schedule = vec![1e-2, 1e-1];
    assert!(c.validate().is_err());
    c.delta_schedule = vec![1.0];
    assert!(c.validate().is_err());
}
