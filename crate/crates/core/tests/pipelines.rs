use std::sync::Arc;

use maxarea_core::pipelines::*;
use maxarea_core::solver::{comparison_check, solve, DiscreteProblem, SolverConfig};
use maxarea_core::{BoundaryData, Error, GridDomain, Region, ScalarField};

const H: f64 = 0.1;

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

fn max_err(u: &ScalarField, f: impl Fn([f64; 2]) -> f64) -> f64 {
    u.domain().points().enumerate().map(|(i, x)| (u.value(i) - f(x)).abs()).fold(0.0, f64::max)
}

#[test]
fn theta_endpoints_are_the_cone_and_the_plane() {
    let cfg = SolverConfig::default();
    let (down, _) = solve_theta(2, 0.0, H, &cfg).unwrap();
    assert!(max_err(&down, |x| -norm(x)) <= 2.0 * H);
    assert!((down.evaluate(E2).unwrap() + 1.0).abs() <= 2.0 * H);
    let (up, _) = solve_theta(2, 1.0, H, &cfg).unwrap();
    assert!(max_err(&up, |x| x[1]) <= 2.0 * H);
    assert!((up.evaluate(E2).unwrap() - 1.0).abs() <= 2.0 * H);
    let (mid, _) = solve_theta(2, 0.5, H, &cfg).unwrap();
    let v = mid.evaluate(E2).unwrap();
    assert!(-1.0 < v && v < 1.0);
}

#[test]
fn theta_arguments_are_checked() {
    let cfg = SolverConfig::default();
    assert!(matches!(solve_theta(1, 0.5, H, &cfg), Err(Error::InvalidArgument(_))));
    assert!(matches!(solve_theta(2, 1.5, H, &cfg), Err(Error::InvalidArgument(_))));
    assert!(find_theta(2, H, 0.0, &cfg).is_err());
}

#[test]
fn theta_family_is_ordered() {
    let family = ThetaFamily::new(2, H).unwrap();
    let cfg = SolverConfig::default();
    let thetas = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let fields: Vec<ScalarField> = thetas.iter().map(|&t| family.solve(t, &cfg).unwrap().0).collect();
    for pair in fields.windows(2) {
        let c = comparison_check(&pair[0], &pair[1]).unwrap();
        assert!(c.pinned_ordered);
        assert!(pair[0].evaluate(E2).unwrap() <= pair[1].evaluate(E2).unwrap() + 1e-7);
        // away from e2 the fixed diagonal bends fields near the light ray by O(h)
        assert!(c.max_violation <= 5.0 * H, "violation {}", c.max_violation);
    }
}

#[test]
fn theta_search_finds_the_root() {
    let s = find_theta(2, H, 1e-6, &SolverConfig::default()).unwrap();
    assert!(0.0 < s.theta && s.theta < 1.0);
    assert!(s.value.abs() <= 1e-6);
    assert!((s.field.evaluate(E2).unwrap()).abs() <= 1e-6);
    assert_eq!(s.samples.last().unwrap().theta, s.theta);
    // the search stays inside the bracket and the values are monotone in theta
    let mut sorted = s.samples.clone();
    sorted.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    assert!(sorted.windows(2).all(|w| w[0].value <= w[1].value + 1e-7));
}

#[test]
fn theta_moves_little_under_refinement() {
    let cfg = SolverConfig::default();
    let coarse = find_theta(2, 0.2, 1e-6, &cfg).unwrap().theta;
    let fine = find_theta(2, 0.1, 1e-6, &cfg).unwrap().theta;
    assert!((coarse - fine).abs() <= 0.2, "{coarse} vs {fine}");
}

fn small_example() -> ExampleW {
    let config = ExampleWConfig {
        k_schedule: vec![2, 4],
        h: H,
        window: Window { lo: [-1.0, -1.0], hi: [1.0, 1.0] },
        ..ExampleWConfig::default()
    };
    build_example_w(&config).unwrap()
}

#[test]
fn example_w_on_a_small_schedule() {
    let w = small_example();
    assert_eq!(w.per_k.len(), 2);
    assert!(w.per_k[0].difference.is_none());
    assert_eq!(w.stabilization.len(), 1);
    for d in &w.per_k {
        assert!(d.w_e2.abs() <= 1e-6);
        assert!(d.ray_error <= 5.0 * H, "k={} ray error {}", d.k, d.ray_error);
        assert!(d.above_plane <= 5.0 * H);
        assert!(0.0 < d.theta && d.theta < 1.0);
    }
    // theta(k) increases with k: a larger ball needs more weight on x2 to reach zero at e2
    assert!(w.per_k[1].theta > w.per_k[0].theta);
    assert!((w.window_field.evaluate([0.0, -1.0]).unwrap() + 1.0).abs() <= 5.0 * H);
    assert_eq!(w.window_field.domain().len(), 21 * 21);
}

#[test]
fn example_config_is_validated() {
    let mut c = ExampleWConfig { k_schedule: vec![4, 2], ..ExampleWConfig::default() };
    assert!(c.validate().is_err());
    c.k_schedule = vec![2];
    // the default window does not fit in B_2
    assert!(c.validate().is_err());
    c.window = Window { lo: [-1.0, -1.0], hi: [1.0, 1.0] };
    assert!(c.validate().is_ok());
    let json = serde_json::to_string(&c).unwrap();
    let back: ExampleWConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, c);
    assert!(serde_json::from_str::<ExampleWConfig>(r#"{"k_schedul": [2]}"#).is_err());
}

#[test]
fn reflected_family_matches_the_reflection_formula() {
    let cfg = SolverConfig::default();
    let s = find_theta(2, H, 1e-6, &cfg).unwrap();
    let theta = s.theta;
    // solve the reflected problem on B_2(e2) \ {e2} directly
    let region = Region::PuncturedBall {
        center: vec![0.0, 1.0],
        radius: 2.0,
        puncture: Some(vec![0.0, 1.0]),
        punctures: vec![],
    };
    let d = Arc::new(GridDomain::make(region, H).unwrap());
    let g = BoundaryData::from_fn(&d, |x| -(theta * (1.0 - x[1]) - (1.0 - theta) * norm([x[0], 1.0 - x[1]]))).unwrap();
    let pin = d.punctures()[0].1;
    let (direct, _) = solve(&DiscreteProblem::new(d.clone(), g, vec![(pin, 0.0)]).unwrap(), &cfg).unwrap();
    let mut worst = 0.0f64;
    for (i, x) in d.points().enumerate() {
        let formula = -s.field.evaluate([x[0], 1.0 - x[1]]).unwrap();
        worst = worst.max((direct.value(i) - formula).abs());
    }
    assert!(worst <= 2.0 * (cfg.stationarity_tol + 5.0 * H), "reflection mismatch {worst}");
}

fn circle_problem(mode: ExteriorMode) -> ExteriorProblem {
    ExteriorProblem::new(Obstacle::Circle { center: [0.0, 0.0], radius: 1.0 }, Arc::new(|_| 0.0), mode, H)
        .with_radii(vec![2.0, 4.0])
}

#[test]
fn circle_barriers() {
    let p = circle_problem(ExteriorMode::UpperCone { x0: [0.0, 0.0] });
    let d = Arc::new(GridDomain::make(p.obstacle.region(4.0), H).unwrap());
    let b = barrier_psi(&p, &d).unwrap();
    // the obstacle staircase lies within h sqrt 2 of the unit circle
    let layer = H * 2f64.sqrt();
    assert!((b.c_plus - 1.0).abs() <= layer && (b.c_minus - 1.0).abs() <= layer);
    assert!(b.euclidean);
    for id in d.obstacle_nodes() {
        assert!(b.psi.value(id).abs() < 1e-12);
    }
    for (i, x) in d.points().enumerate() {
        let r = norm(x);
        assert!((b.psi.value(i) - (r - 1.0).min(1.0 - r)).abs() <= layer);
    }
    assert!(b.spacelike.max_norm <= 2f64.sqrt() + 1e-12);
}

#[test]
fn two_point_hyperplane_barrier() {
    let p = breve_problem(H, vec![2.0], SolverConfig::default());
    let d = Arc::new(GridDomain::make(p.obstacle.region(2.0), H).unwrap());
    let b = barrier_psi(&p, &d).unwrap();
    assert!(b.c_plus.abs() < 1e-12 && (b.c_minus + 1.0).abs() < 1e-12);
    for (i, x) in d.points().enumerate() {
        let psi = norm(x).min(norm([x[0], x[1] - 1.0]));
        let want = psi.min(x[1]).max(x[1] - 1.0);
        assert!((b.psi.value(i) - want).abs() < 1e-12);
    }
}

#[test]
fn barriers_are_euclidean_lipschitz() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let g: DataFn = Arc::new(|x| 0.3 * (3.0 * x[0]).sin() + 0.2 * x[1]);
    for mode in [
        ExteriorMode::UpperCone { x0: [0.1, 0.0] },
        ExteriorMode::LowerCone { x0: [0.0, -0.2] },
        ExteriorMode::Hyperplane { a: [0.6, 0.8] },
    ] {
        let p = ExteriorProblem::new(Obstacle::Circle { center: [0.0, 0.0], radius: 1.0 }, g.clone(), mode, H);
        let d = Arc::new(GridDomain::make(p.obstacle.region(3.0), H).unwrap());
        let b = barrier_psi(&p, &d).unwrap();
        for id in d.obstacle_nodes() {
            assert!((b.psi.value(id) - g(d.point(id))).abs() < 1e-12);
        }
        for _ in 0..2000 {
            let (i, j) = (rng.gen_range(0..d.len()), rng.gen_range(0..d.len()));
            let gap = (b.psi.value(i) - b.psi.value(j)).abs();
            assert!(gap <= norm([d.point(i)[0] - d.point(j)[0], d.point(i)[1] - d.point(j)[1]]) + 1e-12);
        }
    }
}

#[test]
fn exterior_problems_are_validated() {
    let bad_a = circle_problem(ExteriorMode::Hyperplane { a: [1.0, 1.0] });
    assert!(solve_exterior(&bad_a).is_err());
    let outside = circle_problem(ExteriorMode::UpperCone { x0: [3.0, 0.0] });
    assert!(solve_exterior(&outside).is_err());
    let too_small = circle_problem(ExteriorMode::UpperCone { x0: [0.0, 0.0] }).with_radii(vec![1.1]);
    assert!(solve_exterior(&too_small).is_err());
    let steep = ExteriorProblem::new(
        Obstacle::Points { points: vec![[0.0, 0.0], [0.5, 0.0]] },
        Arc::new(|x| 4.0 * x[0]),
        ExteriorMode::Hyperplane { a: [1.0, 0.0] },
        H,
    );
    assert!(matches!(solve_exterior(&steep), Err(Error::EmptyK { .. })));
}

#[test]
fn cone_modes_are_squeezed_onto_the_cones() {
    let tol = 5.0 * H;
    let up = solve_exterior(&circle_problem(ExteriorMode::UpperCone { x0: [0.0, 0.0] })).unwrap();
    assert!(max_err(&up.field, |x| 1.0 - norm(x)) <= tol);
    let down = solve_exterior(&circle_problem(ExteriorMode::LowerCone { x0: [0.0, 0.0] })).unwrap();
    assert!(max_err(&down.field, |x| norm(x) - 1.0) <= tol);
    for s in [&up, &down] {
        assert_eq!(s.per_radius.len(), 2);
        assert!(s.per_radius.iter().all(|r| r.squeeze_violation <= tol));
        assert!(s.window_extrema.max_attained(tol) && s.window_extrema.min_attained(tol));
    }
    use maxarea_core::structure::Case;
    assert_eq!(up.classification.case, Case::TrichotomyII);
    assert_eq!(down.classification.case, Case::TrichotomyI);
}

#[test]
fn hyperplane_mode_attains_its_extrema_on_the_points() {
    let s = solve_exterior(&breve_problem(H, vec![2.0, 4.0], SolverConfig::default())).unwrap();
    let e = s.window_extrema;
    assert!(e.max_attained(5.0 * H) && e.min_attained(5.0 * H), "{e:?}");
    assert!(s.per_radius.iter().all(|r| r.squeeze_violation <= 5.0 * H));
    let d = s.field.domain();
    for &(_, id) in d.punctures() {
        assert_eq!(s.field.value(id), 0.0);
    }
}

#[test]
fn three_distinct_solutions() {
    let m = multiplicity_demo(H, 4, &SolverConfig::default()).unwrap();
    let r = &m.report;
    assert!(r.all_vanish_on_a);
    assert_eq!(r.fields.len(), 3);
    assert_eq!(r.pairs.len(), 3);
    for p in &r.pairs {
        assert!(p.max_difference > 0.5, "{p:?}");
    }
    let [w, tilde, breve] = [&r.fields[0], &r.fields[1], &r.fields[2]];
    assert!(w.max_attained && !w.min_attained);
    assert!(!tilde.max_attained);
    assert!(breve.max_attained && breve.min_attained);
    // w~(2 e2) = -w(-e2) = 1
    assert!((tilde.at_2e2 - 1.0).abs() <= 5.0 * H);
    assert!((tilde.at_2e2 + w.at_minus_e2).abs() < 1e-9);
}
