use std::collections::HashSet;
use std::sync::Arc;

use maxarea_core::geometry::rescale;
use maxarea_core::solver::{solve, DiscreteProblem, SolverConfig};
use maxarea_core::structure::*;
use maxarea_core::{BoundaryData, GridDomain, Region, ScalarField};

fn domain(region: Region, h: f64) -> Arc<GridDomain> {
    Arc::new(GridDomain::make(region, h).unwrap())
}

fn annulus(r_in: f64, r_out: f64, h: f64) -> Arc<GridDomain> {
    domain(Region::Annulus { center: vec![0.0, 0.0], r_in, r_out }, h)
}

fn ball(r: f64, h: f64) -> Arc<GridDomain> {
    domain(Region::Ball { center: vec![0.0, 0.0], radius: r }, h)
}

fn punctured(r: f64, h: f64) -> Arc<GridDomain> {
    domain(
        Region::PuncturedBall { center: vec![0.0, 0.0], radius: r, puncture: Some(vec![0.0, 0.0]), punctures: vec![] },
        h,
    )
}

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[test]
fn annulus_cone_data_has_linear_radial_segments() {
    let h = 0.1;
    let d = annulus(1.0, 2.0, h);
    let phi = BoundaryData::from_fn(&d, norm).unwrap();
    let set = singular_set(&d, &phi, 2.0 * h).unwrap();
    assert!(!set.is_empty());

    // every segment is nearly radial, and each axis direction has one
    for s in &set.segments {
        assert!(s.defect() <= 2.0 * h + 1e-12);
        // ||x| - |y|| >= |x - y| - 2h with |x| ~ 1, |y| ~ 2 bounds the angle
        assert!(cross(s.x, s.y).abs() <= 0.5 * norm(s.x) * norm(s.y));
    }
    for dir in [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]] {
        let radial = set.segments.iter().any(|s| {
            let (a, b) = (s.x, s.y);
            cross(a, dir).abs() < 1e-9 && cross(b, dir).abs() < 1e-9 && (norm(a) - norm(b)).abs() > 0.9
        });
        assert!(radial, "no radial segment along {dir:?}");
    }

    let (u, _) = solve(&DiscreteProblem::new(d.clone(), phi, vec![]).unwrap(), &SolverConfig::default()).unwrap();
    let checked = verify_ray_linearity(&u, &set).unwrap();
    for s in &checked.segments {
        let r = s.residual.unwrap();
        assert!(r <= 5.0 * h, "segment {:?}-{:?} residual {r}", s.x, s.y);
        assert!(!s.flagged);
    }
}

#[test]
fn strictly_lipschitz_data_has_no_light_segments() {
    let d = ball(2.0, 0.1);
    let phi = BoundaryData::from_fn(&d, |x| 0.5 * x[1]).unwrap();
    assert!(singular_set(&d, &phi, 0.2).unwrap().is_empty());
}

#[test]
fn tolerance_below_h_is_rejected() {
    let d = ball(1.0, 0.1);
    let phi = BoundaryData::from_fn(&d, |_| 0.0).unwrap();
    assert!(singular_set(&d, &phi, 0.05).is_err());
}

#[test]
fn singular_set_is_unordered_and_shift_invariant() {
    let h = 0.1;
    let d = annulus(1.0, 2.0, h);
    let phi = BoundaryData::from_fn(&d, |x| norm(x) + 0.3 * x[0]).unwrap();
    let set = singular_set(&d, &phi, 2.0 * h).unwrap();
    let mut pairs = HashSet::new();
    for s in &set.segments {
        assert!(s.nodes.0 < s.nodes.1);
        assert!(pairs.insert(s.nodes), "duplicate pair {:?}", s.nodes);
        let rises = s.phi_y - s.phi_x >= 0.0;
        assert_eq!(s.sign, if rises { 1 } else { -1 });
    }
    let shifted = singular_set(&d, &phi.shifted(7.5), 2.0 * h).unwrap();
    let other: HashSet<_> = shifted.segments.iter().map(|s| s.nodes).collect();
    assert_eq!(pairs, other);
}

#[test]
fn segments_through_a_node_are_a_subset() {
    let h = 0.2;
    let d = punctured(2.0, h);
    let u = ScalarField::from_fn(d.clone(), |x| -norm(x)).unwrap();
    let phi = BoundaryData::from_field(&u);
    let pin = d.punctures()[0].1;
    let all = singular_set(&d, &phi, 2.0 * h).unwrap();
    let through = segments_through(&d, &phi, 2.0 * h, pin).unwrap();
    assert!(!through.is_empty());
    assert_eq!(through.len(), all.through(pin).count());
    assert!(through.segments.iter().all(|s| s.touches(pin)));
}

#[test]
fn ray_linearity_is_exact_for_affine_fields() {
    let d = ball(2.0, 0.1);
    let u = ScalarField::from_fn(d.clone(), |x| x[0] - 0.25).unwrap();
    let set = singular_set(&d, &BoundaryData::from_field(&u), 0.2).unwrap();
    assert!(!set.is_empty());
    let checked = verify_ray_linearity(&u, &set).unwrap();
    assert!(checked.max_residual().unwrap() <= 1e-12);

    let flat = ScalarField::from_fn(d.clone(), |x| 0.3 * x[1]).unwrap();
    let none = singular_set(&d, &BoundaryData::from_field(&flat), 0.2).unwrap();
    assert!(verify_ray_linearity(&flat, &none).unwrap().is_empty());
}

#[test]
fn blowdown_of_exact_models() {
    let d = ball(4.0, 0.05);
    let radii = [1.0, 2.0, 3.0];
    let cone = ScalarField::from_fn(d.clone(), |x| -norm(x)).unwrap();
    let b = blowdown(&cone, &radii, 64).unwrap();
    assert_eq!(b.model, BlowdownModel::ConeMinus);
    assert!(b.trend.iter().all(|&r| (0.0..1e-3).contains(&r)));

    let plane = ScalarField::from_fn(d.clone(), |x| x[1]).unwrap();
    let b = blowdown(&plane, &radii, 64).unwrap();
    let BlowdownModel::Hyperplane { a } = b.model else { panic!("{:?}", b.model) };
    assert!((norm(a) - 1.0).abs() < 1e-9);
    assert!(a[0].abs() < 1e-9 && (a[1] - 1.0).abs() < 1e-9);
    assert!(b.residual < 1e-9);

    // a strictly spacelike plane is not slope one
    let half = ScalarField::from_fn(d, |x| 0.5 * x[1]).unwrap();
    let b = blowdown(&half, &radii, 64).unwrap();
    assert_eq!(b.model, BlowdownModel::Undetermined);
    let fit = b.fits.last().unwrap();
    assert!((fit.a[1] - 1.0).abs() < 1e-9);
    assert!(b.residual > MODEL_THRESHOLD);
    assert!(b.fits.iter().all(|f| f.cone_plus >= 0.0 && f.cone_minus >= 0.0 && f.hyperplane >= 0.0));
}

#[test]
fn blowdown_rejects_bad_radii_and_sampling() {
    let d = ball(2.0, 0.1);
    let u = ScalarField::from_fn(d, |x| x[0]).unwrap();
    assert!(blowdown(&u, &[1.0, 0.5], 32).is_err());
    assert!(blowdown(&u, &[], 32).is_err());
    assert!(blowdown(&u, &[1.0], 8).is_err());
    assert!(blowdown(&u, &[5.0], 32).is_err());
}

#[test]
fn blowdown_commutes_with_rescaling() {
    let h = 0.05;
    let d = ball(4.0, h);
    let u = ScalarField::from_fn(d, |x| 0.3 * x[0] + 0.2 * x[1].sin() - 0.1 * norm(x)).unwrap();
    let s = 2.0;
    let small = ball(1.9, h);
    let v = rescale(&u, s, small).unwrap();
    for r in [0.5, 1.0, 1.5] {
        let a = blowdown(&v, &[r], 32).unwrap();
        let b = blowdown(&u, &[s * r], 32).unwrap();
        let (fa, fb) = (&a.fits[0], &b.fits[0]);
        for (x, y) in fa.samples.iter().zip(&fb.samples) {
            assert!((x - y).abs() < h * h, "r={r}: {x} vs {y}");
        }
    }
}

#[test]
fn exact_cones_classify_as_cones() {
    for h in [0.2, 0.1, 0.05] {
        let d = punctured(2.0, h);
        let up = ScalarField::from_fn(d.clone(), norm).unwrap();
        let rep = classify_entire(&up, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.case, Case::UpperCone, "h={h}");
        assert!(rep.metrics.cone_plus_error <= 5.0 * h);
        assert!(rep.metrics.light_segments > 0);

        let down = ScalarField::from_fn(d, |x| -norm(x)).unwrap();
        let rep = classify_entire(&down, &ClassifyOptions::default()).unwrap();
        assert_eq!(rep.case, Case::LowerCone, "h={h}");
        assert!(rep.metrics.cone_minus_error <= 5.0 * h);
    }
}

#[test]
fn flat_and_light_planes() {
    let h = 0.1;
    let d = punctured(2.0, h);
    let zero = ScalarField::from_fn(d.clone(), |_| 0.0).unwrap();
    let rep = classify_entire(&zero, &ClassifyOptions::default()).unwrap();
    assert_eq!(rep.case, Case::Maximal);
    assert_eq!(rep.metrics.light_segments, 0);

    let plane = ScalarField::from_fn(d, |x| x[1]).unwrap();
    let rep = classify_entire(&plane, &ClassifyOptions::default()).unwrap();
    let Case::HyperplaneAsymptotic { a, side } = rep.case else { panic!("{:?}", rep.case) };
    assert!((a[1] - 1.0).abs() < 1e-9);
    assert_eq!(side, Side::Below);
    assert!(rep.metrics.one_sided_margin.unwrap() <= 5.0 * h);
    assert!(rep.metrics.half_ray_error.unwrap() <= 5.0 * h);
    assert!(rep.metrics.blowdown.is_some());
}

#[test]
fn classification_needs_a_puncture() {
    let d = ball(2.0, 0.2);
    let u = ScalarField::from_fn(d, norm).unwrap();
    assert!(classify_entire(&u, &ClassifyOptions::default()).is_err());
}

fn unit_circle(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

#[test]
fn exterior_cones_give_the_first_two_cases() {
    let h = 0.1;
    let d = annulus(1.0, 4.0, h);
    let a = unit_circle(64);
    let opts = ClassifyOptions::default();
    for c in [0.0, 3.25] {
        let down = ScalarField::from_fn(d.clone(), |x| c + 1.0 - norm(x)).unwrap();
        let rep = exterior_trichotomy(&down, &a, [0.0, 0.0], &opts).unwrap();
        assert_eq!(rep.case, Case::TrichotomyII);
        assert_eq!(rep.hypothesis_holds, Some(true));
        let e = rep.metrics.cone_plus_extrema.unwrap();
        assert!(e.max_attained(5.0 * h) && e.min_attained(5.0 * h));

        let up = ScalarField::from_fn(d.clone(), |x| c + norm(x) - 1.0).unwrap();
        let rep = exterior_trichotomy(&up, &a, [0.0, 0.0], &opts).unwrap();
        assert_eq!(rep.case, Case::TrichotomyI);
    }
}

#[test]
fn exterior_light_plane_gives_the_third_case() {
    let h = 0.1;
    let d = annulus(1.0, 4.0, h);
    let u = ScalarField::from_fn(d, |x| x[0]).unwrap();
    let rep = exterior_trichotomy(&u, &unit_circle(64), [0.0, 0.0], &ClassifyOptions::default()).unwrap();
    let Case::TrichotomyIII { a } = rep.case else { panic!("{:?}", rep.case) };
    assert!((a[0] - 1.0).abs() < 1e-9);
    assert!(rep.metrics.one_sided_margin.unwrap().abs() < 1e-9);
}

#[test]
fn base_point_outside_the_hull_is_rejected() {
    let d = annulus(1.0, 4.0, 0.2);
    let u = ScalarField::from_fn(d, norm).unwrap();
    assert!(exterior_trichotomy(&u, &unit_circle(16), [3.0, 0.0], &ClassifyOptions::default()).is_err());
}


#[test]
fn case_names_serialize_as_in_reports() {
    let name = |c: Case| serde_json::to_value(c).unwrap()["case"].as_str().unwrap().to_string();
    assert_eq!(name(Case::LowerCone), "lower-cone");
    assert_eq!(name(Case::TrichotomyI), "trichotomy-i");
    assert_eq!(name(Case::TrichotomyII), "trichotomy-ii");
    assert_eq!(name(Case::TrichotomyIII { a: [0.0, 1.0] }), "trichotomy-iii");
    let c = Case::HyperplaneAsymptotic { a: [0.0, 1.0], side: Side::Below };
    let v = serde_json::to_value(c).unwrap();
    assert_eq!(v["case"], "hyperplane-asymptotic");
    assert_eq!(serde_json::from_value::<Case>(v).unwrap(), c);
}
