use std::sync::Arc;

use maxarea_core::GridDomain;

/// Energy of a P1 field on an explicit list of triangles, written from vertex coordinates.
pub fn oracle_energy(tris: &[[([f64; 2], usize); 3]], u: &[f64]) -> (f64, Vec<f64>) {
    let mut e = 0.0;
    let mut grad = vec![0.0; u.len()];
    for t in tris {
        let [(x0, i0), (x1, i1), (x2, i2)] = *t;
        let (a, b) = ([x1[0] - x0[0], x1[1] - x0[1]], [x2[0] - x0[0], x2[1] - x0[1]]);
        let det = a[0] * b[1] - a[1] * b[0];
        let area = det.abs() / 2.0;
        // solve [a; b] p = [du1; du2]
        let (d1, d2) = (u[i1] - u[i0], u[i2] - u[i0]);
        let p = [(d1 * b[1] - d2 * a[1]) / det, (a[0] * d2 - b[0] * d1) / det];
        let s2 = p[0] * p[0] + p[1] * p[1];
        let f = (1.0 - s2).sqrt();
        e += area * f;
        // dp/du1 = [b1, -b0]/det, dp/du2 = [-a1, a0]/det, dp/du0 = -(dp/du1 + dp/du2)
        let q1 = [b[1] / det, -b[0] / det];
        let q2 = [-a[1] / det, a[0] / det];
        let q0 = [-q1[0] - q2[0], -q1[1] - q2[1]];
        for (q, i) in [(q0, i0), (q1, i1), (q2, i2)] {
            grad[i] -= area * (p[0] * q[0] + p[1] * q[1]) / f;
        }
    }
    (e, grad)
}

/// Maximizer over the interior nodes of the 5 x 5 unit-square grid by exact coordinate
/// ascent, starting from the generator (which must be strictly spacelike).
///
/// Triangles come from coordinates with the (i,j)-(i+1,j+1) split.
pub fn coordinate_ascent_oracle(d: &Arc<GridDomain>, g: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut tris = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            let n = |a: i32, b: i32| (d.coord([a, b]), d.node_at([a, b]).unwrap());
            tris.push([n(i, j), n(i + 1, j), n(i + 1, j + 1)]);
            tris.push([n(i, j), n(i + 1, j + 1), n(i, j + 1)]);
        }
    }
    let mut v: Vec<f64> = d.points().map(g).collect();
    let interior: Vec<usize> = (0..d.len()).filter(|&i| !d.is_boundary(i)).collect();
    assert_eq!(interior.len(), 9);
    assert!(!oracle_energy(&tris, &v).0.is_nan());
    let mut last = f64::NEG_INFINITY;
    for _sweep in 0..20_000 {
        let mut moved = 0.0f64;
        for &i in &interior {
            // bisection on the (decreasing) partial derivative within the feasible window
            let (mut lo, mut hi) = (v[i] - 0.5, v[i] + 0.5);
            let slope = |t: f64, v: &mut Vec<f64>| {
                let old = v[i];
                v[i] = t;
                let (e, g) = oracle_energy(&tris, v);
                v[i] = old;
                if e.is_nan() { None } else { Some(g[i]) }
            };
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                match slope(mid, &mut v) {
                    Some(s) if s > 0.0 => lo = mid,
                    Some(_) => hi = mid,
                    None => {
                        // infeasible: step back toward the current feasible value
                        if mid > v[i] { hi = mid } else { lo = mid }
                    }
                }
            }
            moved = moved.max((0.5 * (lo + hi) - v[i]).abs());
            v[i] = 0.5 * (lo + hi);
        }
        let e = oracle_energy(&tris, &v).0;
        if moved < 1e-14 && (e - last).abs() < 1e-14 {
            break;
        }
        last = e;
    }
    v
}
