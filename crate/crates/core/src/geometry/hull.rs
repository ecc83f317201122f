use alloc::vec::Vec;

use crate::{Error, Point, Result};

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise convex hull by the monotone chain construction.
///
/// Collinear sets return the two segment endpoints; a single point returns itself.
pub fn convex_hull(points: &[Point]) -> Result<Vec<Point>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("convex hull of an empty set".into()));
    }
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return Ok(pts);
    }
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Ok(hull)
}

/// Whether `x` lies in the hull polygon, inflated by `tol`.
pub fn hull_contains(hull: &[Point], x: Point, tol: f64) -> bool {
    match hull.len() {
        0 => false,
        1 => super::dist(hull[0], x) <= tol,
        2 => segment_distance(hull[0], hull[1], x) <= tol,
        n => (0..n).all(|k| {
            let (a, b) = (hull[k], hull[(k + 1) % n]);
            let len = super::dist(a, b);
            cross(a, b, x) >= -tol * len
        }),
    }
}

fn segment_distance(a: Point, b: Point, x: Point) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 { (((x[0] - a[0]) * ab[0] + (x[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    super::dist([a[0] + t * ab[0], a[1] + t * ab[1]], x)
}
