use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{dist, BoundaryData, GridDomain, ScalarField};
use crate::{Error, Point, Result};

/// Boundary pair whose data difference reaches the Euclidean distance at grid scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightSegment {
    /// Node ids with `nodes.0 < nodes.1`.
    pub nodes: (usize, usize),
    pub x: Point,
    pub y: Point,
    pub phi_x: f64,
    pub phi_y: f64,
    /// `+1` if `phi(y) - phi(x)` is positive (the segment rises from x to y), `-1` otherwise.
    pub sign: i8,
    /// Max deviation from linearity along the segment, once measured.
    pub residual: Option<f64>,
    /// Residual above `5h`.
    pub flagged: bool,
}

impl LightSegment {
    pub fn length(&self) -> f64 {
        dist(self.x, self.y)
    }

    /// `| |phi(x) - phi(y)| - |x - y| |`.
    pub fn defect(&self) -> f64 {
        ((self.phi_y - self.phi_x).abs() - self.length()).abs()
    }

    pub fn touches(&self, node: usize) -> bool {
        self.nodes.0 == node || self.nodes.1 == node
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    pub tol: f64,
    pub segments: Vec<LightSegment>,
}

impl SingularSet {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn through(&self, node: usize) -> impl Iterator<Item = &LightSegment> {
        self.segments.iter().filter(move |s| s.touches(node))
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.segments.iter().filter_map(|s| s.residual).reduce(f64::max)
    }
}

/// Open segment stays in the triangulated region, sampled at `h/4`.
pub(crate) fn segment_inside(domain: &GridDomain, x: Point, y: Point) -> bool {
    let n = libm::ceil(dist(x, y) / (0.25 * domain.h())) as usize;
    (1..n).all(|k| {
        let t = k as f64 / n as f64;
        domain.covers([x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])])
    })
}

/// Some `h/4` sample of the segment is farther than `depth` from every boundary node.
fn reaches_interior(domain: &GridDomain, x: Point, y: Point, depth: f64) -> bool {
    let h = domain.h();
    let n = libm::ceil(dist(x, y) / (0.25 * h)) as usize;
    let k = libm::ceil(depth / h) as i32;
    (1..n).any(|m| {
        let t = m as f64 / n as f64;
        let p = [x[0] + t * (y[0] - x[0]), x[1] + t * (y[1] - x[1])];
        let s = domain.to_lattice(p);
        let (i0, j0) = (libm::round(s[0]) as i32, libm::round(s[1]) as i32);
        let rows = if domain.dim() == 1 { 0 } else { k };
        !(-k..=k).any(|di| {
            (-rows..=rows).any(|dj| {
                domain
                    .node_at([i0 + di, j0 + dj])
                    .is_some_and(|id| domain.is_boundary(id) && dist(domain.point(id), p) <= depth)
            })
        })
    })
}

/// All boundary pairs with `|phi(x) - phi(y)| >= |x - y| - tol` whose open segment lies in the domain.
///
/// Short chords satisfy the inequality at grid scale for any Lipschitz data, so a segment
/// must also reach a point farther than `tol` from every boundary node.
pub fn singular_set(domain: &GridDomain, phi: &BoundaryData, tol: f64) -> Result<SingularSet> {
    collect(domain, phi, tol, None)
}

/// Light segments with one endpoint at the given boundary node.
pub fn segments_through(domain: &GridDomain, phi: &BoundaryData, tol: f64, node: usize) -> Result<SingularSet> {
    collect(domain, phi, tol, Some(node))
}

fn collect(domain: &GridDomain, phi: &BoundaryData, tol: f64, only: Option<usize>) -> Result<SingularSet> {
    let h = domain.h();
    if !(tol >= h * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(alloc::format!("tolerance {tol} must be at least h = {h}")));
    }
    let b = domain.boundary_nodes();
    if phi.values().len() != b.len() {
        return Err(Error::InvalidArgument("boundary data does not match the domain".into()));
    }
    let pts: Vec<Point> = b.iter().map(|&i| domain.point(i)).collect();
    let fixed = match only {
        Some(node) => Some(domain.boundary_index(node).ok_or_else(|| Error::InvalidArgument("node is not a boundary node".into()))?),
        None => None,
    };
    let mut segments = Vec::new();
    for a in 0..b.len() {
        for c in a + 1..b.len() {
            if fixed.is_some_and(|f| a != f && c != f) {
                continue;
            }
            let len = dist(pts[a], pts[c]);
            if len <= tol {
                continue;
            }
            let (pa, pc) = (phi.values()[a], phi.values()[c]);
            if (pa - pc).abs() < len - tol
                || !segment_inside(domain, pts[a], pts[c])
                || !reaches_interior(domain, pts[a], pts[c], tol)
            {
                continue;
            }
            // boundary ids are increasing, so (a, c) is already ordered
            segments.push(LightSegment {
                nodes: (b[a], b[c]),
                x: pts[a],
                y: pts[c],
                phi_x: pa,
                phi_y: pc,
                sign: if pc >= pa { 1 } else { -1 },
                residual: None,
                flagged: false,
            });
        }
    }
    Ok(SingularSet { tol, segments })
}

/// Fills each segment's max deviation from `t phi(x) + (1-t) phi(y)` at `t = 0.1, ..., 0.9`.
pub fn verify_ray_linearity(field: &ScalarField, segs: &SingularSet) -> Result<SingularSet> {
    let limit = 5.0 * field.domain().h();
    let mut out = segs.clone();
    for s in &mut out.segments {
        let mut worst = 0.0f64;
        for k in 1..10 {
            let t = k as f64 / 10.0;
            let p = [t * s.x[0] + (1.0 - t) * s.y[0], t * s.x[1] + (1.0 - t) * s.y[1]];
            let want = t * s.phi_x + (1.0 - t) * s.phi_y;
            worst = worst.max((field.evaluate(p)? - want).abs());
        }
        s.residual = Some(worst);
        s.flagged = worst > limit;
    }
    Ok(out)
}
