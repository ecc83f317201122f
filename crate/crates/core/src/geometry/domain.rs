use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::dist;
use crate::{Error, Point, Result};

/// Integer lattice index `(i, j)`; one-dimensional domains keep `j = 0`.
pub type Lattice = [i32; 2];

const NONE: usize = usize::MAX;

/// Region descriptor. The dimension is the length of the coordinate vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Region {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: Vec<f64>,
        r_in: f64,
        r_out: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    BoxMinusFiniteSet {
        lo: Vec<f64>,
        hi: Vec<f64>,
        points: Vec<Vec<f64>>,
    },
    /// A ball with one or more pinned puncture points. `puncture` is the
    /// single-point form; both fields may be combined.
    PuncturedBall {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        puncture: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        punctures: Vec<Vec<f64>>,
    },
}

/// Serialized domain description: `{"shape": "...", "h": ..., params}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub region: Region,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,
}

impl DomainSpec {
    pub fn new(region: Region, h: f64) -> Self {
        Self {
            region,
            h,
            origin: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Interior,
    /// Outer staircase layer.
    Outer,
    /// Inner staircase layer of an annulus.
    Inner,
    /// Node pinned for the puncture with the given index.
    Puncture(usize),
}

impl NodeKind {
    pub fn is_boundary(self) -> bool {
        !matches!(self, NodeKind::Interior)
    }
}

/// Validated geometric view of a [`Region`].
#[derive(Clone, Debug)]
enum Shape {
    Ball { c: Point, r: f64 },
    Annulus { c: Point, r_in: f64, r_out: f64 },
    Box { lo: Point, hi: Point },
}

impl Shape {
    fn inside(&self, x: Point, eps: f64) -> bool {
        match *self {
            Shape::Ball { c, r } => dist(x, c) <= r + eps,
            Shape::Annulus { c, r_in, r_out } => {
                let d = dist(x, c);
                d >= r_in - eps && d <= r_out + eps
            }
            Shape::Box { lo, hi } => (0..2).all(|k| x[k] >= lo[k] - eps && x[k] <= hi[k] + eps),
        }
    }

    fn bbox(&self) -> (Point, Point) {
        match *self {
            Shape::Ball { c, r } | Shape::Annulus { c, r_out: r, .. } => {
                ([c[0] - r, c[1] - r], [c[0] + r, c[1] + r])
            }
            Shape::Box { lo, hi } => (lo, hi),
        }
    }
}

/// A masked uniform grid: active lattice nodes, with the Dirichlet layer flagged.
///
/// Nodes are numbered in lexicographic `(i, j)` order. The boundary of a curved
/// region is the staircase layer of active nodes having an inactive 4-neighbour or
/// an inactive `(i±1, j±1)` neighbour (so every free node has a full triangle star);
/// each puncture adds the single lattice node nearest to it.
#[derive(Clone, Debug)]
pub struct GridDomain {
    spec: DomainSpec,
    dim: usize,
    h: f64,
    origin: Point,
    lo: Lattice,
    size: [usize; 2],
    nodes: Vec<Lattice>,
    lookup: Vec<usize>,
    kinds: Vec<NodeKind>,
    boundary: Vec<usize>,
    punctures: Vec<(Point, usize)>,
    center: Option<Point>,
}

impl PartialEq for GridDomain {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn point_of(v: &[f64], dim: usize, what: &str) -> Result<Point> {
    if v.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "{what} has {} coordinates, expected {dim}",
            v.len()
        )));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} is not finite")));
    }
    Ok([v[0], if dim == 2 { v[1] } else { 0.0 }])
}

fn degenerate(msg: String) -> Error {
    Error::DegenerateRegion(msg)
}

impl GridDomain {
    /// Builds the domain for `region` at spacing `h` with the lattice anchored at the origin.
    pub fn make(region: Region, h: f64) -> Result<Self> {
        Self::new(DomainSpec::new(region, h))
    }

    pub fn new(spec: DomainSpec) -> Result<Self> {
        let h = spec.h;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid spacing must be positive, got {h}")));
        }
        let dim = match &spec.region {
            Region::Ball { center, .. }
            | Region::Annulus { center, .. }
            | Region::PuncturedBall { center, .. } => center.len(),
            Region::Box { lo, .. } | Region::BoxMinusFiniteSet { lo, .. } => lo.len(),
        };
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension {dim} is not supported")));
        }
        let origin = match &spec.origin {
            Some(o) => point_of(o, dim, "origin")?,
            None => [0.0; 2],
        };

        let mut puncture_points = Vec::new();
        let mut center = None;
        let shape = match &spec.region {
            Region::Ball { center: c, radius } => {
                let c = point_of(c, dim, "center")?;
                if !(*radius > 2.0 * h) {
                    return Err(degenerate(format!("ball radius {radius} must exceed 2h = {}", 2.0 * h)));
                }
                center = Some(c);
                Shape::Ball { c, r: *radius }
            }
            Region::Annulus { center: c, r_in, r_out } => {
                let c = point_of(c, dim, "center")?;
                if !(*r_in > 0.0 && *r_out - *r_in > 2.0 * h) {
                    return Err(degenerate(format!(
                        "annulus radii ({r_in}, {r_out}) must satisfy 0 < r_in and r_out - r_in > 2h"
                    )));
                }
                center = Some(c);
                Shape::Annulus { c, r_in: *r_in, r_out: *r_out }
            }
            Region::Box { lo, hi } | Region::BoxMinusFiniteSet { lo, hi, .. } => {
                let lo = point_of(lo, dim, "lo")?;
                let hi = point_of(hi, dim, "hi")?;
                for k in 0..dim {
                    if !(hi[k] - lo[k] >= 4.0 * h * (1.0 - 1e-9)) {
                        return Err(degenerate(format!("box side {} must be at least 4h = {}", hi[k] - lo[k], 4.0 * h)));
                    }
                }
                if let Region::BoxMinusFiniteSet { points, .. } = &spec.region {
                    for p in points {
                        let p = point_of(p, dim, "removed point")?;
                        if (0..dim).any(|k| p[k] < lo[k] || p[k] > hi[k]) {
                            return Err(degenerate(format!("removed point {p:?} lies outside the box")));
                        }
                        puncture_points.push(p);
                    }
                }
                Shape::Box { lo, hi }
            }
            Region::PuncturedBall { center: c, radius, puncture, punctures } => {
                let c = point_of(c, dim, "center")?;
                if !(*radius > 2.0 * h) {
                    return Err(degenerate(format!("ball radius {radius} must exceed 2h = {}", 2.0 * h)));
                }
                for p in puncture.iter().chain(punctures.iter()) {
                    let p = point_of(p, dim, "puncture")?;
                    if dist(p, c) >= *radius {
                        return Err(degenerate(format!("puncture {p:?} lies outside the ball")));
                    }
                    puncture_points.push(p);
                }
                center = Some(c);
                Shape::Ball { c, r: *radius }
            }
        };

        let eps = 1e-9 * h;
        let (bmin, bmax) = shape.bbox();
        let mut lo = [0i32; 2];
        let mut size = [1usize; 2];
        for k in 0..dim {
            let a = libm::floor((bmin[k] - origin[k]) / h) as i32 - 1;
            let b = libm::ceil((bmax[k] - origin[k]) / h) as i32 + 1;
            lo[k] = a;
            size[k] = (b - a + 1) as usize;
        }

        let coord = |l: Lattice| -> Point {
            [origin[0] + h * l[0] as f64, if dim == 2 { origin[1] + h * l[1] as f64 } else { 0.0 }]
        };

        let mut lookup = vec![NONE; size[0] * size[1]];
        let mut nodes = Vec::new();
        for a in 0..size[0] {
            for b in 0..size[1] {
                let l = [lo[0] + a as i32, lo[1] + b as i32];
                if shape.inside(coord(l), eps) {
                    lookup[a * size[1] + b] = nodes.len();
                    nodes.push(l);
                }
            }
        }
        if nodes.is_empty() {
            return Err(degenerate(String::from("region contains no lattice nodes")));
        }

        let mut domain = GridDomain {
            spec,
            dim,
            h,
            origin,
            lo,
            size,
            kinds: vec![NodeKind::Interior; nodes.len()],
            nodes,
            lookup,
            boundary: Vec::new(),
            punctures: Vec::new(),
            center,
        };

        for id in 0..domain.nodes.len() {
            let l = domain.nodes[id];
            if !domain.star_complete(l) {
                domain.kinds[id] = match shape {
                    Shape::Annulus { c, r_in, r_out } if dist(coord(l), c) < 0.5 * (r_in + r_out) => NodeKind::Inner,
                    _ => NodeKind::Outer,
                };
            }
        }

        for (k, p) in puncture_points.iter().enumerate() {
            let id = domain
                .nearest_node(*p)
                .ok_or_else(|| degenerate(format!("no active node near puncture {p:?}")))?;
            if let NodeKind::Puncture(other) = domain.kinds[id] {
                return Err(degenerate(format!("punctures {other} and {k} share the lattice node {:?}", domain.nodes[id])));
            }
            domain.kinds[id] = NodeKind::Puncture(k);
            domain.punctures.push((*p, id));
        }

        domain.boundary = (0..domain.nodes.len()).filter(|&i| domain.kinds[i].is_boundary()).collect();
        domain.check_connected()?;
        Ok(domain)
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(id) = queue.pop_front() {
            for n in self.neighbours4(self.nodes[id]).into_iter().flatten() {
                if !seen[n] {
                    seen[n] = true;
                    count += 1;
                    queue.push_back(n);
                }
            }
        }
        if count != self.nodes.len() {
            return Err(degenerate(format!(
                "active set is not edge-connected ({count} of {} nodes reachable)",
                self.nodes.len()
            )));
        }
        Ok(())
    }

    /// Element of the main-diagonal triangulation containing `x`, with barycentric weights.
    ///
    /// Node points return that node with weight one. Unused slots repeat a node with weight zero.
    pub fn locate(&self, x: Point) -> Option<([usize; 3], [f64; 3])> {
        if let Some(id) = self.node_near(x) {
            return Some(([id; 3], [1.0, 0.0, 0.0]));
        }
        let tol = 1e-9;
        let snap = |v: f64| {
            let r = libm::round(v);
            if (v - r).abs() < tol { r } else { v }
        };
        let s = self.to_lattice(x).map(snap);
        let i0 = libm::floor(s[0]);
        let fa = s[0] - i0;
        let at = |l: Lattice| self.node_at(l);

        if self.dim == 1 {
            for (i, a) in [(i0 as i32, fa), (i0 as i32 - 1, fa + 1.0)] {
                if a > 1.0 + tol {
                    continue;
                }
                if let (Some(p), Some(q)) = (at([i, 0]), at([i + 1, 0])) {
                    return Some(([p, q, q], [1.0 - a, a, 0.0]));
                }
            }
            return None;
        }

        let j0 = libm::floor(s[1]);
        let fb = s[1] - j0;
        let mut cells = [(i0 as i32, j0 as i32, fa, fb); 4];
        let mut n = 1;
        if fa < tol {
            cells[n] = (i0 as i32 - 1, j0 as i32, fa + 1.0, fb);
            n += 1;
        }
        if fb < tol {
            cells[n] = (i0 as i32, j0 as i32 - 1, fa, fb + 1.0);
            n += 1;
            if fa < tol {
                cells[n] = (i0 as i32 - 1, j0 as i32 - 1, fa + 1.0, fb + 1.0);
                n += 1;
            }
        }
        for &(i, j, a, b) in &cells[..n] {
            let pa = at([i, j]);
            let pc = at([i + 1, j + 1]);
            if b <= a + tol {
                // (i,j), (i+1,j), (i+1,j+1)
                if let (Some(pa), Some(pb), Some(pc)) = (pa, at([i + 1, j]), pc) {
                    return Some(([pa, pb, pc], [1.0 - a, a - b, b]));
                }
            }
            if b >= a - tol {
                // (i,j), (i+1,j+1), (i,j+1)
                if let (Some(pa), Some(pc), Some(pd)) = (pa, pc, at([i, j + 1])) {
                    return Some(([pa, pc, pd], [1.0 - b, a, b - a]));
                }
            }
        }
        None
    }

    pub fn covers(&self, x: Point) -> bool {
        self.locate(x).is_some()
    }

    /// All four neighbours plus both main-diagonal neighbours are active, i.e. the node
    /// carries the full six-triangle star of the solver mesh.
    fn star_complete(&self, l: Lattice) -> bool {
        self.neighbours4(l).iter().all(|n| n.is_some())
            && (self.dim == 1 || (self.node_at([l[0] + 1, l[1] + 1]).is_some() && self.node_at([l[0] - 1, l[1] - 1]).is_some()))
    }

    /// The 4-neighbours (2-neighbours in dimension one); `None` marks an inactive slot.
    pub(crate) fn neighbours4(&self, l: Lattice) -> Vec<Option<usize>> {
        if self.dim == 1 {
            vec![self.node_at([l[0] - 1, 0]), self.node_at([l[0] + 1, 0])]
        } else {
            vec![
                self.node_at([l[0] - 1, l[1]]),
                self.node_at([l[0] + 1, l[1]]),
                self.node_at([l[0], l[1] - 1]),
                self.node_at([l[0], l[1] + 1]),
            ]
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn region(&self) -> &Region {
        &self.spec.region
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// Number of active nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lattice(&self, id: usize) -> Lattice {
        self.nodes[id]
    }

    pub fn lattice_nodes(&self) -> &[Lattice] {
        &self.nodes
    }

    pub fn point(&self, id: usize) -> Point {
        self.coord(self.nodes[id])
    }

    pub fn coord(&self, l: Lattice) -> Point {
        [
            self.origin[0] + self.h * l[0] as f64,
            if self.dim == 2 { self.origin[1] + self.h * l[1] as f64 } else { 0.0 },
        ]
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.nodes.iter().map(|&l| self.coord(l))
    }

    /// Active node at lattice index `l`.
    pub fn node_at(&self, l: Lattice) -> Option<usize> {
        let a = l[0] as i64 - self.lo[0] as i64;
        let b = l[1] as i64 - self.lo[1] as i64;
        if a < 0 || b < 0 || a >= self.size[0] as i64 || b >= self.size[1] as i64 {
            return None;
        }
        let id = self.lookup[a as usize * self.size[1] + b as usize];
        (id != NONE).then_some(id)
    }

    /// Fractional lattice coordinates of a point.
    pub fn to_lattice(&self, x: Point) -> [f64; 2] {
        [
            (x[0] - self.origin[0]) / self.h,
            if self.dim == 2 { (x[1] - self.origin[1]) / self.h } else { 0.0 },
        ]
    }

    /// Active node whose coordinates coincide with `x` up to `1e-9 h`.
    pub fn node_near(&self, x: Point) -> Option<usize> {
        let s = self.to_lattice(x);
        let l = [libm::round(s[0]) as i32, libm::round(s[1]) as i32];
        let id = self.node_at(l)?;
        (dist(self.point(id), x) <= 1e-9 * self.h).then_some(id)
    }

    /// Nearest active node among the lattice cell corners around `x`; ties go
    /// to the lexicographically smallest index.
    pub fn nearest_node(&self, x: Point) -> Option<usize> {
        let s = self.to_lattice(x);
        let base = [libm::floor(s[0]) as i32, libm::floor(s[1]) as i32];
        let span = if self.dim == 2 { 2 } else { 1 };
        let mut best: Option<(f64, usize)> = None;
        for di in 0..2 {
            for dj in 0..span {
                let l = [base[0] + di, base[1] + dj];
                if let Some(id) = self.node_at(l) {
                    let d = dist(self.coord(l), x);
                    let better = match best {
                        None => true,
                        Some((bd, _)) => d < bd - 1e-12 * self.h,
                    };
                    if better {
                        best = Some((d, id));
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        self.kinds[id]
    }

    pub fn is_boundary(&self, id: usize) -> bool {
        self.kinds[id].is_boundary()
    }

    /// Dirichlet nodes in increasing id order (staircase layers and punctures).
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Position of node `id` within [`Self::boundary_nodes`].
    pub fn boundary_index(&self, id: usize) -> Option<usize> {
        self.boundary.binary_search(&id).ok()
    }

    /// Puncture points with their pinned lattice nodes.
    pub fn punctures(&self) -> &[(Point, usize)] {
        &self.punctures
    }

    /// Nodes of the obstacle boundary: the inner annulus layer and the punctures.
    pub fn obstacle_nodes(&self) -> Vec<usize> {
        self.boundary
            .iter()
            .copied()
            .filter(|&i| matches!(self.kinds[i], NodeKind::Inner | NodeKind::Puncture(_)))
            .collect()
    }

    pub fn outer_nodes(&self) -> Vec<usize> {
        self.boundary.iter().copied().filter(|&i| self.kinds[i] == NodeKind::Outer).collect()
    }

    /// Center of a ball, annulus, or punctured ball.
    pub fn center(&self) -> Option<Point> {
        self.center
    }

    /// Outer radius of a ball, annulus, or punctured ball.
    pub fn outer_radius(&self) -> Option<f64> {
        match self.spec.region {
            Region::Ball { radius, .. } | Region::PuncturedBall { radius, .. } => Some(radius),
            Region::Annulus { r_out, .. } => Some(r_out),
            _ => None,
        }
    }
}
