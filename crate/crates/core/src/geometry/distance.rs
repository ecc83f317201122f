use alloc::collections::BinaryHeap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::domain::{GridDomain, Lattice};
use super::field::{BoundaryData, ScalarField};
use crate::{Error, Result};

#[derive(Clone, Copy)]
struct Entry {
    dist: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // min-heap on distance, then node id
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

const OFFSETS_2D: [(i32, i32, bool); 8] = [
    (-1, 0, false),
    (1, 0, false),
    (0, -1, false),
    (0, 1, false),
    (-1, -1, true),
    (-1, 1, true),
    (1, -1, true),
    (1, 1, true),
];

/// Multi-source Dijkstra on the 8-neighbour graph of active nodes.
///
/// Returns `min_s (offset_s + d(s, x))` for every node `x`; unreachable nodes get `+inf`.
pub fn graph_distances(domain: &GridDomain, sources: &[(usize, f64)]) -> Vec<f64> {
    let h = domain.h();
    let hd = h * core::f64::consts::SQRT_2;
    let mut dist = vec![f64::INFINITY; domain.len()];
    let mut heap = BinaryHeap::new();
    for &(node, offset) in sources {
        if offset < dist[node] {
            dist[node] = offset;
            heap.push(Entry { dist: offset, node });
        }
    }
    let offsets: &[(i32, i32, bool)] = if domain.dim() == 1 { &OFFSETS_2D[..2] } else { &OFFSETS_2D };
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        let [i, j] = domain.lattice(node);
        for &(di, dj, diag) in offsets {
            if let Some(n) = domain.node_at([i + di, j + dj]) {
                let nd = d + if diag { hd } else { h };
                if nd < dist[n] {
                    dist[n] = nd;
                    heap.push(Entry { dist: nd, node: n });
                }
            }
        }
    }
    dist
}

/// Shortest-path length between two active nodes through the domain.
pub fn intrinsic_distance(domain: &GridDomain, x: Lattice, y: Lattice) -> Result<f64> {
    let a = domain.node_at(x).ok_or(Error::InactiveNode(x))?;
    let b = domain.node_at(y).ok_or(Error::InactiveNode(y))?;
    Ok(graph_distances(domain, &[(a, 0.0)])[b])
}

/// Largest weakly spacelike extension of boundary data, with its admissibility verdict.
#[derive(Clone, Debug)]
pub struct McShane {
    pub field: ScalarField,
    /// True iff the extension reproduces the data on the boundary within `1e-12`.
    pub admissible: bool,
    /// `max (g - psi)` over boundary nodes: how far the data exceeds the intrinsic Lipschitz bound.
    pub excess: f64,
}

pub(crate) fn extension_values(domain: &GridDomain, sources: &[(usize, f64)]) -> (Vec<f64>, f64) {
    let psi = graph_distances(domain, sources);
    let excess = sources.iter().fold(0.0, |m, &(n, g)| f64::max(m, g - psi[n]));
    (psi, excess)
}

/// `psi(x) = min_y (g(y) + d(x, y))` over boundary nodes `y`.
pub fn mcshane_extension(domain: &Arc<GridDomain>, g: &BoundaryData) -> Result<McShane> {
    if g.values().len() != domain.boundary_nodes().len() {
        return Err(Error::InvalidArgument(alloc::format!(
            "boundary data has {} values for {} boundary nodes",
            g.values().len(),
            domain.boundary_nodes().len()
        )));
    }
    let sources: Vec<(usize, f64)> = domain.boundary_nodes().iter().copied().zip(g.values().iter().copied()).collect();
    let (psi, excess) = extension_values(domain, &sources);
    let field = ScalarField::new(domain.clone(), psi)?;
    Ok(McShane { field, admissible: excess <= 1e-12, excess })
}
