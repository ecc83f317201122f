use alloc::vec::Vec;

use super::domain::{GridDomain, Lattice};
use crate::Point;

/// Which diagonal splits each grid cell into two triangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diagonal {
    /// From `(i, j)` to `(i+1, j+1)`; the triangulation the solver maximizes on.
    Main,
    /// From `(i+1, j)` to `(i, j+1)`.
    Anti,
}

/// A linear element: a triangle in 2D, an edge in 1D.
///
/// The element gradient is `sum_v u[nodes[v]] * grad[v]`.
#[derive(Clone, Copy, Debug)]
pub struct Element {
    pub nodes: [usize; 3],
    pub grad: [Point; 3],
    pub measure: f64,
    pub len: usize,
}

impl Element {
    pub fn vertices(&self) -> &[usize] {
        &self.nodes[..self.len]
    }

    #[inline]
    pub fn gradient(&self, values: &[f64]) -> Point {
        let mut p = [0.0; 2];
        for v in 0..self.len {
            let u = values[self.nodes[v]];
            p[0] += u * self.grad[v][0];
            p[1] += u * self.grad[v][1];
        }
        p
    }
}

/// Fully active elements of a domain.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub diagonal: Diagonal,
    pub elements: Vec<Element>,
}

impl Mesh {
    pub fn new(domain: &GridDomain, diagonal: Diagonal) -> Self {
        let h = domain.h();
        let ih = 1.0 / h;
        let mut elements = Vec::new();
        if domain.dim() == 1 {
            for id in 0..domain.len() {
                let l = domain.lattice(id);
                if let Some(b) = domain.node_at([l[0] + 1, 0]) {
                    elements.push(Element {
                        nodes: [id, b, usize::MAX],
                        grad: [[-ih, 0.0], [ih, 0.0], [0.0; 2]],
                        measure: h,
                        len: 2,
                    });
                }
            }
            return Mesh { diagonal, elements };
        }
        let area = 0.5 * h * h;
        let at = |l: Lattice| domain.node_at(l);
        for id in 0..domain.len() {
            let [i, j] = domain.lattice(id);
            let a = Some(id);
            let b = at([i + 1, j]);
            let c = at([i + 1, j + 1]);
            let d = at([i, j + 1]);
            let mut push = |nodes: [Option<usize>; 3], grad: [Point; 3]| {
                if let [Some(x), Some(y), Some(z)] = nodes {
                    elements.push(Element { nodes: [x, y, z], grad, measure: area, len: 3 });
                }
            };
            match diagonal {
                Diagonal::Main => {
                    push([a, b, c], [[-ih, 0.0], [ih, -ih], [0.0, ih]]);
                    push([a, c, d], [[0.0, -ih], [ih, 0.0], [-ih, ih]]);
                }
                Diagonal::Anti => {
                    push([a, b, d], [[-ih, -ih], [ih, 0.0], [0.0, ih]]);
                    push([b, c, d], [[0.0, -ih], [ih, ih], [-ih, 0.0]]);
                }
            }
        }
        Mesh { diagonal, elements }
    }

    /// Element ids incident to each node, as CSR offsets and indices.
    pub fn incidence(&self, nodes: usize) -> (Vec<usize>, Vec<usize>) {
        let mut count = alloc::vec![0usize; nodes + 1];
        for e in &self.elements {
            for &v in e.vertices() {
                count[v + 1] += 1;
            }
        }
        for k in 0..nodes {
            count[k + 1] += count[k];
        }
        let mut fill = count.clone();
        let mut idx = alloc::vec![0usize; count[nodes]];
        for (eid, e) in self.elements.iter().enumerate() {
            for &v in e.vertices() {
                idx[fill[v]] = eid;
                fill[v] += 1;
            }
        }
        (count, idx)
    }
}
