use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{norm, Diagonal, GridDomain, Mesh, ScalarField};
use crate::Point;

/// Slope at which a triangle counts as light-like for residual purposes.
const DEGENERATE: f64 = 1.0 - 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum NodeResidual {
    Value(f64),
    /// Some incident triangle is (nearly) light-like; the equation is undefined there.
    Degenerate,
    /// Dirichlet node or incomplete triangle star.
    NotInterior,
}

/// Per-node discrete values of `div(Du / sqrt(1 - |Du|^2))`.
#[derive(Clone, Debug)]
pub struct Residual {
    domain: Arc<GridDomain>,
    entries: Vec<NodeResidual>,
}

impl Residual {
    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn entries(&self) -> &[NodeResidual] {
        &self.entries
    }

    pub fn get(&self, id: usize) -> NodeResidual {
        self.entries[id]
    }

    pub fn degenerate_nodes(&self) -> Vec<usize> {
        (0..self.entries.len()).filter(|&i| self.entries[i] == NodeResidual::Degenerate).collect()
    }

    /// Max `|r|` over valued nodes whose coordinates satisfy `keep`; 0 if none.
    pub fn max_abs_where(&self, keep: impl Fn(Point) -> bool) -> f64 {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(id, r)| match r {
                NodeResidual::Value(v) if keep(self.domain.point(id)) => Some(v.abs()),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_where(|_| true)
    }
}

/// Weak-form residual divided by the lumped node area.
///
/// Assembled on the anti-diagonal triangulation, so it measures consistency
/// of a field independently of the splitting the solver optimizes on.
pub fn residual_mse(field: &ScalarField) -> Residual {
    let domain = field.domain().clone();
    let mesh = Mesh::new(&domain, Diagonal::Anti);
    let u = field.values();
    let full_star = if domain.dim() == 1 { 2 } else { 6 };
    let mut flux = vec![0.0; domain.len()];
    let mut mass = vec![0.0; domain.len()];
    let mut count = vec![0usize; domain.len()];
    let mut degenerate = vec![false; domain.len()];
    for e in &mesh.elements {
        let p = e.gradient(u);
        let s = norm(p);
        let bad = s > DEGENERATE;
        let w = if bad { 0.0 } else { e.measure / libm::sqrt(1.0 - s * s) };
        for v in 0..e.len {
            let id = e.nodes[v];
            count[id] += 1;
            mass[id] += e.measure / e.len as f64;
            degenerate[id] |= bad;
            flux[id] += w * (p[0] * e.grad[v][0] + p[1] * e.grad[v][1]);
        }
    }
    let entries = (0..domain.len())
        .map(|id| {
            if domain.is_boundary(id) || count[id] < full_star {
                NodeResidual::NotInterior
            } else if degenerate[id] {
                NodeResidual::Degenerate
            } else {
                NodeResidual::Value(-flux[id] / mass[id])
            }
        })
        .collect();
    Residual { domain, entries }
}
