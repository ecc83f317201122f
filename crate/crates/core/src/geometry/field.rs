use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::domain::GridDomain;
use super::mesh::{Diagonal, Mesh};
use super::norm;
use crate::{Error, Point, Result};

/// Piecewise-linear function given by its values at the active nodes.
#[derive(Clone, Debug)]
pub struct ScalarField {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} active nodes",
                values.len(),
                domain.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at node {:?}", domain.lattice(i))));
        }
        Ok(Self { domain, values })
    }

    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = domain.points().map(f).collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, id: usize) -> f64 {
        self.values[id]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_domain(&self, other: &ScalarField) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    /// Max-norm distance to another field on the same domain.
    pub fn max_diff(&self, other: &ScalarField) -> Result<f64> {
        if !self.same_domain(other) {
            return Err(Error::MismatchedDomains);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
    }

    /// Piecewise-linear interpolation on the main-diagonal triangulation; exact at nodes.
    pub fn evaluate(&self, x: Point) -> Result<f64> {
        let (nodes, w) = self.domain.locate(x).ok_or(Error::OutsideDomain(x))?;
        Ok(w[0] * self.values[nodes[0]] + w[1] * self.values[nodes[1]] + w[2] * self.values[nodes[2]])
    }

    /// Samples `f(x, self(x))` at every node of `target`.
    pub fn sample_onto(&self, target: Arc<GridDomain>, f: impl Fn(Point) -> Point) -> Result<ScalarField> {
        let mut values = Vec::with_capacity(target.len());
        for x in target.points() {
            values.push(self.evaluate(f(x))?);
        }
        ScalarField::new(target, values)
    }
}

/// Dirichlet values aligned with [`GridDomain::boundary_nodes`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    values: Vec<f64>,
    label: Option<String>,
}

impl BoundaryData {
    pub fn new(domain: &GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.boundary_nodes().len() {
            return Err(Error::InvalidArgument(format!(
                "boundary data has {} values for {} boundary nodes",
                values.len(),
                domain.boundary_nodes().len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(String::from("boundary data is not finite")));
        }
        Ok(Self { values, label: None })
    }

    /// Evaluates a closed-form generator at the boundary node coordinates.
    pub fn from_fn(domain: &GridDomain, f: impl Fn(Point) -> f64) -> Result<Self> {
        let values = domain.boundary_nodes().iter().map(|&id| f(domain.point(id))).collect();
        Self::new(domain, values)
    }

    /// Restriction of a field to its own boundary nodes.
    pub fn from_field(field: &ScalarField) -> Self {
        let values = field.domain().boundary_nodes().iter().map(|&id| field.value(id)).collect();
        Self { values, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a boundary node id.
    pub fn at(&self, domain: &GridDomain, id: usize) -> Option<f64> {
        domain.boundary_index(id).map(|k| self.values[k])
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v + c).collect(), label: self.label.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacelikeCheck {
    pub spacelike: bool,
    pub max_norm: f64,
}

/// Largest element gradient norm and the verdict `max <= 1 + 1e-12`.
pub fn check_weakly_spacelike(field: &ScalarField) -> SpacelikeCheck {
    let mesh = Mesh::new(field.domain(), Diagonal::Main);
    let max_norm = mesh
        .elements
        .iter()
        .map(|e| norm(e.gradient(field.values())))
        .fold(0.0, f64::max);
    SpacelikeCheck { spacelike: max_norm <= 1.0 + 1e-12, max_norm }
}

/// Blowdown rescaling `x -> u(r x) / r` sampled on the target nodes.
pub fn rescale(field: &ScalarField, r: f64, target: Arc<GridDomain>) -> Result<ScalarField> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("rescaling factor must be positive, got {r}")));
    }
    let mut values = Vec::with_capacity(target.len());
    for x in target.points() {
        values.push(field.evaluate([r * x[0], r * x[1]])? / r);
    }
    ScalarField::new(target, values)
}
