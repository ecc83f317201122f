//! Domains, discrete fields, intrinsic distances, and weakly spacelike extensions.

mod distance;
mod domain;
mod field;
mod hull;
mod mesh;

pub(crate) use distance::extension_values;
pub use distance::{graph_distances, intrinsic_distance, mcshane_extension, McShane};
pub use domain::{DomainSpec, GridDomain, Lattice, NodeKind, Region};
pub use field::{check_weakly_spacelike, rescale, BoundaryData, ScalarField, SpacelikeCheck};
pub use hull::{convex_hull, hull_contains};
pub use mesh::{Diagonal, Element, Mesh};

pub(crate) fn norm(p: crate::Point) -> f64 {
    libm::sqrt(p[0] * p[0] + p[1] * p[1])
}

pub(crate) fn dist(a: crate::Point, b: crate::Point) -> f64 {
    norm([a[0] - b[0], a[1] - b[1]])
}
