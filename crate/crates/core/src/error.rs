use alloc::string::String;

use crate::Point;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("node {0:?} is not an active node of the domain")]
    InactiveNode([i32; 2]),
    #[error("point ({}, {}) is outside the triangulated region", .0[0], .0[1])]
    OutsideDomain(Point),
    #[error("field is not weakly spacelike: element {element} has gradient norm {norm}")]
    Infeasible { element: usize, norm: f64 },
    #[error("empty K: boundary data is not admissible at grid scale (Lipschitz excess {excess:e})")]
    EmptyK { excess: f64 },
    #[error("fields live on different domains")]
    MismatchedDomains,
    #[error("linear solve failed: matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),
    #[error("bisection failed: value at theta={theta_lo} is {value_lo} but at theta={theta_hi} it is {value_hi}")]
    Bisection {
        theta_lo: f64,
        theta_hi: f64,
        value_lo: f64,
        value_hi: f64,
    },
}
