//! Area-maximizing weakly spacelike graphs over planar grids.
//!
//! A graph `t = u(x)` in Lorentz-Minkowski space is weakly spacelike when
//! `|Du| <= 1`. This crate discretizes `u` as a piecewise-linear field on a
//! masked uniform grid, maximizes the area functional `sum |T| sqrt(1 - |p_T|^2)`
//! over such fields with prescribed Dirichlet values, and provides the
//! structural diagnostics (light segments, blowdowns, cone and hyperplane
//! classifiers) and constructive pipelines built on top of the solver.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line, and wall-clock timing live in the `maxarea` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod geometry;
pub mod pipelines;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};
pub use geometry::{BoundaryData, DomainSpec, GridDomain, NodeKind, Region, ScalarField};

/// A point of the plane. One-dimensional domains use the first coordinate and keep the second at zero.
pub type Point = [f64; 2];
