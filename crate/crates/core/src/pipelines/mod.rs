//! End-to-end constructions: the singular example built by a theta search and
//! exhaustion, exterior Dirichlet solves between barriers, and the three-solution
//! comparison on the plane minus two points.

mod example;
mod exterior;
mod multiplicity;
mod theta;

use alloc::format;
use alloc::vec;

use serde::{Deserialize, Serialize};

pub use example::{build_example_w, ExampleW, ExampleWConfig, KDiagnostics};
pub use exterior::{
    barrier_psi, solve_exterior, Barrier, DataFn, ExteriorMode, ExteriorProblem, ExteriorSolution, Obstacle,
    RadiusDiagnostics,
};
pub use multiplicity::{
    breve_problem, multiplicity_demo, multiplicity_fields, multiplicity_report, FieldSummary, Multiplicity,
    MultiplicityReport, PairDifference, NAMES,
};
pub use theta::{find_theta, find_theta_in, solve_theta, ThetaFamily, ThetaSample, ThetaSearch, E2};

use crate::geometry::{norm, GridDomain};
use crate::{Error, Point, Region, Result};

/// Axis-aligned box on which stabilization and comparisons are measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: Point,
    pub hi: Point,
}

impl Default for Window {
    fn default() -> Self {
        Window { lo: [-2.0, -2.0], hi: [2.0, 2.0] }
    }
}

impl Window {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo[0] < self.hi[0] && self.lo[1] < self.hi[1]) {
            return Err(Error::InvalidArgument(format!("window {self:?} is empty")));
        }
        Ok(())
    }

    /// Largest `|x|` over the box.
    pub fn max_norm(&self) -> f64 {
        let (x, y) = (self.lo[0].abs().max(self.hi[0].abs()), self.lo[1].abs().max(self.hi[1].abs()));
        norm([x, y])
    }

    pub fn contains(&self, x: Point) -> bool {
        (self.lo[0]..=self.hi[0]).contains(&x[0]) && (self.lo[1]..=self.hi[1]).contains(&x[1])
    }

    /// The window as a grid of spacing `h`.
    pub fn domain(&self, h: f64) -> Result<GridDomain> {
        GridDomain::make(Region::Box { lo: vec![self.lo[0], self.lo[1]], hi: vec![self.hi[0], self.hi[1]] }, h)
    }
}
