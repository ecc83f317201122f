//! Discrete area maximization on the fixed main-diagonal triangulation.
//!
//! Each stage of the δ-schedule maximizes a smooth concave relaxation of the
//! energy by damped Newton iterations; a final node-correction pass pushes
//! triangle slopes back into the closed unit ball.

mod integrand;
mod newton;
mod residual;
mod sparse;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use newton::Solver;
pub use residual::{residual_mse, NodeResidual, Residual};

use crate::geometry::{norm, BoundaryData, Diagonal, GridDomain, Mesh, ScalarField};
use crate::{Error, Result};

/// Starting field for the first stage.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// McShane extension of the fixed data.
    #[default]
    Extension,
    /// Zero at every free node.
    ZeroInterior,
    /// One value per active node; fixed nodes are overwritten by the data.
    Custom(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub delta_schedule: Vec<f64>,
    pub max_iters: usize,
    pub stationarity_tol: f64,
    pub energy_stall_tol: f64,
    /// Newton iterations over which the relative energy stall is measured.
    pub stall_window: usize,
    pub init: Init,
    pub projection_sweeps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            max_iters: 50_000,
            stationarity_tol: 1e-9,
            energy_stall_tol: 1e-12,
            stall_window: 5,
            init: Init::Extension,
            projection_sweeps: 200,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.delta_schedule;
        if s.is_empty() {
            return Err(Error::InvalidArgument("empty delta schedule".into()));
        }
        if s.iter().any(|&d| !(d > 0.0 && d < 1.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument(format!("delta schedule must be strictly decreasing in (0, 1): {s:?}")));
        }
        if !(self.stationarity_tol >= 0.0) || !(self.energy_stall_tol >= 0.0) || self.stall_window == 0 {
            return Err(Error::InvalidArgument("tolerances must be nonnegative and the stall window positive".into()));
        }
        Ok(())
    }

    /// Same settings with a different starting field.
    pub fn with_init(&self, init: Init) -> Self {
        SolverConfig { init, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Stationary,
    EnergyStall,
    LineSearch,
    MaxIters,
    NoFreeNodes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub delta: f64,
    pub iterations: usize,
    /// Relaxed stage energy at exit.
    pub energy: f64,
    pub grad_norm: f64,
    pub stop: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    StageNotConverged { delta: f64, iterations: usize, grad_norm: f64 },
    /// No node-value correction could bring every slope into the unit ball.
    GridInfeasible { max_norm: f64, elements: usize },
    DiagonalShift { shift: f64 },
    Custom { message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// True energy, with slopes beyond one contributing zero.
    pub energy: f64,
    pub stages: Vec<StageReport>,
    /// Gradient norm of the last stage problem before projection.
    pub grad_norm: f64,
    pub max_gradient_norm: f64,
    pub feasible: bool,
    pub projection_sweeps: usize,
    pub warnings: Vec<Warning>,
    pub wall_time_s: Option<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }
}

/// Boundary data plus extra pinned `(node, value)` pairs.
#[derive(Clone, Debug)]
pub struct DiscreteProblem {
    pub domain: Arc<GridDomain>,
    pub boundary: BoundaryData,
    pub pinned: Vec<(usize, f64)>,
}

impl DiscreteProblem {
    pub fn new(domain: Arc<GridDomain>, boundary: BoundaryData, pinned: Vec<(usize, f64)>) -> Result<Self> {
        if boundary.values().len() != domain.boundary_nodes().len() {
            return Err(Error::InvalidArgument("boundary data does not match the boundary nodes".into()));
        }
        for &(id, v) in &pinned {
            if id >= domain.len() || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("bad pinned entry ({id}, {v})")));
            }
        }
        Ok(DiscreteProblem { domain, boundary, pinned })
    }

    pub fn fixed_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.domain.len()];
        for &id in self.domain.boundary_nodes() {
            mask[id] = true;
        }
        for &(id, _) in &self.pinned {
            mask[id] = true;
        }
        mask
    }

    /// `(node, value)` for every fixed node; pinned entries override boundary data.
    pub fn fixed_values(&self) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> =
            self.domain.boundary_nodes().iter().copied().zip(self.boundary.values().iter().copied()).collect();
        for &(id, v) in &self.pinned {
            match out.iter_mut().find(|(n, _)| *n == id) {
                Some(slot) => slot.1 = v,
                None => out.push((id, v)),
            }
        }
        out
    }

    /// Grid-scale admissibility: excess of the data over the intrinsic 1-Lipschitz bound.
    pub fn admissibility_excess(&self) -> f64 {
        crate::geometry::extension_values(&self.domain, &self.fixed_values()).1
    }
}

impl Solver {
    pub fn for_problem(problem: &DiscreteProblem) -> Result<Self> {
        Solver::new(problem.domain.clone(), problem.fixed_mask())
    }

    /// Solves `problem`, which must share this solver's domain and fixed-node set.
    pub fn solve(&self, problem: &DiscreteProblem, config: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
        if !Arc::ptr_eq(self.domain(), &problem.domain) && **self.domain() != *problem.domain {
            return Err(Error::MismatchedDomains);
        }
        let fixed = problem.fixed_values();
        let mask = problem.fixed_mask();
        if (0..mask.len()).any(|id| mask[id] && !self.is_fixed(id)) || self.free_nodes().iter().any(|&id| mask[id]) {
            return Err(Error::InvalidArgument("problem fixes a different node set than the solver".into()));
        }
        let (psi, excess) = crate::geometry::extension_values(&problem.domain, &fixed);
        if excess > 1e-12 {
            return Err(Error::EmptyK { excess });
        }
        let mut u = match &config.init {
            Init::Extension => psi,
            Init::ZeroInterior => vec![0.0; problem.domain.len()],
            Init::Custom(v) => {
                if v.len() != problem.domain.len() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidArgument("custom init must give a finite value per node".into()));
                }
                v.clone()
            }
        };
        // nodes fixed only because no element touches them keep their starting value
        for &(id, v) in &fixed {
            u[id] = v;
        }
        let report = self.run(&mut u, config)?;
        Ok((ScalarField::new(problem.domain.clone(), u)?, report))
    }
}

/// One-shot solve; see [`Solver`] for repeated solves on the same pattern.
pub fn solve(problem: &DiscreteProblem, config: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    config.validate()?;
    Solver::for_problem(problem)?.solve(problem, config)
}

/// Area energy of a weakly spacelike field on the main-diagonal triangulation.
pub fn energy(field: &ScalarField) -> Result<f64> {
    let mesh = Mesh::new(field.domain(), Diagonal::Main);
    for (element, e) in mesh.elements.iter().enumerate() {
        let n = norm(e.gradient(field.values()));
        if n > 1.0 + 1e-12 {
            return Err(Error::Infeasible { element, norm: n });
        }
    }
    Ok(newton::clamped_energy(&mesh, field.values()))
}

/// Continuum maximizer on an interval: the affine interpolant of the end values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine1d {
    pub slope: f64,
    pub intercept: f64,
    pub energy: f64,
}

impl Affine1d {
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn solve_1d(a: f64, b: f64, ua: f64, ub: f64) -> Result<Affine1d> {
    if !(b > a) || !ua.is_finite() || !ub.is_finite() {
        return Err(Error::InvalidArgument(format!("bad interval data ({a}, {b}, {ua}, {ub})")));
    }
    let excess = (ub - ua).abs() - (b - a);
    if excess > 1e-12 * (b - a) {
        return Err(Error::EmptyK { excess });
    }
    let slope = ((ub - ua) / (b - a)).clamp(-1.0, 1.0);
    Ok(Affine1d { slope, intercept: ua - slope * a, energy: (b - a) * libm::sqrt(1.0 - slope * slope) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// `u <= v` on every boundary node of the shared domain.
    pub pinned_ordered: bool,
    /// `max (u - v)^+` over all nodes.
    pub max_violation: f64,
    /// The comparison principle is consistent with the pair at tolerance `1e-7`.
    pub holds: bool,
}

pub fn comparison_check(u: &ScalarField, v: &ScalarField) -> Result<Comparison> {
    if !u.same_domain(v) {
        return Err(Error::MismatchedDomains);
    }
    let d = u.domain();
    let pinned_ordered = d.boundary_nodes().iter().all(|&id| u.value(id) <= v.value(id));
    let max_violation = u.values().iter().zip(v.values()).fold(0.0f64, |m, (a, b)| m.max(a - b));
    Ok(Comparison { pinned_ordered, max_violation, holds: !pinned_ordered || max_violation <= 1e-7 })
}

