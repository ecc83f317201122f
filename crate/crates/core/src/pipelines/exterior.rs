use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::example::window_difference;
use super::Window;
use crate::geometry::{
    check_weakly_spacelike, convex_hull, dist, extension_values, graph_distances, hull_contains, norm, BoundaryData,
    GridDomain, NodeKind, ScalarField, SpacelikeCheck,
};
use crate::solver::{solve, DiscreteProblem, SolveReport, SolverConfig};
use crate::structure::{exterior_trichotomy, ClassificationReport, ClassifyOptions, Extrema};
use crate::{Error, Point, Region, Result};

/// Dirichlet data on the obstacle boundary.
pub type DataFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Obstacle {
    Points { points: Vec<Point> },
    Circle { center: Point, radius: f64 },
}

impl Obstacle {
    /// Points whose convex hull is conv(A); circles are sampled at 256 points.
    pub fn hull_points(&self) -> Vec<Point> {
        match self {
            Obstacle::Points { points } => points.clone(),
            Obstacle::Circle { center, radius } => (0..256)
                .map(|j| {
                    let t = 2.0 * core::f64::consts::PI * j as f64 / 256.0;
                    [center[0] + radius * libm::cos(t), center[1] + radius * libm::sin(t)]
                })
                .collect(),
        }
    }

    /// A point of conv(A): the centroid of the points, or the circle center.
    pub fn centroid(&self) -> Point {
        match self {
            Obstacle::Points { points } => {
                let n = points.len() as f64;
                let s = points.iter().fold([0.0; 2], |s, p| [s[0] + p[0], s[1] + p[1]]);
                [s[0] / n, s[1] / n]
            }
            Obstacle::Circle { center, .. } => *center,
        }
    }

    fn extent(&self) -> f64 {
        match self {
            Obstacle::Points { points } => points.iter().map(|&p| norm(p)).fold(0.0, f64::max),
            Obstacle::Circle { center, radius } => norm(*center) + radius,
        }
    }

    /// `B_r \ A`.
    pub fn region(&self, r: f64) -> Region {
        match self {
            Obstacle::Points { points } => Region::PuncturedBall {
                center: vec![0.0, 0.0],
                radius: r,
                puncture: None,
                punctures: points.iter().map(|p| p.to_vec()).collect(),
            },
            Obstacle::Circle { center, radius } => Region::Annulus { center: center.to_vec(), r_in: *radius, r_out: r },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExteriorMode {
    /// Solutions between `c- + |x - x0|` and `c+ + |x - x0|`.
    LowerCone { x0: Point },
    /// Solutions between `c- - |x - x0|` and `c+ - |x - x0|`.
    UpperCone { x0: Point },
    /// Solutions between `c- + a.x` and `c+ + a.x`, `|a| = 1`.
    Hyperplane { a: Point },
}

impl ExteriorMode {
    /// The comparison function whose offsets bound the solution.
    pub fn model(&self, x: Point) -> f64 {
        match *self {
            ExteriorMode::LowerCone { x0 } => dist(x, x0),
            ExteriorMode::UpperCone { x0 } => -dist(x, x0),
            ExteriorMode::Hyperplane { a } => a[0] * x[0] + a[1] * x[1],
        }
    }
}

#[derive(Clone)]
pub struct ExteriorProblem {
    pub obstacle: Obstacle,
    pub g: DataFn,
    pub mode: ExteriorMode,
    pub outer_radii: Vec<f64>,
    pub h: f64,
    pub window: Window,
    pub solver: SolverConfig,
}

impl fmt::Debug for ExteriorProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExteriorProblem")
            .field("obstacle", &self.obstacle)
            .field("mode", &self.mode)
            .field("outer_radii", &self.outer_radii)
            .field("h", &self.h)
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

impl ExteriorProblem {
    /// Outer radii 2, 4, 8 and the default window and solver settings.
    pub fn new(obstacle: Obstacle, g: DataFn, mode: ExteriorMode, h: f64) -> Self {
        ExteriorProblem {
            obstacle,
            g,
            mode,
            outer_radii: vec![2.0, 4.0, 8.0],
            h,
            window: Window::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn with_radii(mut self, radii: Vec<f64>) -> Self {
        self.outer_radii = radii;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) {
            return Err(Error::InvalidArgument(format!("h must be positive, got {}", self.h)));
        }
        let r = &self.outer_radii;
        if r.is_empty() || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!("outer radii must be increasing: {r:?}")));
        }
        match &self.obstacle {
            Obstacle::Points { points } if points.is_empty() => {
                return Err(Error::InvalidArgument("obstacle needs at least one point".into()))
            }
            Obstacle::Circle { radius, .. } if !(*radius > 0.0) => {
                return Err(Error::InvalidArgument("obstacle circle needs a positive radius".into()))
            }
            _ => {}
        }
        if self.obstacle.extent() + 2.0 * self.h >= r[0] {
            return Err(Error::InvalidArgument(format!("obstacle does not fit inside B_{}", r[0])));
        }
        match self.mode {
            ExteriorMode::Hyperplane { a } if (norm(a) - 1.0).abs() > 1e-9 => {
                return Err(Error::InvalidArgument(format!("hyperplane direction {a:?} must be a unit vector")));
            }
            ExteriorMode::LowerCone { x0 } | ExteriorMode::UpperCone { x0 } => {
                let hull = convex_hull(&self.obstacle.hull_points())?;
                if !hull_contains(&hull, x0, 1e-9) {
                    return Err(Error::InvalidArgument(format!("cone vertex {x0:?} is not in conv(A)")));
                }
            }
            _ => {}
        }
        self.window.validate()?;
        self.solver.validate()
    }

    fn x0(&self) -> Point {
        match self.mode {
            ExteriorMode::LowerCone { x0 } | ExteriorMode::UpperCone { x0 } => x0,
            ExteriorMode::Hyperplane { .. } => self.obstacle.centroid(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Barrier {
    /// Outer data, defined on the whole domain.
    pub psi: ScalarField,
    pub c_plus: f64,
    pub c_minus: f64,
    pub spacelike: SpacelikeCheck,
    /// `psi` came from the Euclidean extension.
    pub euclidean: bool,
}

impl Barrier {
    pub fn lower(&self, mode: &ExteriorMode, x: Point) -> f64 {
        self.c_minus + mode.model(x)
    }

    pub fn upper(&self, mode: &ExteriorMode, x: Point) -> f64 {
        self.c_plus + mode.model(x)
    }
}

fn is_obstacle(d: &GridDomain, id: usize) -> bool {
    matches!(d.kind(id), NodeKind::Inner | NodeKind::Puncture(_))
}

/// `min_s (g(s) + |x - s|)` (`sign = 1`) or `max_s (g(s) - |x - s|)` (`sign = -1`) at every node.
fn euclidean_extension(domain: &GridDomain, sources: &[(usize, f64)], sign: f64) -> Vec<f64> {
    let pts: Vec<(Point, f64)> = sources.iter().map(|&(id, g)| (domain.point(id), sign * g)).collect();
    domain
        .points()
        .map(|x| sign * pts.iter().map(|&(s, g)| g + dist(x, s)).fold(f64::INFINITY, f64::min))
        .collect()
}

/// Outer boundary data `Psi` for `problem` on `domain` (a ball minus the obstacle).
///
/// `psi` is the McShane extension of `g` from the obstacle nodes, upper for the
/// upper-cone and hyperplane modes and lower for the lower-cone mode. It uses the
/// Euclidean distance, so `Psi` is 1-Lipschitz in the plane and not only along
/// lattice paths. Data that is not Euclidean 1-Lipschitz on the obstacle falls back
/// to the lattice-path distance.
pub fn barrier_psi(problem: &ExteriorProblem, domain: &Arc<GridDomain>) -> Result<Barrier> {
    let obstacle: Vec<(usize, f64)> =
        domain.obstacle_nodes().into_iter().map(|id| (id, (problem.g)(domain.point(id)))).collect();
    if obstacle.is_empty() {
        return Err(Error::InvalidArgument("domain has no obstacle nodes".into()));
    }
    let excess = extension_values(domain, &obstacle).1;
    if excess > 1e-12 {
        return Err(Error::EmptyK { excess });
    }
    let mode = problem.mode;
    let sign = if matches!(mode, ExteriorMode::LowerCone { .. }) { -1.0 } else { 1.0 };
    let mut psi = euclidean_extension(domain, &obstacle, sign);
    let mut euclidean = true;
    if obstacle.iter().any(|&(id, g)| (psi[id] - g).abs() > 1e-12) {
        let signed: Vec<(usize, f64)> = obstacle.iter().map(|&(id, g)| (id, sign * g)).collect();
        psi = graph_distances(domain, &signed).into_iter().map(|v| sign * v).collect();
        euclidean = false;
    }
    let (c_plus, c_minus) = obstacle.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), &(id, g)| {
        let v = g - mode.model(domain.point(id));
        (hi.max(v), lo.min(v))
    });
    let values: Vec<f64> = (0..domain.len())
        .map(|i| {
            let m = mode.model(domain.point(i));
            match mode {
                ExteriorMode::UpperCone { .. } => psi[i].min(c_plus + m),
                ExteriorMode::LowerCone { .. } => psi[i].max(c_minus + m),
                ExteriorMode::Hyperplane { .. } => psi[i].min(c_plus + m).max(c_minus + m),
            }
        })
        .collect();
    let psi = ScalarField::new(domain.clone(), values)?;
    let spacelike = check_weakly_spacelike(&psi);
    Ok(Barrier { psi, c_plus, c_minus, spacelike, euclidean })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusDiagnostics {
    pub radius: f64,
    pub nodes: usize,
    pub c_plus: f64,
    pub c_minus: f64,
    /// `max` over nodes of how far `u` leaves `[c- + m, c+ + m]`.
    pub squeeze_violation: f64,
    pub difference: Option<f64>,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct ExteriorSolution {
    pub field: ScalarField,
    pub barrier: Barrier,
    pub per_radius: Vec<RadiusDiagnostics>,
    pub stabilization: Vec<f64>,
    pub stabilized: bool,
    /// Extrema of `u - m` over the window nodes (`all`) and the obstacle nodes.
    pub window_extrema: Extrema,
    pub classification: ClassificationReport,
    pub warnings: Vec<String>,
}

/// Extrema of `f - model` over `nodes` of the window grid and over the obstacle nodes of `f`.
pub(crate) fn extrema_on(f: &ScalarField, window: &GridDomain, obstacle: &[usize], model: impl Fn(Point) -> f64) -> Result<Extrema> {
    let d = f.domain();
    let mut e = Extrema {
        max_all: f64::NEG_INFINITY,
        max_obstacle: f64::NEG_INFINITY,
        min_all: f64::INFINITY,
        min_obstacle: f64::INFINITY,
    };
    for &id in obstacle {
        let v = f.value(id) - model(d.point(id));
        e.max_obstacle = e.max_obstacle.max(v);
        e.min_obstacle = e.min_obstacle.min(v);
    }
    for x in window.points().filter(|&x| d.covers(x)) {
        let v = f.evaluate(x)? - model(x);
        e.max_all = e.max_all.max(v);
        e.min_all = e.min_all.min(v);
    }
    // the obstacle is part of the closed window region
    e.max_all = e.max_all.max(e.max_obstacle);
    e.min_all = e.min_all.min(e.min_obstacle);
    Ok(e)
}

/// Exhaustion by balls `B_r \ A` with `u = g` on the obstacle and `u = Psi` outside.
pub fn solve_exterior(problem: &ExteriorProblem) -> Result<ExteriorSolution> {
    problem.validate()?;
    let h = problem.h;
    let mode = problem.mode;
    let window = problem.window.domain(h)?;
    let tol = 5.0 * h;
    let mut per_radius = Vec::new();
    let mut warnings = Vec::new();
    let mut last: Option<(ScalarField, Barrier)> = None;
    for &r in &problem.outer_radii {
        let domain = Arc::new(GridDomain::make(problem.obstacle.region(r), h)?);
        let barrier = barrier_psi(problem, &domain)?;
        let values = domain
            .boundary_nodes()
            .iter()
            .map(|&id| if is_obstacle(&domain, id) { (problem.g)(domain.point(id)) } else { barrier.psi.value(id) })
            .collect();
        let data = BoundaryData::new(&domain, values)?;
        let problem_r = DiscreteProblem::new(domain.clone(), data, vec![])?;
        let (u, report) = solve(&problem_r, &problem.solver)?;
        let squeeze_violation = (0..domain.len())
            .map(|i| {
                let x = domain.point(i);
                (barrier.lower(&mode, x) - u.value(i)).max(u.value(i) - barrier.upper(&mode, x))
            })
            .fold(0.0, f64::max);
        if squeeze_violation > tol {
            warnings.push(format!("r={r}: solution leaves the barrier band by {squeeze_violation:.3e}"));
        }
        if !report.warnings.is_empty() {
            warnings.push(format!("r={r}: solver warnings {:?}", report.warnings));
        }
        let difference = match &last {
            Some((v, _)) => Some(window_difference(&window, &u, v)?),
            None => None,
        };
        per_radius.push(RadiusDiagnostics {
            radius: r,
            nodes: domain.len(),
            c_plus: barrier.c_plus,
            c_minus: barrier.c_minus,
            squeeze_violation,
            difference,
            report,
        });
        last = Some((u, barrier));
    }
    let (field, barrier) = last.unwrap();
    let stabilization: Vec<f64> = per_radius.iter().filter_map(|d| d.difference).collect();
    let stabilized = stabilization.windows(2).all(|w| w[1] <= w[0]);
    if !stabilized {
        warnings.push(format!("window differences are not decreasing: {stabilization:?}"));
    }
    let obstacle = field.domain().obstacle_nodes();
    let window_extrema = extrema_on(&field, &window, &obstacle, |x| mode.model(x))?;
    let classification =
        exterior_trichotomy(&field, &problem.obstacle.hull_points(), problem.x0(), &ClassifyOptions::default())?;
    Ok(ExteriorSolution { field, barrier, per_radius, stabilization, stabilized, window_extrema, classification, warnings })
}
