use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::theta::{find_theta_in, ThetaFamily, ThetaSample, E2};
use super::Window;
use crate::geometry::{GridDomain, ScalarField};
use crate::solver::{SolveReport, SolverConfig};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExampleWConfig {
    pub k_schedule: Vec<u32>,
    pub h: f64,
    /// Target for `|w(e2)|` in each theta search.
    pub bisection_tol: f64,
    pub window: Window,
    pub solver: SolverConfig,
}

impl Default for ExampleWConfig {
    fn default() -> Self {
        ExampleWConfig {
            k_schedule: vec![2, 4, 8],
            h: 0.05,
            bisection_tol: 1e-6,
            window: Window::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl ExampleWConfig {
    pub fn validate(&self) -> Result<()> {
        let ks = &self.k_schedule;
        if ks.is_empty() || ks[0] < 2 || ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!("k schedule must be increasing integers >= 2: {ks:?}")));
        }
        if !(self.h > 0.0) || !(self.bisection_tol > 0.0) {
            return Err(Error::InvalidArgument("h and the bisection tolerance must be positive".into()));
        }
        self.window.validate()?;
        let k = *ks.last().unwrap() as f64;
        if self.window.max_norm() >= k {
            return Err(Error::InvalidArgument(format!("window {:?} does not fit in B_{k}", self.window)));
        }
        self.solver.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KDiagnostics {
    pub k: u32,
    pub theta: f64,
    pub w_e2: f64,
    pub samples: Vec<ThetaSample>,
    /// `max |w(t e2) - t|` over `t` in `[-k + 1, 0]`.
    pub ray_error: f64,
    /// `max (w - x2)` over the covered window nodes.
    pub above_plane: f64,
    /// Sup over the shared window of the difference to the previous k.
    pub difference: Option<f64>,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct ExampleW {
    pub config: ExampleWConfig,
    /// Finest field restricted to the window grid.
    pub window_field: ScalarField,
    /// Finest field on its whole ball.
    pub field: ScalarField,
    pub per_k: Vec<KDiagnostics>,
    /// Window differences between consecutive k, nonincreasing when stabilizing.
    pub stabilization: Vec<f64>,
    pub stabilized: bool,
    pub warnings: Vec<String>,
}

impl ExampleW {
    pub fn theta(&self) -> f64 {
        self.per_k.last().unwrap().theta
    }
}

/// Sup of `|u - v|` over window nodes covered by both fields.
pub(crate) fn window_difference(window: &GridDomain, u: &ScalarField, v: &ScalarField) -> Result<f64> {
    let mut worst = 0.0f64;
    for x in window.points() {
        if u.domain().covers(x) && v.domain().covers(x) {
            worst = worst.max((u.evaluate(x)? - v.evaluate(x)?).abs());
        }
    }
    Ok(worst)
}

fn ray_error(u: &ScalarField, k: u32, h: f64) -> Result<f64> {
    let n = libm::ceil((k - 1) as f64 / h) as usize;
    let mut worst = 0.0f64;
    for m in 0..=n {
        let t = -((k - 1) as f64) * m as f64 / n as f64;
        worst = worst.max((u.evaluate([0.0, t])? - t).abs());
    }
    Ok(worst)
}

/// Exhaustion over the k schedule, each level solved at its own `theta(k)`.
///
/// Each search is seeded with the previous level's `theta`.
pub fn build_example_w(config: &ExampleWConfig) -> Result<ExampleW> {
    config.validate()?;
    let h = config.h;
    let window = config.window.domain(h)?;
    let mut per_k: Vec<KDiagnostics> = Vec::new();
    let mut previous: Option<ScalarField> = None;
    let mut warnings = Vec::new();
    for &k in &config.k_schedule {
        let family = ThetaFamily::new(k, h)?;
        let guess = per_k.last().map(|d| d.theta);
        let search = find_theta_in(&family, config.bisection_tol, &config.solver, guess)?;
        let u = search.field;
        let mut above = f64::NEG_INFINITY;
        for x in window.points().filter(|&x| u.domain().covers(x)) {
            above = above.max(u.evaluate(x)? - x[1]);
        }
        let difference = match &previous {
            Some(v) => Some(window_difference(&window, &u, v)?),
            None => None,
        };
        if !search.report.warnings.is_empty() {
            warnings.push(format!("k={k}: solver warnings {:?}", search.report.warnings));
        }
        per_k.push(KDiagnostics {
            k,
            theta: search.theta,
            w_e2: u.evaluate(E2)?,
            samples: search.samples,
            ray_error: ray_error(&u, k, h)?,
            above_plane: above,
            difference,
            report: search.report,
        });
        previous = Some(u);
    }
    let field = previous.unwrap();
    let stabilization: Vec<f64> = per_k.iter().filter_map(|d| d.difference).collect();
    let stabilized = stabilization.windows(2).all(|w| w[1] <= w[0]);
    if !stabilized {
        warnings.push(format!("window differences are not decreasing: {stabilization:?}"));
    }
    let window_field = field.sample_onto(Arc::new(window), |x| x)?;
    Ok(ExampleW { config: config.clone(), window_field, field, per_k, stabilization, stabilized, warnings })
}
