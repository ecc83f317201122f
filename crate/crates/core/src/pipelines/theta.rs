use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{norm, BoundaryData, GridDomain, ScalarField};
use crate::solver::{DiscreteProblem, Init, SolveReport, Solver, SolverConfig};
use crate::{Error, Region, Result};

/// `E2 = (0, 1)`.
pub const E2: crate::Point = [0.0, 1.0];

/// The one-parameter family of problems on a punctured ball `B_k \ {0}` with
/// data `theta x2 - (1 - theta) |x|` on the outer staircase and `u(0) = 0`.
///
/// All members share one domain and one factorization pattern.
pub struct ThetaFamily {
    k: u32,
    domain: Arc<GridDomain>,
    solver: Solver,
}

impl ThetaFamily {
    pub fn new(k: u32, h: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
        }
        let region = Region::PuncturedBall {
            center: vec![0.0, 0.0],
            radius: k as f64,
            puncture: Some(vec![0.0, 0.0]),
            punctures: vec![],
        };
        let domain = Arc::new(GridDomain::make(region, h)?);
        let probe = Self::build(&domain, 0.0)?;
        let solver = Solver::for_problem(&probe)?;
        Ok(ThetaFamily { k, domain, solver })
    }

    fn build(domain: &Arc<GridDomain>, theta: f64) -> Result<DiscreteProblem> {
        // |x| ~ k on the staircase; using |x| keeps the data 1-Lipschitz node to node.
        // Written as -|x| + theta (x2 + |x|) so the data is monotone in theta in floating point.
        let g = BoundaryData::from_fn(domain, |x| -norm(x) + theta * (x[1] + norm(x)))?;
        let pins = domain.punctures().iter().map(|&(_, id)| (id, 0.0)).collect();
        DiscreteProblem::new(domain.clone(), g, pins)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }

    pub fn problem(&self, theta: f64) -> Result<DiscreteProblem> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [0, 1], got {theta}")));
        }
        Self::build(&self.domain, theta)
    }

    pub fn solve(&self, theta: f64, config: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
        config.validate()?;
        self.solver.solve(&self.problem(theta)?, config)
    }
}

pub fn solve_theta(k: u32, theta: f64, h: f64, config: &SolverConfig) -> Result<(ScalarField, SolveReport)> {
    ThetaFamily::new(k, h)?.solve(theta, config)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub theta: f64,
    /// `w(e2)` of the solution.
    pub value: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct ThetaSearch {
    pub k: u32,
    pub theta: f64,
    pub value: f64,
    pub field: ScalarField,
    pub report: SolveReport,
    /// Every solve in evaluation order.
    pub samples: Vec<ThetaSample>,
}

/// Root of `theta -> w(e2)` on `[0, 1]`, with optional first guess.
///
/// The bracket starts from the endpoint identities `w(e2) = -1` at `theta = 0` and
/// `w(e2) = 1` at `theta = 1`, and is refined by the Illinois variant of regula falsi.
/// After the first solve each solve starts from the previous field and runs only the
/// last stage of the schedule.
pub fn find_theta_in(family: &ThetaFamily, tol: f64, config: &SolverConfig, guess: Option<f64>) -> Result<ThetaSearch> {
    config.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let noise = 2.0 * config.stationarity_tol;
    let warm_schedule = vec![*config.delta_schedule.last().unwrap()];
    let (mut lo, mut hi) = ((0.0, -1.0), (1.0, 1.0));
    // unscaled bracket values for the monotonicity check
    let (mut lo_value, mut hi_value) = (lo.1, hi.1);
    let mut samples = Vec::new();
    let mut last: Option<(ScalarField, SolveReport)>;
    // solved fields on either side of the root, for interpolated starts
    let mut fields: Vec<(f64, Vec<f64>)> = Vec::new();
    // which end was kept on the previous step: -1 lo, +1 hi
    let mut kept = 0i8;
    let mut theta = guess.filter(|g| *g > 0.0 && *g < 1.0).unwrap_or(0.5);
    for _ in 0..100 {
        let cfg = match warm_start(family, &fields, theta) {
            None => config.clone(),
            Some(init) => SolverConfig { delta_schedule: warm_schedule.clone(), init: Init::Custom(init), ..config.clone() },
        };
        let (u, report) = family.solve(theta, &cfg)?;
        fields.push((theta, u.values().to_vec()));
        if fields.len() > 2 {
            // keep the two samples closest to the new one
            fields.sort_by(|a, b| (a.0 - theta).abs().total_cmp(&(b.0 - theta).abs()));
            fields.truncate(2);
        }
        let value = u.evaluate(E2)?;
        samples.push(ThetaSample { theta, value, iterations: report.iterations() });
        if value < lo_value - noise || value > hi_value + noise {
            return Err(Error::Bisection { theta_lo: lo.0, theta_hi: hi.0, value_lo: lo_value, value_hi: hi_value });
        }
        last = Some((u, report));
        if value.abs() <= tol || hi.0 - lo.0 <= 1e-15 {
            let (field, report) = last.unwrap();
            if value.abs() > tol {
                return Err(Error::Bisection { theta_lo: lo.0, theta_hi: hi.0, value_lo: lo_value, value_hi: hi_value });
            }
            return Ok(ThetaSearch { k: family.k, theta, value, field, report, samples });
        }
        let value = value.clamp(lo_value, hi_value);
        if value < 0.0 {
            lo = (theta, value);
            lo_value = value;
            if kept == 1 {
                hi.1 *= 0.5;
            }
            kept = 1;
        } else {
            hi = (theta, value);
            hi_value = value;
            if kept == -1 {
                lo.1 *= 0.5;
            }
            kept = -1;
        }
        theta = (lo.0 * hi.1 - hi.0 * lo.1) / (hi.1 - lo.1);
        if !(theta > lo.0 && theta < hi.0) {
            theta = 0.5 * (lo.0 + hi.0);
        }
    }
    Err(Error::Bisection { theta_lo: lo.0, theta_hi: hi.0, value_lo: lo_value, value_hi: hi_value })
}

/// Starting field for `theta` from earlier solutions.
///
/// The data is affine in theta, so interpolating two solved fields (or shifting one
/// by the data derivative `x2 + |x|`) matches the new data exactly.
fn warm_start(family: &ThetaFamily, fields: &[(f64, Vec<f64>)], theta: f64) -> Option<Vec<f64>> {
    match fields {
        [] => None,
        [(t, u)] => {
            let d = family.domain();
            Some(u.iter().enumerate().map(|(i, v)| {
                let x = d.point(i);
                v + (theta - t) * (x[1] + norm(x))
            }).collect())
        }
        [(ta, ua), (tb, ub), ..] => {
            let s = (theta - ta) / (tb - ta);
            Some(ua.iter().zip(ub).map(|(a, b)| a + s * (b - a)).collect())
        }
    }
}

pub fn find_theta(k: u32, h: f64, tol: f64, config: &SolverConfig) -> Result<ThetaSearch> {
    find_theta_in(&ThetaFamily::new(k, h)?, tol, config, None)
}
