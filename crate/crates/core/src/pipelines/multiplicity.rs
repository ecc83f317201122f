use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::example::{build_example_w, ExampleW, ExampleWConfig};
use super::exterior::{extrema_on, solve_exterior, ExteriorMode, ExteriorProblem, ExteriorSolution, Obstacle};
use super::theta::E2;
use crate::geometry::{check_weakly_spacelike, ScalarField};
use crate::solver::SolverConfig;
use crate::structure::Extrema;
use crate::{Point, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub name: String,
    pub at_origin: f64,
    pub at_e2: f64,
    pub at_2e2: f64,
    pub at_minus_e2: f64,
    /// Extrema of `u - x2` over the window against its values at `0` and `e2`.
    pub plane_extrema: Extrema,
    pub max_attained: bool,
    pub min_attained: bool,
    pub max_gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDifference {
    pub first: String,
    pub second: String,
    pub max_difference: f64,
    pub at: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicityReport {
    pub h: f64,
    pub tolerance: f64,
    /// Pairs must differ by more than this somewhere on the window.
    pub distinct_threshold: f64,
    pub fields: Vec<FieldSummary>,
    pub pairs: Vec<PairDifference>,
    pub all_vanish_on_a: bool,
    pub pairwise_distinct: bool,
}

pub const NAMES: [&str; 3] = ["w", "w-tilde", "w-breve"];

/// Window samples of `w`, `w~(x1, x2) = -w(x1, 1 - x2)` and the hyperplane-mode solution.
pub fn multiplicity_fields(w: &ExampleW, w_breve: &ExteriorSolution) -> Result<[ScalarField; 3]> {
    let window = w.window_field.domain().clone();
    let field = &w.field;
    let mut tilde = Vec::with_capacity(window.len());
    for x in window.points() {
        tilde.push(-field.evaluate([x[0], 1.0 - x[1]])?);
    }
    let tilde = ScalarField::new(window.clone(), tilde)?;
    let breve = w_breve.field.sample_onto(window, |x| x)?;
    Ok([w.window_field.clone(), tilde, breve])
}

pub fn multiplicity_report(w: &ExampleW, w_breve: &ExteriorSolution) -> Result<MultiplicityReport> {
    let h = w.config.h;
    let tol = 5.0 * h;
    let fields = multiplicity_fields(w, w_breve)?;
    let window = fields[0].domain().clone();
    let a: Vec<usize> = [[0.0, 0.0], E2].iter().filter_map(|&p| window.node_near(p)).collect();
    let mut summaries = Vec::new();
    for (name, f) in NAMES.iter().zip(&fields) {
        let e = extrema_on(f, &window, &a, |x| x[1])?;
        summaries.push(FieldSummary {
            name: (*name).into(),
            at_origin: f.evaluate([0.0, 0.0])?,
            at_e2: f.evaluate(E2)?,
            at_2e2: f.evaluate([0.0, 2.0])?,
            at_minus_e2: f.evaluate([0.0, -1.0])?,
            plane_extrema: e,
            max_attained: e.max_attained(tol),
            min_attained: e.min_attained(tol),
            max_gradient_norm: check_weakly_spacelike(f).max_norm,
        });
    }
    let mut pairs = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let (mut best, mut at) = (0.0f64, [0.0; 2]);
            for (id, x) in window.points().enumerate() {
                let d = (fields[i].value(id) - fields[j].value(id)).abs();
                if d > best {
                    (best, at) = (d, x);
                }
            }
            pairs.push(PairDifference { first: NAMES[i].into(), second: NAMES[j].into(), max_difference: best, at });
        }
    }
    let distinct_threshold = 10.0 * h;
    Ok(MultiplicityReport {
        h,
        tolerance: tol,
        distinct_threshold,
        all_vanish_on_a: summaries.iter().all(|s| s.at_origin.abs() <= tol && s.at_e2.abs() <= tol),
        pairwise_distinct: pairs.iter().all(|p| p.max_difference > distinct_threshold),
        fields: summaries,
        pairs,
    })
}

/// The hyperplane-mode problem on `R^2 \ {0, e2}` with zero data and `a = e2`.
pub fn breve_problem(h: f64, radii: Vec<f64>, solver: SolverConfig) -> ExteriorProblem {
    let obstacle = Obstacle::Points { points: vec![[0.0, 0.0], E2] };
    let mut p = ExteriorProblem::new(obstacle, Arc::new(|_| 0.0), ExteriorMode::Hyperplane { a: E2 }, h).with_radii(radii);
    p.solver = solver;
    p
}

#[derive(Clone, Debug)]
pub struct Multiplicity {
    pub w: ExampleW,
    pub w_breve: ExteriorSolution,
    pub report: MultiplicityReport,
}

/// Builds all three solutions with the k schedule `2, 4, ..., k` at grid size `h`.
pub fn multiplicity_demo(h: f64, k: u32, solver: &SolverConfig) -> Result<Multiplicity> {
    let mut schedule = vec![2u32];
    while *schedule.last().unwrap() * 2 <= k {
        let next = schedule.last().unwrap() * 2;
        schedule.push(next);
    }
    if *schedule.last().unwrap() != k {
        schedule.push(k);
    }
    let config = ExampleWConfig { k_schedule: schedule.clone(), h, solver: solver.clone(), ..ExampleWConfig::default() };
    let w = build_example_w(&config)?;
    let radii = schedule.iter().map(|&k| k as f64).collect();
    let w_breve = solve_exterior(&breve_problem(h, radii, solver.clone()))?;
    let report = multiplicity_report(&w, &w_breve)?;
    Ok(Multiplicity { w, w_breve, report })
}
