use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::blowdown::{blowdown, BlowdownModel, BlowdownReport};
use super::singular::segments_through;
use crate::geometry::{convex_hull, dist, hull_contains, BoundaryData, GridDomain, ScalarField};
use crate::solver::{residual_mse, NodeResidual};
use crate::{Error, Point, Region, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `u <= a.x` and `u(ta) = t` for `t <= 0`.
    Below,
    /// `u >= a.x` and `u(ta) = t` for `t >= 0`.
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum Case {
    Maximal,
    UpperCone,
    LowerCone,
    HyperplaneAsymptotic { a: Point, side: Side },
    #[serde(rename = "trichotomy-i")]
    TrichotomyI,
    #[serde(rename = "trichotomy-ii")]
    TrichotomyII,
    #[serde(rename = "trichotomy-iii")]
    TrichotomyIII { a: Point },
    Undetermined,
}

/// Max and min of a comparison function over all nodes and over the obstacle nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub max_all: f64,
    pub max_obstacle: f64,
    pub min_all: f64,
    pub min_obstacle: f64,
}

impl Extrema {
    fn of(field: &ScalarField, obstacle: &[usize], f: impl Fn(Point, f64) -> f64) -> Self {
        let d = field.domain();
        let vals: Vec<f64> = (0..d.len()).map(|i| f(d.point(i), field.value(i))).collect();
        let fold = |it: &mut dyn Iterator<Item = f64>| {
            it.fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), v| (hi.max(v), lo.min(v)))
        };
        let (max_all, min_all) = fold(&mut vals.iter().copied());
        let (max_obstacle, min_obstacle) = fold(&mut obstacle.iter().map(|&i| vals[i]));
        Extrema { max_all, max_obstacle, min_all, min_obstacle }
    }

    pub fn max_attained(&self, tol: f64) -> bool {
        self.max_all - self.max_obstacle <= tol
    }

    pub fn min_attained(&self, tol: f64) -> bool {
        self.min_obstacle - self.min_all <= tol
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tolerance: f64,
    /// Max Eq. (1.1) residual over non-degenerate interior nodes (outside the hull of A for exterior fields).
    pub max_residual: f64,
    pub degenerate_nodes: usize,
    pub light_segments: usize,
    /// `max |u - |x - c||` with `c` the puncture or base point.
    pub cone_plus_error: f64,
    pub cone_minus_error: f64,
    pub one_sided_margin: Option<f64>,
    pub half_ray_error: Option<f64>,
    pub cone_minus_extrema: Option<Extrema>,
    pub cone_plus_extrema: Option<Extrema>,
    pub plane_extrema: Option<Extrema>,
    pub blowdown: Option<BlowdownReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(flatten)]
    pub case: Case,
    pub metrics: Metrics,
    /// Exterior fields only: the field is not maximal on the whole complement of conv(A).
    pub hypothesis_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyOptions {
    /// Tolerances are this multiple of h.
    pub tol_factor: f64,
    /// Blowdown radii; defaults to the quarter points of `[r_in, R]` (`r_in = 0` unless annular).
    pub radii: Option<Vec<f64>>,
    pub samples: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { tol_factor: 5.0, radii: None, samples: 64 }
    }
}

fn outer_extent(d: &GridDomain) -> f64 {
    if let Some(r) = d.outer_radius() {
        return r;
    }
    // boxes: largest centered disc
    let (lo, hi) = d.points().fold(([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]), |(lo, hi), x| {
        ([lo[0].min(x[0]), lo[1].min(x[1])], [hi[0].max(x[0]), hi[1].max(x[1])])
    });
    lo[0].abs().min(lo[1].abs()).min(hi[0]).min(hi[1])
}

fn radii_for(d: &GridDomain, opts: &ClassifyOptions) -> Vec<f64> {
    opts.radii.clone().unwrap_or_else(|| {
        let r = outer_extent(d);
        let lo = match d.region() {
            Region::Annulus { r_in, .. } => *r_in,
            _ => 0.0,
        };
        [0.25, 0.5, 0.75].iter().map(|t| lo + t * (r - lo)).collect()
    })
}

fn max_error(field: &ScalarField, f: impl Fn(Point) -> f64) -> f64 {
    let d = field.domain();
    (0..d.len()).map(|i| (field.value(i) - f(d.point(i))).abs()).fold(0.0, f64::max)
}

/// Max residual and degenerate count over nodes satisfying `keep`.
fn residual_summary(field: &ScalarField, keep: impl Fn(Point) -> bool) -> (f64, usize) {
    let r = residual_mse(field);
    let d = field.domain();
    let degenerate = (0..d.len()).filter(|&i| r.get(i) == NodeResidual::Degenerate && keep(d.point(i))).count();
    (r.max_abs_where(keep), degenerate)
}

/// Four-case test for a field on a punctured ball with its singularity at the puncture.
pub fn classify_entire(field: &ScalarField, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    let d = field.domain();
    let h = d.h();
    let tol = opts.tol_factor * h;
    let &(_, pin) = d
        .punctures()
        .first()
        .ok_or_else(|| Error::InvalidArgument("classification needs a punctured domain".into()))?;
    let c = d.point(pin);
    let phi = BoundaryData::from_field(field);
    let segs = segments_through(d, &phi, 2.0 * h, pin)?;
    let (max_residual, degenerate_nodes) = residual_summary(field, |_| true);
    let mut m = Metrics {
        tolerance: tol,
        max_residual,
        degenerate_nodes,
        light_segments: segs.len(),
        cone_plus_error: max_error(field, |x| dist(x, c) + field.value(pin)),
        cone_minus_error: max_error(field, |x| -dist(x, c) + field.value(pin)),
        ..Metrics::default()
    };
    let case = if segs.is_empty() && max_residual <= tol {
        Case::Maximal
    } else if m.cone_plus_error <= tol {
        Case::UpperCone
    } else if m.cone_minus_error <= tol {
        Case::LowerCone
    } else {
        let radii = radii_for(d, opts);
        let span = *radii.last().unwrap();
        let b = blowdown(field, &radii, opts.samples)?;
        let case = match b.model {
            BlowdownModel::Hyperplane { a } => {
                let plane = |x: Point| a[0] * x[0] + a[1] * x[1];
                let excess = (0..d.len()).map(|i| field.value(i) - plane(d.point(i)));
                let (hi, lo) = excess.fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), v| (hi.max(v), lo.min(v)));
                let ray = |sign: f64| -> Result<f64> {
                    let mut worst = 0.0f64;
                    for k in 0..=20 {
                        let t = sign * span * k as f64 / 20.0;
                        worst = worst.max((field.evaluate([c[0] + t * a[0], c[1] + t * a[1]])? - field.value(pin) - t).abs());
                    }
                    Ok(worst)
                };
                let (below, above) = (ray(-1.0)?, ray(1.0)?);
                if hi <= tol && below <= tol {
                    m.one_sided_margin = Some(hi);
                    m.half_ray_error = Some(below);
                    Case::HyperplaneAsymptotic { a, side: Side::Below }
                } else if lo >= -tol && above <= tol {
                    m.one_sided_margin = Some(lo);
                    m.half_ray_error = Some(above);
                    Case::HyperplaneAsymptotic { a, side: Side::Above }
                } else {
                    m.one_sided_margin = Some(if below <= above { hi } else { lo });
                    m.half_ray_error = Some(below.min(above));
                    Case::Undetermined
                }
            }
            _ => Case::Undetermined,
        };
        m.blowdown = Some(b);
        case
    };
    Ok(ClassificationReport { case, metrics: m, hypothesis_holds: None })
}

/// Three-case test for an exterior field around the obstacle `a_set`.
pub fn exterior_trichotomy(field: &ScalarField, a_set: &[Point], x0: Point, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    let d = field.domain();
    let h = d.h();
    let tol = opts.tol_factor * h;
    let hull = convex_hull(a_set)?;
    if !hull_contains(&hull, x0, h) {
        return Err(Error::InvalidArgument(alloc::format!("base point {x0:?} is not in the convex hull of A")));
    }
    let obstacle = d.obstacle_nodes();
    if obstacle.is_empty() {
        return Err(Error::InvalidArgument("domain has no obstacle nodes".into()));
    }
    let outside = |x: Point| !hull_contains(&hull, x, h);
    let (max_residual, degenerate_nodes) = residual_summary(field, outside);
    let minus = Extrema::of(field, &obstacle, |x, u| u - dist(x, x0));
    let plus = Extrema::of(field, &obstacle, |x, u| u + dist(x, x0));
    let mut m = Metrics {
        tolerance: tol,
        max_residual,
        degenerate_nodes,
        cone_plus_error: max_error(field, |x| dist(x, x0)),
        cone_minus_error: max_error(field, |x| -dist(x, x0)),
        cone_minus_extrema: Some(minus),
        cone_plus_extrema: Some(plus),
        ..Metrics::default()
    };
    let hypothesis = max_residual > tol || degenerate_nodes > 0;
    let case = if minus.max_attained(tol) && minus.min_attained(tol) {
        Case::TrichotomyI
    } else if plus.max_attained(tol) && plus.min_attained(tol) {
        Case::TrichotomyII
    } else {
        let b = blowdown(field, &radii_for(d, opts), opts.samples)?;
        let case = match b.model {
            BlowdownModel::Hyperplane { a } => {
                let e = Extrema::of(field, &obstacle, |x, u| u - a[0] * x[0] - a[1] * x[1]);
                m.one_sided_margin = Some(if e.max_attained(tol) { e.max_all } else { e.min_all });
                m.plane_extrema = Some(e);
                Case::TrichotomyIII { a }
            }
            _ => Case::Undetermined,
        };
        m.blowdown = Some(b);
        case
    };
    Ok(ClassificationReport { case, metrics: m, hypothesis_holds: Some(hypothesis) })
}
