use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{norm, ScalarField};
use crate::{Error, Point, Result};

/// A fitted model is accepted only below this residual at the largest radius.
pub const MODEL_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum BlowdownModel {
    /// `|x|`
    ConePlus,
    /// `-|x|`
    ConeMinus,
    /// `a . x` with `|a| = 1`
    Hyperplane { a: Point },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    pub r: f64,
    /// `u(r w_j) / r` at the unit-circle samples `w_j`.
    pub samples: Vec<f64>,
    pub cone_plus: f64,
    pub cone_minus: f64,
    pub hyperplane: f64,
    pub a: Point,
}

impl RadiusFit {
    fn best(&self) -> (BlowdownModel, f64) {
        let mut best = (BlowdownModel::ConePlus, self.cone_plus);
        if self.cone_minus < best.1 {
            best = (BlowdownModel::ConeMinus, self.cone_minus);
        }
        if self.hyperplane < best.1 {
            best = (BlowdownModel::Hyperplane { a: self.a }, self.hyperplane);
        }
        best
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowdownReport {
    pub radii: Vec<f64>,
    pub fits: Vec<RadiusFit>,
    pub model: BlowdownModel,
    /// Residual of the best model at the largest radius.
    pub residual: f64,
    /// Residual of that model family at every radius.
    pub trend: Vec<f64>,
    pub decreasing: bool,
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for v in it {
        s += v * v;
        n += 1;
    }
    libm::sqrt(s / n as f64)
}

/// Rescaled samples on circles and least-squares fits of `±|x|` and unit-slope planes.
///
/// For equally spaced samples the plane fit with `|a| = 1` is `a = b/|b|`,
/// `b = sum v_j w_j`, since `sum (a . w_j)^2` does not depend on the direction of `a`.
pub fn blowdown(field: &ScalarField, radii: &[f64], samples_per_circle: usize) -> Result<BlowdownReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(alloc::format!("radii must be positive and increasing: {radii:?}")));
    }
    if samples_per_circle < 16 {
        return Err(Error::InvalidArgument("at least 16 samples per circle are required".into()));
    }
    let n = samples_per_circle;
    let omega: Vec<Point> = (0..n)
        .map(|j| {
            let t = 2.0 * core::f64::consts::PI * j as f64 / n as f64;
            [libm::cos(t), libm::sin(t)]
        })
        .collect();
    let mut fits = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut v = Vec::with_capacity(n);
        for w in &omega {
            v.push(field.evaluate([r * w[0], r * w[1]])? / r);
        }
        let b = omega.iter().zip(&v).fold([0.0; 2], |b, (w, x)| [b[0] + x * w[0], b[1] + x * w[1]]);
        let bn = norm(b);
        let a = if bn > 0.0 { [b[0] / bn, b[1] / bn] } else { [1.0, 0.0] };
        fits.push(RadiusFit {
            r,
            cone_plus: rms(v.iter().map(|x| x - 1.0)),
            cone_minus: rms(v.iter().map(|x| x + 1.0)),
            hyperplane: rms(v.iter().zip(&omega).map(|(x, w)| x - a[0] * w[0] - a[1] * w[1])),
            a,
            samples: v,
        });
    }
    let (best, residual) = fits.last().unwrap().best();
    let trend: Vec<f64> = fits
        .iter()
        .map(|f| match best {
            BlowdownModel::ConePlus => f.cone_plus,
            BlowdownModel::ConeMinus => f.cone_minus,
            _ => f.hyperplane,
        })
        .collect();
    let decreasing = trend.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let model = if residual < MODEL_THRESHOLD { best } else { BlowdownModel::Undetermined };
    Ok(BlowdownReport { radii: radii.to_vec(), fits, model, residual, trend, decreasing })
}
