use crate::Point;

/// Stage-δ integrand: `sqrt(1 - s^2)` for `s <= 1 - δ`, continued above by its
/// second-order Taylor polynomial at `s0 = 1 - δ`.
///
/// The continuation is C², concave, and lies above `sqrt(1 - s^2)` on `[s0, 1]`,
/// so any stage maximizer with all slopes `<= s0` also maximizes the true energy.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Integrand {
    s0: f64,
    f0: f64,
    f1: f64,
    f2: f64,
}

/// Value, gradient and negated Hessian `(xx, xy, yy)` at a slope vector.
pub(crate) struct Local {
    pub f: f64,
    pub df: Point,
    pub n: [f64; 3],
}

impl Integrand {
    pub(crate) fn new(delta: f64) -> Self {
        let s0 = 1.0 - delta;
        let f0 = libm::sqrt(1.0 - s0 * s0);
        Integrand { s0, f0, f1: -s0 / f0, f2: -1.0 / (f0 * f0 * f0) }
    }

    #[inline]
    pub(crate) fn value(&self, p: Point) -> f64 {
        let s2 = p[0] * p[0] + p[1] * p[1];
        if s2 <= self.s0 * self.s0 {
            libm::sqrt(1.0 - s2)
        } else {
            let t = libm::sqrt(s2) - self.s0;
            self.f0 + t * (self.f1 + 0.5 * self.f2 * t)
        }
    }

    #[inline]
    pub(crate) fn eval(&self, p: Point) -> Local {
        let s2 = p[0] * p[0] + p[1] * p[1];
        if s2 <= self.s0 * self.s0 {
            let f = libm::sqrt(1.0 - s2);
            let a = 1.0 / f;
            let b = a * a * a;
            Local {
                f,
                df: [-p[0] * a, -p[1] * a],
                n: [a + b * p[0] * p[0], b * p[0] * p[1], a + b * p[1] * p[1]],
            }
        } else {
            let s = libm::sqrt(s2);
            let t = s - self.s0;
            let f = self.f0 + t * (self.f1 + 0.5 * self.f2 * t);
            let dphi = self.f1 + self.f2 * t;
            let q = [p[0] / s, p[1] / s];
            let radial = -self.f2;
            let tangential = -dphi / s;
            let c = radial - tangential;
            Local {
                f,
                df: [dphi * q[0], dphi * q[1]],
                n: [tangential + c * q[0] * q[0], c * q[0] * q[1], tangential + c * q[1] * q[1]],
            }
        }
    }
}
