//! Dormand–Prince 5(4) integrator with step-size control.
//!
//! Every accepted step is recorded as a node `(t, y, y')`, so callers can
//! interpolate the trajectory with cubic Hermite splines.

use crate::error::{Error, Result};
use crate::scalar::Real;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// Difference between the 5th- and 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    /// Local error tolerance, mixed absolute/relative: `tol * (1 + |y|)`.
    pub tol: T,
    /// Upper bound on |h|; doubles as the maximum node spacing.
    pub max_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        OdeOptions {
            tol: T::lit(1e-10),
            max_step: T::lit(1e-2),
            max_steps: 2_000_000,
        }
    }
}

/// Accepted steps of an integration, ordered in the direction of travel.
#[derive(Debug, Clone)]
pub struct Trajectory<T, const N: usize> {
    pub t: Vec<T>,
    pub y: Vec<[T; N]>,
    pub dy: Vec<[T; N]>,
}

impl<T: Real, const N: usize> Trajectory<T, N> {
    pub fn last(&self) -> (T, [T; N]) {
        let i = self.t.len() - 1;
        (self.t[i], self.y[i])
    }
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, coeffs: &[f64], k: &[[T; N]]) -> [T; N] {
    let mut out = *y;
    for (c, ki) in coeffs.iter().zip(k) {
        if *c == 0.0 {
            continue;
        }
        let w = h * T::lit(*c);
        for (o, kv) in out.iter_mut().zip(ki) {
            *o += w * *kv;
        }
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (forward or backward).
pub fn integrate<T, const N: usize, F>(
    mut rhs: F,
    t0: T,
    y0: [T; N],
    t1: T,
    opts: &OdeOptions<T>,
) -> Result<Trajectory<T, N>>
where
    T: Real,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0],
        dy: vec![rhs(t0, &y0)?],
    };
    let span = t1 - t0;
    if span == T::zero() {
        return Ok(traj);
    }
    let dir = span.signum();
    let max_step = opts.max_step.abs().min(span.abs());
    let mut h = max_step.min(T::lit(1e-2) * span.abs()).min(opts.tol.powf(T::lit(0.2)));
    let mut t = t0;
    let mut y = y0;
    let mut k = [[T::zero(); N]; 7];
    k[0] = traj.dy[0];
    let safety = T::lit(0.9);
    let tiny = T::lit(64.0) * T::epsilon();

    for _ in 0..opts.max_steps {
        if (t1 - t) * dir <= T::zero() {
            return Ok(traj);
        }
        let remaining = (t1 - t).abs();
        let floor = tiny * (T::one() + t.abs());
        if remaining <= floor {
            // rounding left a sliver; snap the final node onto t1
            if let Some(tl) = traj.t.last_mut() {
                *tl = t1;
            }
            return Ok(traj);
        }
        let mut last = false;
        if h >= remaining || remaining - h <= floor {
            h = remaining;
            last = true;
        }
        if h <= tiny * (T::one() + t.abs()) {
            return Err(Error::Integration(format!(
                "step size underflow at t = {t} (h = {h:e})"
            )));
        }
        let hs = h * dir;
        for s in 1..7 {
            let ys = axpy(&y, hs, &A[s][..s], &k[..s]);
            k[s] = rhs(t + hs * T::lit(C[s]), &ys)?;
        }
        let y_new = axpy(&y, hs, &A[6], &k[..6]);
        let mut err = T::zero();
        for i in 0..N {
            let mut e = T::zero();
            for (s, ks) in k.iter().enumerate() {
                e += T::lit(E[s]) * ks[i];
            }
            let scale = opts.tol * (T::one() + y[i].abs().max(y_new[i].abs()));
            err = err.max((hs * e).abs() / scale);
        }
        if !err.is_finite() {
            h = h * T::lit(0.25);
            continue;
        }
        if err <= T::one() {
            t = if last { t1 } else { t + hs };
            y = y_new;
            // FSAL: the last stage is f(t + h, y_new)
            let dy_new = k[6];
            traj.t.push(t);
            traj.y.push(y);
            traj.dy.push(dy_new);
            k[0] = dy_new;
            let grow = if err == T::zero() {
                T::lit(5.0)
            } else {
                (safety * err.powf(T::lit(-0.2))).min(T::lit(5.0))
            };
            h = (h * grow).min(max_step);
        } else {
            let shrink = (safety * err.powf(T::lit(-0.2))).max(T::lit(0.2));
            h = h * shrink;
        }
    }
    Err(Error::Integration(format!(
        "step budget of {} exhausted at t = {t}",
        opts.max_steps
    )))
}

/// Cubic Hermite interpolation on `[t0, t1]` given values and slopes.
#[inline]
pub fn hermite_cubic<T: Real>(t0: T, t1: T, y0: T, y1: T, d0: T, d1: T, t: T) -> T {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = OdeOptions {
            tol: 1e-10,
            max_step: 1.0,
            ..Default::default()
        };
        let tr = integrate(|_, y: &[f64; 1]| Ok([-y[0]]), 0.0, [1.0], 3.0, &opts).unwrap();
        let (t, y) = tr.last();
        assert_eq!(t, 3.0);
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_backward() {
        let opts = OdeOptions::default();
        let tr = integrate(|_, y: &[f64; 2]| Ok([y[1], -4.0 * y[0]]), 0.0, [0.0, 2.0], -1.3, &opts).unwrap();
        let (t, y) = tr.last();
        assert_eq!(t, -1.3);
        assert!((y[0] - (2.0 * t).sin()).abs() < 1e-9);
        assert!((y[1] - 2.0 * (2.0 * t).cos()).abs() < 1e-9);
        assert!(tr.t.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn node_spacing_respects_max_step() {
        let opts = OdeOptions {
            tol: 1e-6,
            max_step: 0.05,
            ..Default::default()
        };
        let tr = integrate(|_, _y: &[f64; 1]| Ok([1.0]), 0.0, [0.0], 1.0, &opts).unwrap();
        assert!(tr.t.windows(2).all(|w| w[1] - w[0] <= 0.05 + 1e-15));
        assert!((tr.last().1[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blow_up_underflows() {
        // y' = y^2, y(0) = 1 blows up at t = 1
        let opts = OdeOptions {
            tol: 1e-10,
            max_step: 0.1,
            ..Default::default()
        };
        let r = integrate(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], 2.0, &opts);
        assert!(matches!(r, Err(Error::Integration(_))));
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |t: f64| 2.0 * t * t * t - t + 0.5;
        let df = |t: f64| 6.0 * t * t - 1.0;
        let v = hermite_cubic(0.2, 0.9, f(0.2), f(0.9), df(0.2), df(0.9), 0.47);
        assert!((v - f(0.47)).abs() < 1e-14);
    }
}
