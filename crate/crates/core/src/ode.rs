//! Dormand-Prince 5(4) integrator with adaptive step-size control.
//!
//! Only the accepted step endpoints `(t, y, y')` are returned; callers build
//! whatever dense output suits their system from those nodes.

use crate::error::{Error, Result};

/// A single accepted node of the integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0` and returns every
/// accepted node, starting with `(t0, y0)` and ending exactly at `t1`.
pub fn dopri5<const N: usize, F>(mut f: F, t0: f64, y0: [f64; N], t1: f64, control: StepControl) -> Result<Vec<Node<N>>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    if !(t1 > t0) {
        return Err(Error::config(format!("integration interval [{t0}, {t1}] is empty")));
    }
    if !(control.rel_tol > 0.0 && control.abs_tol > 0.0) {
        return Err(Error::config("tolerances must be positive"));
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut nodes = vec![Node { t, y, dy: k1 }];

    let span = t1 - t0;
    let mut h = initial_step(&y, &k1, control).min(span).min(control.max_step);
    let mut err_prev: f64 = 1e-4;
    let mut rejected_last = false;

    for _ in 0..control.max_steps {
        if t >= t1 {
            return Ok(nodes);
        }
        let last = t + h >= t1 - 1e-14 * span;
        if last {
            h = t1 - t;
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
        let t_new = if last { t1 } else { t + h };
        let k6 = f(t_new, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t_new, &y_new)?;

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = control.abs_tol + control.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
        }

        if err <= 1.0 {
            // PI controller (Hairer & Wanner, beta = 0.04).
            let mut fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.04);
            fac = fac.clamp(0.2, 10.0);
            if rejected_last {
                fac = fac.min(1.0);
            }
            err_prev = err.max(1e-4);
            rejected_last = false;

            t = t_new;
            y = y_new;
            k1 = k7;
            nodes.push(Node { t, y, dy: k1 });
            h = (h * fac).min(control.max_step);
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            rejected_last = true;
        }

        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::Integration { t, reason: "step size underflow".into() });
        }
    }
    if t >= t1 {
        Ok(nodes)
    } else {
        Err(Error::Integration { t, reason: format!("exceeded {} steps", control.max_steps) })
    }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], control: StepControl) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = control.abs_tol + control.rel_tol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (dy[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        (0.01 * d0 / d1).min(0.1)
    }
}
