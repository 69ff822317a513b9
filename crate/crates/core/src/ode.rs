//! Adaptive Dormand-Prince 5(4) integrator for small systems of first-order
//! ODEs, with exact stops at requested output abscissae.

use crate::error::{Error, Result};
use crate::scalar::{c, Real};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub initial_step: T,
    pub max_steps: usize,
}

impl<T: Real> Default for OdeOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: c(1e-10),
            abs_tol: c(1e-14),
            initial_step: c(1e-3),
            max_steps: 2_000_000,
        }
    }
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (w, k) in terms {
        let hw = h * c::<T>(*w);
        for i in 0..N {
            out[i] += hw * k[i];
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the state at each of
/// the increasing abscissae `outputs` (all must be `>= t0`).
pub fn integrate<T, const N: usize, F>(f: F, t0: T, y0: [T; N], outputs: &[T], opts: &OdeOptions<T>) -> Result<Vec<[T; N]>>
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let mut res = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step;
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    for &t_out in outputs {
        if t_out < t {
            return Err(Error::InvalidArgument("ODE outputs must be increasing".into()));
        }
        while t < t_out {
            if steps >= opts.max_steps {
                return Err(Error::NoConvergence {
                    context: "ode integration".into(),
                    iterations: steps,
                    residual: h.to_f64_lossy(),
                });
            }
            steps += 1;
            let mut last = false;
            let h_planned = h;
            if t + h >= t_out {
                h = t_out - t;
                last = true;
            }
            let k2 = f(t + h * c(0.2), &lin(&y, h, &[(A21, &k1)]));
            let k3 = f(t + h * c(0.3), &lin(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + h * c(0.8), &lin(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + h * c(8.0 / 9.0),
                &lin(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &lin(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = lin(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + h, &y_new);
            let mut err = T::zero();
            for i in 0..N {
                let e = h
                    * (c::<T>(E1) * k1[i] + c::<T>(E3) * k3[i] + c::<T>(E4) * k4[i] + c::<T>(E5) * k5[i]
                        + c::<T>(E6) * k6[i]
                        + c::<T>(E7) * k7[i]);
                let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                h = h * c(0.1);
                if h <= T::epsilon() * t.abs().max(T::one()) {
                    return Err(Error::NoConvergence {
                        context: "ode step size underflow".into(),
                        iterations: steps,
                        residual: f64::NAN,
                    });
                }
                continue;
            }
            let fac = if err == T::zero() {
                c(5.0)
            } else {
                (c::<T>(0.9) * err.powf(c(-0.2))).max(c(0.2)).min(c(5.0))
            };
            if err <= T::one() {
                t = if last { t_out } else { t + h };
                y = y_new;
                k1 = k7;
                h = if last { h_planned.max(h * fac) } else { h * fac };
            } else {
                h = h * fac.min(c(1.0));
                if h <= T::epsilon() * t.abs().max(T::one()) {
                    return Err(Error::NoConvergence {
                        context: "ode step size underflow".into(),
                        iterations: steps,
                        residual: err.to_f64_lossy(),
                    });
                }
            }
        }
        res.push(y);
    }
    Ok(res)
}
