use crate::error::Result;
use crate::ode::{integrate, OdeOptions};
use crate::scalar::{c, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Decaying,
    Bounded,
    Logarithmic,
    Power,
}

/// Far-field behaviour of the regular solution of one angular mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeReport<T> {
    pub j: usize,
    pub sign: i32,
    pub class: GrowthClass,
    /// `rφ'/φ` at the outer radius.
    pub log_slope: T,
    /// Admissible under the bound `|φ| ≤ C(1 + r)^τ`.
    pub admissible: bool,
    /// Number of kernel directions the mode contributes when admissible:
    /// one for `j = 0`, two (cosine and sine) otherwise.
    pub dimension: usize,
}

const R_START: f64 = 1e-3;
const R_END: f64 = 1e4;

/// Shoots `−φ'' − φ'/r + sign·e^U φ = −j²φ/r²` with `e^U = (1 + r²/8)^{−2}`
/// from `φ ~ r^j` at the origin to `r = 10⁴` and classifies the growth.
/// In `t = log r` the equation reads `φ_tt = (j² + sign·r²e^U)φ`.
pub fn limit_kernel_modes<T: Real>(j: usize, sign: i32, tau: T) -> Result<ModeReport<T>> {
    let jj = T::from_usize_lossy(j);
    let s = if sign >= 0 { T::one() } else { -T::one() };
    let rhs = |t: T, y: &[T; 2]| {
        let r = t.exp();
        let d = T::one() + r * r / c(8.0);
        [y[1], (jj * jj + s * r * r / (d * d)) * y[0]]
    };
    let (t0, t1) = (c::<T>(R_START).ln(), c::<T>(R_END).ln());
    let phi0 = c::<T>(R_START).powi(j as i32);
    let opts = OdeOptions { rel_tol: c(1e-11), abs_tol: T::zero(), initial_step: c(1e-3), max_steps: 1_000_000 };
    let tm = t1 - c::<T>(10.0).ln();
    let out = integrate(rhs, t0, [phi0, jj * phi0], &[tm, t1], &opts)?;
    let (mid, end) = (out[0], out[1]);
    let slope = end[1] / end[0];
    let class = if slope > c(0.5) {
        GrowthClass::Power
    } else if slope < c(-0.5) {
        GrowthClass::Decaying
    } else if (end[1] / mid[1]).abs() > c(0.5) && (end[1] / mid[1]) > T::zero() {
        // rφ' settles to a nonzero constant
        GrowthClass::Logarithmic
    } else {
        GrowthClass::Bounded
    };
    let admissible = match class {
        GrowthClass::Power => slope < tau,
        _ => true,
    };
    Ok(ModeReport { j, sign, class, log_slope: slope, admissible, dimension: if j == 0 { 1 } else { 2 } })
}
