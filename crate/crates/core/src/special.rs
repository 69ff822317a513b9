//! Limit profiles of the blow-up analysis: the Liouville bubble `U`, the
//! kernel functions `φ₀…φ₃` of the linearised Liouville operators, the
//! second-order profile `ψ₀`, and the correction profiles `s*`, `t*`.
//!
//! `φ₃` and `ψ₀` are radial and have no elementary closed form. Each has two
//! independent evaluation paths (hypergeometric series / variation of
//! parameters, and an ODE integration in `s = ln r`) so they can be
//! cross-checked.

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions};
use crate::quadrature::{self, QuadOptions};
use crate::scalar::{c, Point, Real};

/// Exponents `(p, q)` of the system with `θ = q − p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair<T> {
    pub p: T,
    pub q: T,
    pub theta: T,
}

impl<T: Real> ExponentPair<T> {
    pub fn new(p: T, q: T) -> Result<Self> {
        if !(p >= T::one()) || !(q >= p) || !q.is_finite() {
            return Err(Error::InvalidArgument(format!("exponents must satisfy q >= p >= 1 (p={p}, q={q})")));
        }
        Ok(Self { p, q, theta: q - p })
    }

    pub fn with_theta(p: T, theta: T) -> Result<Self> {
        if !(theta >= T::zero()) {
            return Err(Error::InvalidArgument(format!("theta must be nonnegative, got {theta}")));
        }
        let mut ep = Self::new(p, p + theta)?;
        ep.theta = theta;
        Ok(ep)
    }

    pub fn symmetric(p: T) -> Result<Self> {
        Self::new(p, p)
    }
}

/// `U_θ(x) = θ/2 − 2 log(1 + e^{θ/2}|x|²/8)`; `θ = 0` gives the standard bubble `U`.
pub fn eval_bubble<T: Real>(x: Point<T>, theta: T) -> T {
    bubble_radial(x[0] * x[0] + x[1] * x[1], theta)
}

/// `U_θ` as a function of `|x|²`.
pub fn bubble_radial<T: Real>(r2: T, theta: T) -> T {
    let half = theta * c(0.5);
    half - c::<T>(2.0) * (half.exp() * r2 / c(8.0)).ln_1p()
}

/// `e^{U(r)} = 64/(8+r²)²`.
pub fn bubble_density<T: Real>(r: T) -> T {
    let d = c::<T>(8.0) + r * r;
    c::<T>(64.0) / (d * d)
}

/// Kernel functions of `−Δ − e^U`: `φ₀ = (8−|x|²)/(8+|x|²)` and
/// `φ_j = x_j/(8+|x|²)` for `j = 1, 2`. Returns the value and gradient.
pub fn eval_phi<T: Real>(j: usize, x: Point<T>) -> Result<(T, [T; 2])> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let d = c::<T>(8.0) + r2;
    let two = c::<T>(2.0);
    match j {
        0 => {
            let g = c::<T>(-32.0) / (d * d);
            Ok(((c::<T>(8.0) - r2) / d, [g * x[0], g * x[1]]))
        }
        1 | 2 => {
            let (a, b) = if j == 1 { (x[0], x[1]) } else { (x[1], x[0]) };
            let da = T::one() / d - two * a * a / (d * d);
            let db = -two * a * b / (d * d);
            let grad = if j == 1 { [da, db] } else { [db, da] };
            Ok((a / d, grad))
        }
        _ => Err(Error::InvalidArgument(format!("phi index must be 0, 1 or 2, got {j}"))),
    }
}

const SERIES_TERM_CAP: usize = 10_000;

/// Hypergeometric series for `φ₃(r) = ₂F₁(d, 1−d; 1; z)`, `z = r²/(8+r²)`,
/// `d = (1+i√7)/2`. Since `(d+j)(1−d+j) = j²+j+2` the coefficients are real:
/// `a₀ = 1`, `a_{j+1} = a_j (j²+j+2)/(j+1)²`.
///
/// Returns `[φ₃, φ₃', φ₃'']` in `r`.
pub fn phi3_series<T: Real>(r: T) -> Result<[T; 3]> {
    if !(r >= T::zero()) {
        return Err(Error::InvalidArgument(format!("phi3 needs r >= 0, got {r}")));
    }
    let d = c::<T>(8.0) + r * r;
    let z = r * r / d;
    let tol = c::<T>(1e-16);
    // F(z), F'(z), F''(z) summed together
    let mut f0 = T::zero();
    let mut f1 = T::zero();
    let mut f2 = T::zero();
    let mut a = T::one();
    let mut zp = T::one();
    let mut converged = false;
    for j in 0..SERIES_TERM_CAP {
        let jf = T::from_usize_lossy(j);
        let a1 = a * (jf * jf + jf + c(2.0)) / ((jf + T::one()) * (jf + T::one()));
        let a2 = a1 * ((jf + T::one()) * (jf + T::one()) + jf + T::one() + c(2.0)) / ((jf + c(2.0)) * (jf + c(2.0)));
        let t0 = a * zp;
        let t1 = (jf + T::one()) * a1 * zp;
        let t2 = (jf + T::one()) * (jf + c(2.0)) * a2 * zp;
        f0 += t0;
        f1 += t1;
        f2 += t2;
        if t0.abs() <= tol * f0.abs() && t1.abs() <= tol * f1.abs() && t2.abs() <= tol * f2.abs() {
            converged = true;
            break;
        }
        a = a1;
        zp *= z;
        if zp == T::zero() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SeriesNonConvergence { terms: SERIES_TERM_CAP });
    }
    let z1 = c::<T>(16.0) * r / (d * d);
    let z2 = c::<T>(16.0) * (c::<T>(8.0) - c::<T>(3.0) * r * r) / (d * d * d);
    Ok([f0, f1 * z1, f2 * z1 * z1 + f1 * z2])
}

/// Start of the ODE paths; below it the leading Taylor terms are used.
pub const ODE_START_RADIUS: f64 = 1e-3;

fn ode_options<T: Real>() -> OdeOptions<T> {
    let eps = T::epsilon();
    OdeOptions {
        rel_tol: c::<T>(1e-10).max(eps * c(100.0)),
        abs_tol: c::<T>(1e-14).max(eps * c(0.01)),
        initial_step: c(1e-3),
        max_steps: 2_000_000,
    }
}

fn phi3_near_zero<T: Real>(r: T) -> (T, T) {
    // φ₃ = 1 + r²/4 + O(r⁶)
    (T::one() + r * r * c(0.25), r * c(0.5))
}

fn psi0_near_zero<T: Real>(r: T) -> (T, T) {
    // ψ₀ = r⁶/1152 + O(r⁸)
    let r5 = r.powi(5);
    (r5 * r / c(1152.0), r5 * c::<T>(6.0) / c(1152.0))
}

fn phi3_rhs<T: Real>(s: T, y: &[T; 2]) -> [T; 2] {
    let r = s.exp();
    [y[1], r * r * bubble_density(r) * y[0]]
}

fn psi0_rhs<T: Real>(s: T, y: &[T; 2]) -> [T; 2] {
    let r = s.exp();
    let e = bubble_density(r);
    let u = bubble_radial(r * r, T::zero());
    [y[1], r * r * e * (u * u * c(0.5) - y[0])]
}

/// Integrates a radial profile ODE written in `s = ln r` and returns
/// `(value, d/dr)` at the sorted radii `rs`.
fn radial_ode<T: Real>(
    rhs: fn(T, &[T; 2]) -> [T; 2],
    near_zero: fn(T) -> (T, T),
    rs: &[T],
) -> Result<Vec<(T, T)>> {
    if rs.windows(2).any(|w| w[1] < w[0]) || rs.iter().any(|&r| !(r >= T::zero())) {
        return Err(Error::InvalidArgument("radii must be nonnegative and sorted".into()));
    }
    let r0 = c::<T>(ODE_START_RADIUS);
    let (f0, d0) = near_zero(r0);
    let outer: Vec<T> = rs.iter().filter(|&&r| r > r0).map(|r| r.ln()).collect();
    let states = ode::integrate(rhs, r0.ln(), [f0, d0 * r0], &outer, &ode_options())?;
    let mut out = Vec::with_capacity(rs.len());
    let mut k = 0;
    for &r in rs {
        if r <= r0 {
            out.push(near_zero(r));
        } else {
            let y = states[k];
            k += 1;
            out.push((y[0], y[1] / r));
        }
    }
    Ok(out)
}

/// `φ₃` and its derivative by integrating `φ'' + φ'/r = e^U φ`, `φ(0)=1`.
pub fn phi3_ode<T: Real>(rs: &[T]) -> Result<Vec<(T, T)>> {
    radial_ode(phi3_rhs, phi3_near_zero, rs)
}

/// `ψ₀` and its derivative by integrating `ψ'' + ψ'/r + e^Uψ = ½U²e^U`,
/// `ψ(0)=ψ'(0)=0`.
pub fn psi0_ode<T: Real>(rs: &[T]) -> Result<Vec<(T, T)>> {
    radial_ode(psi0_rhs, psi0_near_zero, rs)
}

/// Radius up to which the series is used by [`eval_phi3`].
pub const PHI3_SERIES_MAX_R: f64 = 6.0;

/// `φ₃(r)` and `φ₃'(r)`: series for `r ≤ 6`, ODE beyond.
pub fn eval_phi3<T: Real>(r: T) -> Result<(T, T)> {
    if r <= c(PHI3_SERIES_MAX_R) {
        let s = phi3_series(r)?;
        Ok((s[0], s[1]))
    } else {
        Ok(phi3_ode(&[r])?[0])
    }
}

/// `ψ₀(r)` and `ψ₀'(r)` by the ODE path.
pub fn eval_psi0<T: Real>(r: T) -> Result<(T, T)> {
    Ok(psi0_ode(&[r])?[0])
}

fn quad_opts<T: Real>() -> QuadOptions<T> {
    let eps = T::epsilon();
    QuadOptions {
        abs_tol: c::<T>(1e-15).max(eps * c(0.1)),
        rel_tol: c::<T>(1e-12).max(eps * c(10.0)),
        max_subdivisions: 4000,
    }
}

/// `J(r) = ∫₀^r t(1−t²)/(1+t²)³ log²(1+t²) dt`.
pub fn psi0_inner_integral<T: Real>(r: T) -> Result<T> {
    Ok(quadrature::integrate(psi0_inner_integrand, T::zero(), r, &quad_opts())?.value)
}

fn psi0_inner_integrand<T: Real>(t: T) -> T {
    let t2 = t * t;
    let l = t2.ln_1p();
    let d = T::one() + t2;
    t * (T::one() - t2) / (d * d * d) * l * l
}

fn psi0_tilde<T: Real>(x: T) -> Result<T> {
    if x == T::zero() {
        return Ok(T::zero());
    }
    let d = T::one() + x * x;
    Ok(c::<T>(16.0) * d * d / (x * (T::one() + x) * (T::one() + x)) * psi0_inner_integral(x)?)
}

/// Variation-of-parameters expression for `ψ₀`, with `x = r/√8`:
/// `ψ₀ = φ₀ · [∫₀^x (ψ̃(s) − ψ̃(1))/(1−s)² ds + ψ̃(1) x/(1−x)]`,
/// `ψ̃(s) = 16(1+s²)²/(s(1+s)²) J(s)`.
///
/// Valid away from `r = √8`; used as a cross-check on `[0, 2.5]`.
pub fn psi0_closed_form<T: Real>(r: T) -> Result<T> {
    let x = r / c::<T>(8.0).sqrt();
    if (x - T::one()).abs() < c(1e-6) {
        return Err(Error::Domain("closed form is singular at r = sqrt(8)".into()));
    }
    let t1 = psi0_tilde(T::one())?;
    let integrand = |s: T| {
        let v = psi0_tilde(s).unwrap_or(T::nan());
        (v - t1) / ((T::one() - s) * (T::one() - s))
    };
    let mut opts = quad_opts::<T>();
    opts.rel_tol = opts.rel_tol.max(c(1e-10));
    let inner = quadrature::integrate(integrand, T::zero(), x, &opts)?;
    let phi0 = (c::<T>(8.0) - r * r) / (c::<T>(8.0) + r * r);
    Ok(phi0 * (inner.value + t1 * x / (T::one() - x)))
}

/// Which evaluation path produced a [`RadialProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMethod {
    Series,
    Ode,
    ClosedForm,
}

/// Tabulated radial function with cubic Hermite interpolation in `ln r`.
///
/// Below the first radius the leading Taylor terms are used; beyond the last
/// radius the profile is continued as `a + b ln r` (both tabulated profiles
/// grow logarithmically).
#[derive(Debug, Clone)]
pub struct RadialProfile<T> {
    pub radii: Vec<T>,
    pub values: Vec<T>,
    pub derivatives: Vec<T>,
    pub method: ProfileMethod,
    near_zero: fn(T) -> (T, T),
}

impl<T: Real> RadialProfile<T> {
    fn tabulate(
        rhs: fn(T, &[T; 2]) -> [T; 2],
        near_zero: fn(T) -> (T, T),
        r_max: T,
        per_unit: usize,
    ) -> Result<Self> {
        let s0 = c::<T>(ODE_START_RADIUS).ln();
        let s1 = r_max.ln();
        let n = ((s1 - s0).to_f64_lossy() * per_unit as f64).ceil() as usize + 1;
        let ds = (s1 - s0) / T::from_usize_lossy(n - 1);
        let radii: Vec<T> = (0..n).map(|k| (s0 + ds * T::from_usize_lossy(k)).exp()).collect();
        let vals = radial_ode(rhs, near_zero, &radii)?;
        Ok(Self {
            values: vals.iter().map(|v| v.0).collect(),
            derivatives: vals.iter().map(|v| v.1).collect(),
            radii,
            method: ProfileMethod::Ode,
            near_zero,
        })
    }

    /// `φ₃` tabulated on `[1e-3, r_max]`.
    pub fn phi3(r_max: T) -> Result<Self> {
        Self::tabulate(phi3_rhs, phi3_near_zero, r_max, 200)
    }

    /// `ψ₀` tabulated on `[1e-3, r_max]`.
    pub fn psi0(r_max: T) -> Result<Self> {
        Self::tabulate(psi0_rhs, psi0_near_zero, r_max, 200)
    }

    /// Value and derivative at `r ≥ 0`.
    pub fn eval(&self, r: T) -> (T, T) {
        let n = self.radii.len();
        if r <= self.radii[0] {
            return (self.near_zero)(r);
        }
        if r >= self.radii[n - 1] {
            let rl = self.radii[n - 1];
            let b = rl * self.derivatives[n - 1];
            return (self.values[n - 1] + b * (r / rl).ln(), b / r);
        }
        let s = r.ln();
        let s0 = self.radii[0].ln();
        let ds = (self.radii[n - 1].ln() - s0) / T::from_usize_lossy(n - 1);
        let pos = (s - s0) / ds;
        let k = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let t = pos - T::from_usize_lossy(k);
        let (f0, f1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.derivatives[k] * self.radii[k] * ds, self.derivatives[k + 1] * self.radii[k + 1] * ds);
        let t2 = t * t;
        let t3 = t2 * t;
        let two = c::<T>(2.0);
        let three = c::<T>(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        let value = h00 * f0 + h10 * m0 + h01 * f1 + h11 * m1;
        let dt = (c::<T>(6.0) * t2 - c::<T>(6.0) * t) * f0
            + (three * t2 - c::<T>(4.0) * t + T::one()) * m0
            + (c::<T>(6.0) * t - c::<T>(6.0) * t2) * f1
            + (three * t2 - two * t) * m1;
        (value, dt / ds / r)
    }
}

/// Tabulated `φ₃` and `ψ₀`, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct SpecialTables<T> {
    pub phi3: RadialProfile<T>,
    pub psi0: RadialProfile<T>,
}

/// Outer radius of [`SpecialTables`]; rescaled bubbles at `p ≤ 160` need
/// `r ≲ 1/μ ≈ 1e18`, covered by the logarithmic continuation.
pub const TABLE_MAX_R: f64 = 1e5;

impl<T: Real> SpecialTables<T> {
    pub fn new() -> Result<Self> {
        Ok(Self { phi3: RadialProfile::phi3(c(TABLE_MAX_R))?, psi0: RadialProfile::psi0(c(TABLE_MAX_R))? })
    }
}

impl SpecialTables<f64> {
    /// Process-wide `f64` tables.
    pub fn shared() -> &'static SpecialTables<f64> {
        static CELL: std::sync::OnceLock<SpecialTables<f64>> = std::sync::OnceLock::new();
        CELL.get_or_init(|| SpecialTables::new().expect("tabulating special profiles"))
    }
}

/// `C₀ = (e^{√7π/2} + e^{−√7π/2})/π`, the flux constant of `φ₃`:
/// `r φ₃'(r) → C₀`.
pub fn flux_constant<T: Real>() -> T {
    let a = c::<T>(7.0).sqrt() * T::PI() * c(0.5);
    (a.exp() + (-a).exp()) / T::PI()
}

/// Constants of the correction profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionConstants<T> {
    pub c0: T,
    pub m: T,
    pub l: T,
    pub sigma: T,
    pub theta: T,
}

impl<T: Real> CorrectionConstants<T> {
    /// `m = −2θ/C₀`, `l = m + θ + σ`.
    pub fn new(theta: T, sigma: T) -> Self {
        let c0 = flux_constant::<T>();
        let m = -(theta + theta) / c0;
        Self { c0, m, l: m + theta + sigma, sigma, theta }
    }
}

/// `(s*, t*)` and their `r`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionValues<T> {
    pub s_star: T,
    pub t_star: T,
    pub ds_star: T,
    pub dt_star: T,
}

/// `s* = ψ₀ + lφ₀ + mφ₃ − (θ+σ)U + σθ + σ²/2`,
/// `t* = ψ₀ + lφ₀ − mφ₃ − (θ+σ)`.
pub fn correction_profiles<T: Real>(r: T, k: &CorrectionConstants<T>, tables: &SpecialTables<T>) -> CorrectionValues<T> {
    let (psi, dpsi) = tables.psi0.eval(r);
    let (phi3, dphi3) = tables.phi3.eval(r);
    let d = c::<T>(8.0) + r * r;
    let phi0 = (c::<T>(8.0) - r * r) / d;
    let dphi0 = c::<T>(-32.0) * r / (d * d);
    let u = bubble_radial(r * r, T::zero());
    let du = c::<T>(-4.0) * r / d;
    let ts = k.theta + k.sigma;
    CorrectionValues {
        s_star: psi + k.l * phi0 + k.m * phi3 - ts * u + k.sigma * k.theta + k.sigma * k.sigma * c(0.5),
        t_star: psi + k.l * phi0 - k.m * phi3 - ts,
        ds_star: dpsi + k.l * dphi0 + k.m * dphi3 - ts * du,
        dt_star: dpsi + k.l * dphi0 - k.m * dphi3,
    }
}

/// Flux `2πR t*'(R)` of `Δt*` through the circle of radius `R`.
pub fn t_star_flux<T: Real>(radius: T, theta: T) -> Result<T> {
    let k = CorrectionConstants::new(theta, T::zero());
    let psi = psi0_ode(&[radius])?[0];
    let phi3 = phi3_ode(&[radius])?[0];
    let d = c::<T>(8.0) + radius * radius;
    let dphi0 = c::<T>(-32.0) * radius / (d * d);
    Ok((T::PI() + T::PI()) * radius * (psi.1 + k.l * dphi0 - k.m * phi3.1))
}

/// Limit of [`t_star_flux`] as `R → ∞`, extrapolated from `R = 10³, 10⁴`
/// assuming the leading remainder `∝ log²R / R²`.
pub fn t_star_flux_limit<T: Real>(theta: T) -> Result<(T, T)> {
    let (r1, r2) = (c::<T>(1e3), c::<T>(1e4));
    let (f1, f2) = (t_star_flux(r1, theta)?, t_star_flux(r2, theta)?);
    let w = |r: T| r.ln() * r.ln() / (r * r);
    let (w1, w2) = (w(r1), w(r2));
    let lim = (f2 * w1 - f1 * w2) / (w1 - w2);
    Ok((lim, (lim - f2).abs()))
}

/// A named reference integral with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceIntegral<T> {
    pub name: &'static str,
    pub value: T,
    pub error: T,
}

/// Integrals over `R²`: `∫e^U`, `∫Ue^Uφ₀`, `∫y₁e^Uφ₁`, `∫e^Uφ₃`, the inner
/// `ψ₀` integral `∫₀^∞ …` and the flux of `Δt*` for the given `θ`.
pub fn reference_integrals<T: Real>(theta: T) -> Result<Vec<ReferenceIntegral<T>>> {
    let opts = quad_opts::<T>();
    let mut out = Vec::new();
    let mut push = |name, q: quadrature::QuadResult<T>| out.push(ReferenceIntegral { name, value: q.value, error: q.error });

    push("int_eU", quadrature::integrate_radial_plane(bubble_density, &opts)?);
    push(
        "int_U_eU_phi0",
        quadrature::integrate_radial_plane(
            |r| bubble_radial(r * r, T::zero()) * bubble_density(r) * (c::<T>(8.0) - r * r) / (c::<T>(8.0) + r * r),
            &opts,
        )?,
    );
    // ∫ y₁ e^U φ₁ = π ∫₀^∞ r³ e^U/(8+r²) dr after the angular integral of cos²
    let q = quadrature::integrate_half_line(|r| r * r * r * bubble_density(r) / (c::<T>(8.0) + r * r), T::zero(), &opts)?;
    push("int_y1_eU_phi1", quadrature::QuadResult { value: q.value * T::PI(), error: q.error * T::PI(), evaluations: q.evaluations });
    let phi3 = RadialProfile::phi3(c(TABLE_MAX_R))?;
    let mut loose = opts;
    loose.rel_tol = loose.rel_tol.max(c(1e-10));
    push("int_eU_phi3", quadrature::integrate_radial_plane(|r| bubble_density(r) * phi3.eval(r).0, &loose)?);
    push("psi0_inner_integral", quadrature::integrate_half_line(psi0_inner_integrand, T::zero(), &opts)?);
    let (flux, err) = t_star_flux_limit(theta)?;
    out.push(ReferenceIntegral { name: "flux_laplacian_t_star", value: flux, error: err });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_values() {
        assert_eq!(eval_bubble([0.0, 0.0], 0.0), 0.0);
        let v = eval_bubble([8f64.sqrt(), 0.0], 0.0);
        assert!((v + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((eval_bubble([0.0f64, 0.0], 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponent_pair_validation() {
        assert!(ExponentPair::new(3.0, 2.0).is_err());
        assert!(ExponentPair::new(0.5, 2.0).is_err());
        let ep = ExponentPair::new(10.0, 11.5).unwrap();
        assert_eq!(ep.theta, 1.5);
    }

    #[test]
    fn phi_index_checked() {
        assert!(eval_phi(3, [0.1f64, 0.2]).is_err());
        assert_eq!(eval_phi(0, [0.0f64, 0.0]).unwrap().0, 1.0);
        assert!(eval_phi(0, [8f64.sqrt(), 0.0]).unwrap().0.abs() < 1e-15);
    }

    #[test]
    fn real_coefficient_identity() {
        // (d+j)(1-d+j) with d = (1+i√7)/2 expanded in real and imaginary parts
        let (dr, di) = (0.5f64, 7f64.sqrt() / 2.0);
        for j in 0..50 {
            let jf = j as f64;
            let (ar, ai) = (dr + jf, di);
            let (br, bi) = (1.0 - dr + jf, -di);
            let re = ar * br - ai * bi;
            let im = ar * bi + ai * br;
            assert!((re - (jf * jf + jf + 2.0)).abs() < 1e-10);
            assert!(im.abs() < 1e-12);
        }
    }

    #[test]
    fn phi3_small_r() {
        assert_eq!(phi3_series(0.0f64).unwrap()[0], 1.0);
        let v = phi3_series(0.01f64).unwrap()[0];
        assert!(((v - 1.0) / 1e-4 - 0.25).abs() < 1e-3);
    }

    #[test]
    fn phi3_series_fails_near_z_one() {
        assert!(matches!(phi3_series(500.0f64), Err(Error::SeriesNonConvergence { .. })));
    }

    #[test]
    fn table_matches_direct_paths() {
        let t = SpecialTables::<f64>::shared();
        for &r in &[0.0005, 0.3, 1.7, 4.0, 25.0, 300.0] {
            let (a, da) = t.phi3.eval(r);
            let (b, db) = phi3_ode(&[r]).unwrap()[0];
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "r={r}");
            assert!((da - db).abs() < 1e-8 * db.abs().max(1.0), "r={r}");
            let (a, _) = t.psi0.eval(r);
            let (b, _) = psi0_ode(&[r]).unwrap()[0];
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn constants_for_theta_one() {
        let k = CorrectionConstants::new(1.0f64, 0.5);
        // C₀ = 2cosh(√7π/2)/π evaluated independently at high precision
        assert!((k.c0 - 20.316880834654715).abs() < 1e-12);
        assert!((k.m + 0.09844030765729449).abs() < 1e-12);
        assert!((k.l - 1.4015596923427056).abs() < 1e-12);
    }

    #[test]
    fn single_precision_closed_forms() {
        let v: f32 = eval_bubble([1.0, 1.0], 0.0);
        assert!((v as f64 - (-2.0 * (1.25f64).ln())).abs() < 1e-6);
        let s = phi3_series(2.0f32).unwrap();
        let d = phi3_series(2.0f64).unwrap();
        assert!((s[0] as f64 - d[0]).abs() < 1e-5);
    }
}
