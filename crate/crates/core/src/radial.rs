//! Radial boundary-value solver for the system on the unit disk,
//! `u'' + u'/r + v^p = 0`, `v'' + v'/r + u^q = 0`, `u'(0) = v'(0) = 0`,
//! `u(1) = v(1) = 0`, with continuation in `p`.
//!
//! The discretisation is the conservative three-point formula on a graded
//! mesh: for node `i` with cell `[r_{i−½}, r_{i+½}]`,
//! `−(r u')_{i+½} + (r u')_{i−½} = V_i v_i^p`, `V_i = (r²_{i+½} − r²_{i−½})/2`.
//! At `r = 0` this reduces to `−4(u₁ − u₀)/r₁² = v₀^p`, the symmetric
//! treatment `Δu(0) = 2u''(0)`.

use log::{debug, info};

use crate::asymptotics::predict_rates;
use crate::error::{Error, Result};
use crate::linalg::{norm_inf, BandMatrix};
use crate::scalar::{c, Real};
use crate::special::{bubble_radial, correction_profiles, CorrectionConstants, ExponentPair, SpecialTables};

/// Nodes `r_i = s·sinh(βi/M)`, `s = 1/sinh β`, `i = 0..M`. `β = 0` is the
/// uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh<T> {
    pub nodes: Vec<T>,
    /// Largest ratio of adjacent spacings that was allowed when building.
    pub grading: T,
    pub inner_scale: T,
    pub beta: T,
}

/// Spacing at the origin relative to the inner scale.
const INNER_RESOLUTION: f64 = 0.025;

fn sinh_nodes<T: Real>(beta: T, m: usize) -> Vec<T> {
    let mf = T::from_usize_lossy(m);
    let mut nodes: Vec<T> = if beta == T::zero() {
        (0..=m).map(|i| T::from_usize_lossy(i) / mf).collect()
    } else {
        let s = beta.sinh();
        (0..=m).map(|i| (beta * T::from_usize_lossy(i) / mf).sinh() / s).collect()
    };
    nodes[m] = T::one();
    nodes
}

/// Solves `sinh β / β = k` for `k > 1`.
fn solve_beta<T: Real>(k: T) -> T {
    let f = |b: T| {
        // ln sinh b, stable for large b
        let lsh = if b > c(20.0) { b - T::LN_2() + (-(b + b)).exp().ln_1p() } else { b.sinh().ln() };
        lsh - b.ln() - k.ln()
    };
    let (mut lo, mut hi) = (c::<T>(1e-6), c::<T>(1e3));
    for _ in 0..200 {
        let mid = (lo + hi) * c(0.5);
        if f(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * c(0.5)
}

/// Builds a mesh with spacing `mu_hint/40` at the origin.
pub fn build_mesh<T: Real>(mu_hint: T, m: usize, grading: T) -> Result<RadialMesh<T>> {
    if !(mu_hint > T::zero() && mu_hint < c(0.1)) {
        return Err(Error::InvalidArgument(format!("mu_hint must lie in (0, 0.1), got {mu_hint}")));
    }
    if m < 200 {
        return Err(Error::InvalidArgument(format!("mesh needs at least 200 intervals, got {m}")));
    }
    if !(grading > T::one()) {
        return Err(Error::InvalidArgument(format!("grading must exceed 1, got {grading}")));
    }
    let delta = mu_hint * c(INNER_RESOLUTION);
    let k = T::one() / (T::from_usize_lossy(m) * delta);
    let beta = if k > T::one() + c(1e-12) { solve_beta(k) } else { T::zero() };
    let nodes = sinh_nodes(beta, m);
    let mesh = RadialMesh { nodes, grading, inner_scale: mu_hint, beta };
    let ratio = mesh.max_spacing_ratio();
    if ratio > grading {
        return Err(Error::Parameter(format!(
            "{m} intervals cannot resolve scale {mu_hint}: adjacent spacing ratio {ratio} exceeds grading {grading}"
        )));
    }
    let inner = mesh.nodes.iter().filter(|&&r| r <= mu_hint * c(10.0)).count();
    if inner < 20 {
        return Err(Error::Parameter(format!("only {inner} nodes inside [0, 10·{mu_hint}]")));
    }
    Ok(mesh)
}

impl<T: Real> RadialMesh<T> {
    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Same map with every spacing halved.
    pub fn refined(&self) -> Self {
        let m = 2 * self.intervals();
        Self { nodes: sinh_nodes(self.beta, m), grading: self.grading, inner_scale: self.inner_scale, beta: self.beta }
    }

    pub fn max_spacing_ratio(&self) -> T {
        self.nodes
            .windows(3)
            .map(|w| {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                (b / a).max(a / b)
            })
            .fold(T::one(), T::max)
    }

    pub fn min_spacing(&self) -> T {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), T::min)
    }

    /// Face coefficients `r_{i+½}/(r_{i+1} − r_i)` and cell volumes `V_i`
    /// (per unit angle) for the unknown nodes `0..M`.
    pub fn stencil(&self) -> (Vec<T>, Vec<T>) {
        let m = self.intervals();
        let half = c::<T>(0.5);
        let faces: Vec<T> = (0..m).map(|i| (self.nodes[i] + self.nodes[i + 1]) * half).collect();
        let a = (0..m).map(|i| faces[i] / (self.nodes[i + 1] - self.nodes[i])).collect();
        let vol = (0..m)
            .map(|i| {
                let inner = if i == 0 { T::zero() } else { faces[i - 1] * faces[i - 1] };
                (faces[i] * faces[i] - inner) * half
            })
            .collect();
        (a, vol)
    }

    /// Index `i` with `r_i ≤ r < r_{i+1}` (clamped).
    pub fn locate(&self, r: T) -> usize {
        let m = self.intervals();
        match self.nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        }
    }
}

/// Discrete solution `(u, v)` at the mesh nodes, boundary values included.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPair<T> {
    pub mesh: RadialMesh<T>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub ep: ExponentPair<T>,
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> RadialPair<T> {
    pub fn u0(&self) -> T {
        self.u[0]
    }

    pub fn v0(&self) -> T {
        self.v[0]
    }

    /// `μ = (p·v(0)^{p−1})^{−1/2}`.
    pub fn mu(&self) -> T {
        scaling_parameter(self.ep.p, self.v[0])
    }

    /// `μ̂ = (q·u(0)^{q−1})^{−1/2}`.
    pub fn mu_hat(&self) -> T {
        scaling_parameter(self.ep.q, self.u[0])
    }

    /// Value and derivative of `field` at `r` by four-point Lagrange
    /// interpolation; the profile is extended evenly through `r = 0`.
    pub fn eval_field(&self, field: &[T], r: T) -> (T, T) {
        let nodes = &self.mesh.nodes;
        let m = self.mesh.intervals();
        let r = r.abs().min(T::one());
        let i = self.mesh.locate(r) as isize;
        let pick = |k: isize| -> (T, T) {
            if k < 0 {
                (-nodes[(-k) as usize], field[(-k) as usize])
            } else {
                (nodes[k as usize], field[k as usize])
            }
        };
        let start = (i - 1).min(m as isize - 3);
        let pts: Vec<(T, T)> = (start..start + 4).map(pick).collect();
        let mut val = T::zero();
        let mut der = T::zero();
        for j in 0..4 {
            let mut w = T::one();
            let mut dw = T::zero();
            for k in 0..4 {
                if k == j {
                    continue;
                }
                let denom = pts[j].0 - pts[k].0;
                // product rule, accumulated
                dw = dw * (r - pts[k].0) / denom + w / denom;
                w = w * (r - pts[k].0) / denom;
            }
            val += w * pts[j].1;
            der += dw * pts[j].1;
        }
        (val, der)
    }

    pub fn eval_u(&self, r: T) -> (T, T) {
        self.eval_field(&self.u, r)
    }

    pub fn eval_v(&self, r: T) -> (T, T) {
        self.eval_field(&self.v, r)
    }

    /// `u'` and `v'` at the face midpoints `r_{i+½}` by centred differences.
    pub fn face_derivatives(&self) -> (Vec<T>, Vec<T>, Vec<T>) {
        let n = &self.mesh.nodes;
        let mid = n.windows(2).map(|w| (w[0] + w[1]) * c(0.5)).collect();
        let du = (0..n.len() - 1).map(|i| (self.u[i + 1] - self.u[i]) / (n[i + 1] - n[i])).collect();
        let dv = (0..n.len() - 1).map(|i| (self.v[i + 1] - self.v[i]) / (n[i + 1] - n[i])).collect();
        (mid, du, dv)
    }

    /// Both profiles are nonincreasing in `r`.
    pub fn is_monotone(&self) -> bool {
        self.u.windows(2).all(|w| w[1] <= w[0]) && self.v.windows(2).all(|w| w[1] <= w[0])
    }

    /// `∫_D ∇u·∇v = 2π ∫₀¹ u'v' r dr` by the midpoint rule on faces.
    pub fn gradient_pairing(&self) -> T {
        let (mid, du, dv) = self.face_derivatives();
        let n = &self.mesh.nodes;
        let s: T = (0..mid.len()).map(|i| du[i] * dv[i] * mid[i] * (n[i + 1] - n[i])).sum();
        (T::PI() + T::PI()) * s
    }
}

/// `(p·v^{p−1})^{−1/2}`, evaluated in the log domain.
pub fn scaling_parameter<T: Real>(p: T, v: T) -> T {
    (-(p.ln() + (p - T::one()) * v.ln()) * c(0.5)).exp()
}

/// `x^p = exp(p log x)` with `x` clamped below at `1e−300`.
#[inline]
fn pow_log<T: Real>(x: T, p: T) -> T {
    (p * x.max(c(1e-300)).ln()).exp()
}

/// Newton controls for [`solve_radial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions<T> {
    /// Residual target relative to `max(1, ‖v^p‖∞, ‖u^q‖∞)`.
    pub tol: T,
    pub max_iterations: usize,
    /// Smallest step fraction tried while restoring positivity.
    pub damping_floor: T,
    /// Rescale each iterate onto the discrete Nehari set before the Newton
    /// step while the residual exceeds `1e−3` of its scale (see
    /// [`nehari_rescale`]).
    pub rescale: bool,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self { tol: c(1e-10), max_iterations: 50, damping_floor: c(1e-12), rescale: true }
    }
}

/// Starting point for [`solve_radial`].
#[derive(Debug, Clone, Copy)]
pub enum RadialInit<'a, T> {
    /// `u = v = A(1 − r²)`.
    Cap(T),
    /// Predicted bubble with first-order corrections.
    Bubble,
    /// A previous solution, rescaled to the new exponents and mesh.
    Warm(&'a RadialPair<T>),
    /// Explicit nodal values on the target mesh.
    Values(&'a [T], &'a [T]),
}

/// Failure of [`solve_radial`] with the last Newton iterate.
#[derive(Debug, Clone)]
pub struct SolveFailure<T> {
    pub error: Error,
    pub last: Option<RadialPair<T>>,
}

impl<T> std::fmt::Display for SolveFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: std::fmt::Debug> std::error::Error for SolveFailure<T> {}

impl<T> From<SolveFailure<T>> for Error {
    fn from(f: SolveFailure<T>) -> Self {
        f.error
    }
}

impl<T> From<Error> for SolveFailure<T> {
    fn from(error: Error) -> Self {
        Self { error, last: None }
    }
}

/// Residuals `F_u = L u − V v^p`, `F_v = L v − V u^q` at the unknown nodes,
/// divided by the cell volumes. The fluxes use the increments
/// `d_i = u_i − u_{i+1}` directly so that no cancellation occurs.
fn residual<T: Real>(a: &[T], vol: &[T], s: &State<T>, ep: &ExponentPair<T>) -> (Vec<T>, Vec<T>, T) {
    let m = a.len();
    let mut fu = vec![T::zero(); m];
    let mut fv = vec![T::zero(); m];
    let mut scale = T::one();
    for i in 0..m {
        let mut lu = a[i] * s.du[i];
        let mut lv = a[i] * s.dv[i];
        if i > 0 {
            lu -= a[i - 1] * s.du[i - 1];
            lv -= a[i - 1] * s.dv[i - 1];
        }
        let vp = pow_log(s.v[i], ep.p);
        let uq = pow_log(s.u[i], ep.q);
        scale = scale.max(vp).max(uq);
        fu[i] = lu / vol[i] - vp;
        fv[i] = lv / vol[i] - uq;
    }
    (fu, fv, scale)
}

/// Newton state: node values and their increments `d_i = x_i − x_{i+1}`.
struct State<T> {
    u: Vec<T>,
    v: Vec<T>,
    du: Vec<T>,
    dv: Vec<T>,
}

impl<T: Real> State<T> {
    fn from_values(u: Vec<T>, v: Vec<T>) -> Self {
        let diff = |x: &[T]| x.windows(2).map(|w| w[0] - w[1]).collect();
        Self { du: diff(&u), dv: diff(&v), u, v }
    }

    fn resum(&mut self) {
        let m = self.du.len();
        self.u[m] = T::zero();
        self.v[m] = T::zero();
        for i in (0..m).rev() {
            self.u[i] = self.u[i + 1] + self.du[i];
            self.v[i] = self.v[i + 1] + self.dv[i];
        }
    }
}

/// Factors `(α, β)` such that `(αu, βv)` satisfies the discrete identities
/// `⟨v, Lu⟩ = Σ V v^{p+1}` and `⟨u, Lv⟩ = Σ V u^{q+1}`, which every solution
/// obeys. The positive solution is a mountain-pass point whose unstable
/// direction is essentially the amplitude; fixing the amplitude this way
/// lets Newton start from guesses of the wrong size.
fn nehari_rescale<T: Real>(a: &[T], vol: &[T], s: &State<T>, ep: &ExponentPair<T>) -> Option<(T, T)> {
    let m = a.len();
    // ⟨v, Lu⟩ = Σ a_i d^u_i d^v_i
    let pairing: T = (0..m).map(|i| a[i] * s.du[i] * s.dv[i]).sum();
    if !(pairing > T::zero()) {
        return None;
    }
    let log_sum = |f: &dyn Fn(usize) -> T| -> T {
        let mx = (0..m).map(f).fold(T::neg_infinity(), T::max);
        mx + (0..m).map(|i| (f(i) - mx).exp()).sum::<T>().ln()
    };
    let floor = c::<T>(1e-300);
    let lbv = log_sum(&|i| vol[i].ln() + (ep.p + T::one()) * s.v[i].max(floor).ln());
    let lbu = log_sum(&|i| vol[i].ln() + (ep.q + T::one()) * s.u[i].max(floor).ln());
    let la = pairing.ln();
    let (xu, xv) = (lbu - la, lbv - la);
    let ln_alpha = -(ep.p * xu + xv) / (ep.p * ep.q - T::one());
    let ln_beta = ep.q * ln_alpha + xu;
    let (al, be) = (ln_alpha.exp(), ln_beta.exp());
    (al.is_finite() && be.is_finite() && al > T::zero() && be > T::zero()).then_some((al, be))
}

fn residual_norm<T: Real>(fu: &[T], fv: &[T]) -> T {
    norm_inf(fu).max(norm_inf(fv))
}

/// Damped Newton for the discrete radial system on `mesh`.
pub fn solve_radial<T: Real>(
    ep: &ExponentPair<T>,
    mesh: &RadialMesh<T>,
    init: RadialInit<'_, T>,
    opts: &NewtonOptions<T>,
) -> Result<RadialPair<T>, SolveFailure<T>> {
    let (mut u, mut v) = initial_values(ep, mesh, init)?;
    let m = mesh.intervals();
    if u.len() != m + 1 || v.len() != m + 1 {
        return Err(Error::InvalidArgument(format!("initial values need {} entries", m + 1)).into());
    }
    if u[..m].iter().chain(&v[..m]).any(|&x| !(x > T::zero())) {
        return Err(Error::InvalidArgument("initial guess must be positive at interior nodes".into()).into());
    }
    u[m] = T::zero();
    v[m] = T::zero();
    let mut st = State::from_values(u, v);
    let (a, vol) = mesh.stencil();
    let pair = |u: &[T], v: &[T], res: T, it: usize| RadialPair {
        mesh: mesh.clone(),
        u: u.to_vec(),
        v: v.to_vec(),
        ep: *ep,
        residual: res,
        iterations: it,
    };
    let (mut fu, mut fv, mut scale) = residual(&a, &vol, &st, ep);
    let mut res = residual_norm(&fu, &fv);
    for it in 0..=opts.max_iterations {
        debug!("radial p={} newton {it}: residual {:e} (scale {:e})", ep.p, res.to_f64_lossy(), scale.to_f64_lossy());
        if res <= opts.tol * scale {
            if st.v[0] < c(1e-8) || st.u[0] < c(1e-8) {
                return Err(SolveFailure {
                    error: Error::Positivity(format!("p={}: iterate collapsed onto the trivial solution", ep.p)),
                    last: Some(pair(&st.u, &st.v, res, it)),
                });
            }
            return Ok(pair(&st.u, &st.v, res, it));
        }
        if it == opts.max_iterations {
            break;
        }
        if opts.rescale && res > c::<T>(1e-3) * scale {
            if let Some((al, be)) = nehari_rescale(&a, &vol, &st, ep) {
                st.du.iter_mut().for_each(|d| *d *= al);
                st.dv.iter_mut().for_each(|d| *d *= be);
                st.resum();
                let r = residual(&a, &vol, &st, ep);
                (fu, fv, _) = r;
                res = residual_norm(&fu, &fv);
            }
        }
        // interleaved unknowns (u_i, v_i) -> (2i, 2i+1), rows scaled by V_i
        let mut jac = BandMatrix::zeros(2 * m, 2, 2);
        let mut rhs = vec![T::zero(); 2 * m];
        for i in 0..m {
            let (ru, rv) = (2 * i, 2 * i + 1);
            let mut diag = a[i];
            if i > 0 {
                diag += a[i - 1];
                jac.add(ru, ru - 2, -a[i - 1]);
                jac.add(rv, rv - 2, -a[i - 1]);
            }
            if i + 1 < m {
                jac.add(ru, ru + 2, -a[i]);
                jac.add(rv, rv + 2, -a[i]);
            }
            jac.add(ru, ru, diag);
            jac.add(rv, rv, diag);
            let dvp = ep.p * pow_log(st.v[i], ep.p - T::one());
            let duq = ep.q * pow_log(st.u[i], ep.q - T::one());
            jac.add(ru, rv, -vol[i] * dvp);
            jac.add(rv, ru, -vol[i] * duq);
            rhs[ru] = -fu[i] * vol[i];
            rhs[rv] = -fv[i] * vol[i];
        }
        let lu = jac.factor().map_err(|e| SolveFailure { error: e, last: Some(pair(&st.u, &st.v, res, it)) })?;
        let step = lu.solve(&rhs);
        let mut alpha = T::one();
        loop {
            let ok = (0..m).all(|i| st.u[i] + alpha * step[2 * i] > T::zero() && st.v[i] + alpha * step[2 * i + 1] > T::zero());
            if ok {
                break;
            }
            alpha *= c(0.5);
            if alpha < opts.damping_floor {
                return Err(SolveFailure {
                    error: Error::Positivity(format!("p={}: step damping reached {:e}", ep.p, alpha.to_f64_lossy())),
                    last: Some(pair(&st.u, &st.v, res, it)),
                });
            }
        }
        let at = |k: usize| if k < 2 * m { step[k] } else { T::zero() };
        for i in 0..m {
            st.du[i] += alpha * (step[2 * i] - at(2 * i + 2));
            st.dv[i] += alpha * (step[2 * i + 1] - at(2 * i + 3));
        }
        st.resum();
        let r = residual(&a, &vol, &st, ep);
        fu = r.0;
        fv = r.1;
        scale = r.2;
        res = residual_norm(&fu, &fv);
        if !res.is_finite() {
            return Err(SolveFailure {
                error: Error::NoConvergence {
                    context: format!("radial Newton at p={}", ep.p),
                    iterations: it + 1,
                    residual: f64::INFINITY,
                },
                last: Some(pair(&st.u, &st.v, res, it + 1)),
            });
        }
    }
    Err(SolveFailure {
        error: Error::NoConvergence {
            context: format!("radial Newton at p={}", ep.p),
            iterations: opts.max_iterations,
            residual: res.to_f64_lossy(),
        },
        last: Some(pair(&st.u, &st.v, res, opts.max_iterations)),
    })
}

fn initial_values<T: Real>(ep: &ExponentPair<T>, mesh: &RadialMesh<T>, init: RadialInit<'_, T>) -> Result<(Vec<T>, Vec<T>)> {
    match init {
        RadialInit::Cap(amp) => {
            let u: Vec<T> = mesh.nodes.iter().map(|&r| amp * (T::one() - r * r)).collect();
            Ok((u.clone(), u))
        }
        RadialInit::Values(u, v) => Ok((u.to_vec(), v.to_vec())),
        RadialInit::Bubble => bubble_guess(ep, mesh),
        RadialInit::Warm(prev) => Ok(warm_start(prev, ep, mesh)),
    }
}

/// Predicted bubble `v = V(1 + (U + t*/p)/p)`, `u = V(1 + (U − σ + s*/p)/p)`
/// at `ρ = r/μ` with the predicted `V`, as nodal values `(u, v)` on `mesh`.
pub fn bubble_guess<T: Real>(ep: &ExponentPair<T>, mesh: &RadialMesh<T>) -> Result<(Vec<T>, Vec<T>)> {
    let tables = SpecialTables::new()?;
    let pred = predict_rates(ep, T::zero());
    let k = CorrectionConstants::new(ep.theta, ep.theta * pred.v_max.ln());
    Ok(inner_profile_guess(ep, mesh, pred.v_max, |rho| {
        let cv = correction_profiles(rho, &k, &tables);
        (cv.t_star, cv.s_star)
    }))
}

/// `v = V(1 + (U + a(ρ)/p)/p)`, `u = V(1 + (U − σ + b(ρ)/p)/p)` with
/// `ρ = r/μ`, `μ = (pV^{p−1})^{−1/2}`, `σ = θ log V`, minus `r²` times the
/// boundary value so that both vanish at `r = 1`, clipped at `1e−12`.
fn inner_profile_guess<T: Real, F: Fn(T) -> (T, T)>(ep: &ExponentPair<T>, mesh: &RadialMesh<T>, vmax: T, corr: F) -> (Vec<T>, Vec<T>) {
    let p = ep.p;
    let mu = scaling_parameter(p, vmax);
    let sigma = ep.theta * vmax.ln();
    let prof = |r: T| {
        let rho = r / mu;
        let uu = bubble_radial(rho * rho, T::zero());
        let (a, b) = corr(rho);
        (vmax * (T::one() + (uu + a / p) / p), vmax * (T::one() + (uu - sigma + b / p) / p))
    };
    let (v1, u1) = prof(T::one());
    let floor = c::<T>(1e-12);
    let m = mesh.intervals();
    let mut u = Vec::with_capacity(m + 1);
    let mut v = Vec::with_capacity(m + 1);
    for &r in &mesh.nodes {
        let (vv, uu) = prof(r);
        v.push((vv - v1 * r * r).max(floor));
        u.push((uu - u1 * r * r).max(floor));
    }
    (u, v)
}

/// Rescales `prev` to the exponents `ep` in inner variables: the bubble part
/// is kept, the first-order remainders `p(z − U)` and `p(w − U + σ)` are
/// carried over and continued linearly in `log ρ` beyond `ρ = 10³`.
fn warm_start<T: Real>(prev: &RadialPair<T>, ep: &ExponentPair<T>, mesh: &RadialMesh<T>) -> (Vec<T>, Vec<T>) {
    if prev.ep == *ep && prev.mesh == *mesh {
        return (prev.u.clone(), prev.v.clone());
    }
    let (pp, vp0) = (prev.ep.p, prev.v0());
    let mu_p = prev.mu();
    let sigma_p = prev.ep.theta * vp0.ln();
    let pred_new = predict_rates(ep, T::zero());
    let pred_old = predict_rates(&prev.ep, T::zero());
    // carry the observed offset from the prediction, which decays like 1/p²
    let ratio = pp / ep.p;
    let vmax = pred_new.v_max + (vp0 - pred_old.v_max) * ratio * ratio;
    let rem = |rho: T| -> (T, T) {
        let (v, _) = prev.eval_v(rho * mu_p);
        let (u, _) = prev.eval_u(rho * mu_p);
        let uu = bubble_radial(rho * rho, T::zero());
        let z = pp * (v / vp0 - T::one());
        let w = pp * (u / vp0 - T::one());
        (pp * (z - uu), pp * (w - uu + sigma_p))
    };
    let rho_c = c::<T>(1e3).min(c::<T>(0.1) / mu_p);
    let (a_c, b_c) = rem(rho_c);
    let (a_d, b_d) = rem(rho_c * c(0.9));
    let l = -(c::<T>(0.9)).ln();
    let (sa, sb) = ((a_c - a_d) / l, (b_c - b_d) / l);
    inner_profile_guess(ep, mesh, vmax, |rho| {
        if rho <= rho_c {
            rem(rho)
        } else {
            let t = (rho / rho_c).ln();
            (a_c + sa * t, b_c + sb * t)
        }
    })
}

/// How continuation builds meshes: `M` intervals, grading bound, and the
/// inner scale `μ_pred · mu_factor` (capped below 0.1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPolicy<T> {
    pub intervals: usize,
    pub grading: T,
    pub mu_factor: T,
}

impl<T: Real> Default for MeshPolicy<T> {
    fn default() -> Self {
        Self { intervals: 16000, grading: c(1.05), mu_factor: T::one() }
    }
}

impl<T: Real> MeshPolicy<T> {
    /// Mesh for exponents `ep` with inner scale from the predicted `μ`.
    pub fn mesh_for(&self, ep: &ExponentPair<T>) -> Result<RadialMesh<T>> {
        let mu = predict_rates(ep, T::zero()).mu * self.mu_factor;
        build_mesh(mu.min(c(0.09)), self.intervals, self.grading)
    }
}

/// Solves at `p` with `θ` on the policy's mesh, from the cap guess when
/// `p < 5` and from the bubble guess otherwise.
pub fn solve_radial_direct<T: Real>(
    p: T,
    theta: T,
    policy: &MeshPolicy<T>,
    opts: &NewtonOptions<T>,
) -> Result<RadialPair<T>, SolveFailure<T>> {
    let ep = ExponentPair::with_theta(p, theta)?;
    let mesh = policy.mesh_for(&ep)?;
    let init = if p < c(5.0) { RadialInit::Cap(c(2.0)) } else { RadialInit::Bubble };
    solve_radial(&ep, &mesh, init, opts)
}

/// Smallest continuation step before giving up.
pub const MIN_STEP: f64 = 0.25;

/// Solves along increasing `p_grid`, each solve warm-started from the
/// previous one; a failed step is bisected down to [`MIN_STEP`]. Returns the
/// solutions at the grid values only.
pub fn continue_radial<T: Real>(
    p_grid: &[T],
    theta: T,
    policy: &MeshPolicy<T>,
    opts: &NewtonOptions<T>,
) -> Result<Vec<RadialPair<T>>> {
    if p_grid.is_empty() {
        return Ok(Vec::new());
    }
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("p grid must be strictly increasing".into()));
    }
    let first = solve_radial_direct(p_grid[0], theta, policy, opts).map_err(|f| Error::Continuation {
        last_good_p: f64::NAN,
        reason: format!("initial solve at p={} failed: {}", p_grid[0], f.error),
    })?;
    info!("continuation: p={} v(0)={}", p_grid[0], first.v0());
    let mut out = vec![first];
    for &target in &p_grid[1..] {
        let next = continue_to(out.last().unwrap(), target, policy, opts)?;
        info!("continuation: p={target} v(0)={}", next.v0());
        out.push(next);
    }
    Ok(out)
}

/// Continues `current` up to `target`, keeping its `θ`; a failed step is
/// bisected down to [`MIN_STEP`].
pub fn continue_to<T: Real>(current: &RadialPair<T>, target: T, policy: &MeshPolicy<T>, opts: &NewtonOptions<T>) -> Result<RadialPair<T>> {
    if !(target > current.ep.p) {
        return Err(Error::InvalidArgument(format!("continuation target {target} must exceed p = {}", current.ep.p)));
    }
    let theta = current.ep.theta;
    let min_step = c::<T>(MIN_STEP);
    let mut current = current.clone();
    while current.ep.p < target {
        let mut step = target - current.ep.p;
        loop {
            let p = current.ep.p + step;
            let attempt = ExponentPair::with_theta(p, theta).map_err(SolveFailure::from).and_then(|ep| {
                let mesh = policy.mesh_for(&ep)?;
                solve_radial(&ep, &mesh, RadialInit::Warm(&current), opts)
            });
            match attempt {
                Ok(sol) => {
                    debug!("continuation: p={p} in {} Newton steps", sol.iterations);
                    current = sol;
                    break;
                }
                Err(f) => {
                    debug!("continuation: step {step} to p={p} failed: {}", f.error);
                    step *= c(0.5);
                    if step < min_step {
                        return Err(Error::Continuation {
                            last_good_p: current.ep.p.to_f64_lossy(),
                            reason: format!("step fell below {MIN_STEP} ({})", f.error),
                        });
                    }
                }
            }
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mesh_contracts() {
        let m = build_mesh(1e-3f64, 400, 1.15).unwrap();
        assert_eq!(m.nodes.len(), 401);
        assert!(m.min_spacing() <= 1e-4);
        let m = build_mesh(0.05f64, 200, 1.1).unwrap();
        assert!(m.nodes.iter().filter(|&&r| r <= 0.5).count() >= 20);
        assert!(build_mesh(1e-12f64, 200, 1.01).is_err());
        assert!(build_mesh(0.2f64, 400, 1.1).is_err());
    }

    #[test]
    fn refinement_keeps_the_map() {
        let m = build_mesh(1e-3f64, 400, 1.15).unwrap();
        let f = m.refined();
        for i in 0..=400 {
            assert!((f.nodes[2 * i] - m.nodes[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_is_fourth_order() {
        let mesh = build_mesh(0.01f64, 300, 1.1).unwrap();
        let f = |r: f64| 1.0 - r * r + 0.3 * r * r * r * r;
        let vals: Vec<f64> = mesh.nodes.iter().map(|&r| f(r)).collect();
        let ep = ExponentPair::symmetric(2.0).unwrap();
        let pair = RadialPair { mesh, u: vals.clone(), v: vals, ep, residual: 0.0, iterations: 0 };
        for r in [0.0, 0.003, 0.37, 0.999] {
            let (v, d) = pair.eval_u(r);
            assert!((v - f(r)).abs() < 1e-8, "{r}");
            assert!((d - (-2.0 * r + 1.2 * r * r * r)).abs() < 1e-5);
        }
    }
}
