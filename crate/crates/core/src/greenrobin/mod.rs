//! Dirichlet Green function `G(x,y) = −(1/2π) log|x−y| − H(x,y)`, its regular
//! part `H`, the Robin function `R(x) = H(x,x)`, the Kirchhoff-Routh function
//! and a multistart Newton search for its critical points.
//!
//! Two backends: closed forms (disk by inversion, rectangle by a reflected
//! strip series) and a grid solve of `Δ_x H = 0` with `H = −(1/2π) log|x−y|`
//! on the boundary.

mod domain;
pub mod harmonic;

pub use domain::{DomainKind, DomainSpec};

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{lu_solve, symmetric_eigen, DenseMatrix};
use crate::scalar::{c, dist, Point, Real};
use harmonic::Multigrid;

/// How `H` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend<T> {
    Analytic,
    NumericGrid { h: T },
}

/// Finite-difference step for Robin derivatives on the grid backend.
pub const NUMERIC_FD_STEP: f64 = 1e-4;
/// Relative residual of the harmonic solves.
pub const NUMERIC_SOLVE_TOL: f64 = 1e-13;
const CACHE_CAPACITY: usize = 64;

/// Green function evaluator for one domain.
///
/// The grid backend keeps a memo of harmonic solves keyed by the bit pattern
/// of the source point; concurrent misses on the same key may both compute,
/// which is harmless since the result is deterministic.
pub struct GreenModel<T> {
    pub domain: DomainSpec<T>,
    pub backend: Backend<T>,
    solver: Option<Multigrid<T>>,
    cache: Mutex<HashMap<(u64, u64), Arc<Vec<T>>>>,
}

impl<T: Real> std::fmt::Debug for GreenModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GreenModel").field("domain", &self.domain).field("backend", &self.backend).finish()
    }
}

/// Value, gradient and Hessian of the Robin function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinValue<T> {
    pub value: T,
    pub grad: [T; 2],
    pub hess: [[T; 2]; 2],
}

fn inv_two_pi<T: Real>() -> T {
    T::one() / (T::PI() + T::PI())
}

fn inv_four_pi<T: Real>() -> T {
    T::one() / (c::<T>(4.0) * T::PI())
}

/// `−(1/2π) log|x − y|`, the boundary data of `H(·, y)`.
pub fn fundamental<T: Real>(x: Point<T>, y: Point<T>) -> T {
    -inv_two_pi::<T>() * dist(x, y).ln()
}

impl<T: Real> GreenModel<T> {
    pub fn analytic(domain: DomainSpec<T>) -> Self {
        Self { domain, backend: Backend::Analytic, solver: None, cache: Mutex::new(HashMap::new()) }
    }

    /// Grid backend with spacing `h`.
    pub fn numeric(domain: DomainSpec<T>, h: T) -> Result<Self> {
        let solver = Multigrid::new(&domain, h)?;
        Ok(Self { domain, backend: Backend::NumericGrid { h }, solver: Some(solver), cache: Mutex::new(HashMap::new()) })
    }

    /// Number of cached harmonic solves.
    pub fn cached_solves(&self) -> usize {
        self.cache.lock().map(|m| m.len()).unwrap_or(0)
    }

    fn harmonic_for(&self, y: Point<T>) -> Result<Arc<Vec<T>>> {
        let key = (y[0].to_f64_lossy().to_bits(), y[1].to_f64_lossy().to_bits());
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let solver = self.solver.as_ref().expect("numeric backend");
        let sol = Arc::new(solver.solve(None, |p| fundamental(p, y), c(NUMERIC_SOLVE_TOL))?);
        let mut map = self.cache.lock().expect("cache poisoned");
        if map.len() >= CACHE_CAPACITY {
            map.clear();
        }
        Ok(map.entry(key).or_insert(sol).clone())
    }

    /// `H(x, y)` and `∇_x H(x, y)`.
    pub fn regular_eval(&self, x: Point<T>, y: Point<T>) -> Result<(T, [T; 2])> {
        self.domain.check_interior(x)?;
        self.domain.check_interior(y)?;
        match self.backend {
            Backend::Analytic => Ok(self.analytic_regular(x, y)),
            Backend::NumericGrid { .. } => {
                let sol = self.harmonic_for(y)?;
                let grid = self.solver.as_ref().unwrap().fine();
                Ok(grid.interpolate(&sol, x, |p| fundamental(p, y)))
            }
        }
    }

    fn analytic_regular(&self, x: Point<T>, y: Point<T>) -> (T, [T; 2]) {
        match self.domain.kind {
            DomainKind::Rectangle { width, height } => rect_regular(width, height, x, y),
            _ => {
                let (ce, rho) = self.domain.disk_parameters().unwrap();
                let xs = [(x[0] - ce[0]) / rho, (x[1] - ce[1]) / rho];
                let ys = [(y[0] - ce[0]) / rho, (y[1] - ce[1]) / rho];
                let (h, g) = disk_regular(xs, ys);
                (h - inv_two_pi::<T>() * rho.ln(), [g[0] / rho, g[1] / rho])
            }
        }
    }

    /// `G(x, y)` and `∇_x G(x, y)`.
    pub fn green_eval(&self, x: Point<T>, y: Point<T>) -> Result<(T, [T; 2])> {
        let r = dist(x, y);
        if r == T::zero() {
            return Err(Error::Domain("Green function evaluated at coincident points".into()));
        }
        let (h, gh) = self.regular_eval(x, y)?;
        let s = inv_two_pi::<T>() / (r * r);
        Ok((fundamental(x, y) - h, [-s * (x[0] - y[0]) - gh[0], -s * (x[1] - y[1]) - gh[1]]))
    }

    /// `R(x)` alone (one harmonic solve on the grid backend).
    pub fn robin_value(&self, x: Point<T>) -> Result<T> {
        Ok(self.regular_eval(x, x)?.0)
    }

    fn robin_grad(&self, x: Point<T>) -> Result<[T; 2]> {
        match self.backend {
            Backend::Analytic => {
                // ∇R(x) = 2 ∇_x H(x, y) at y = x by symmetry of H
                let (_, g) = self.regular_eval(x, x)?;
                Ok([g[0] + g[0], g[1] + g[1]])
            }
            Backend::NumericGrid { .. } => {
                let f = |p: Point<T>| self.robin_value(p);
                richardson_gradient(f, x, c(NUMERIC_FD_STEP))
            }
        }
    }

    /// Step for differencing analytic gradients.
    fn gradient_fd_step(&self) -> T {
        match self.backend {
            Backend::Analytic => self.domain.min_dimension() * c(1e-5),
            Backend::NumericGrid { .. } => c(NUMERIC_FD_STEP),
        }
    }

    /// `R(x)`, `∇R(x)` and the Hessian.
    pub fn robin_eval(&self, x: Point<T>) -> Result<RobinValue<T>> {
        self.domain.check_interior(x)?;
        let value = self.robin_value(x)?;
        if let (Backend::Analytic, Some((ce, rho))) = (self.backend, self.domain.disk_parameters()) {
            let xs = [(x[0] - ce[0]) / rho, (x[1] - ce[1]) / rho];
            let d = T::one() - xs[0] * xs[0] - xs[1] * xs[1];
            let pi = T::PI();
            let grad = [xs[0] / (pi * d * rho), xs[1] / (pi * d * rho)];
            let s = T::one() / (pi * rho * rho);
            let mut hess = [[T::zero(); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let delta = if i == j { T::one() / d } else { T::zero() };
                    hess[i][j] = s * (delta + c::<T>(2.0) * xs[i] * xs[j] / (d * d));
                }
            }
            return Ok(RobinValue { value, grad, hess });
        }
        let grad = self.robin_grad(x)?;
        let jac = richardson_jacobian(|p: &[T]| self.robin_grad([p[0], p[1]]).map(|g| g.to_vec()), &[x[0], x[1]], self.gradient_fd_step())?;
        let hess = [
            [jac[(0, 0)], (jac[(0, 1)] + jac[(1, 0)]) * c(0.5)],
            [(jac[(0, 1)] + jac[(1, 0)]) * c(0.5), jac[(1, 1)]],
        ];
        Ok(RobinValue { value, grad, hess })
    }

    /// Value and gradient of `Φ_k` at a flattened configuration.
    fn kr_value_grad(&self, config: &[Point<T>]) -> Result<(T, Vec<T>)> {
        check_config(&self.domain, config)?;
        let k = config.len();
        let mut value = T::zero();
        let mut grad = vec![T::zero(); 2 * k];
        for i in 0..k {
            value += self.robin_value(config[i])?;
            let gr = self.robin_grad(config[i])?;
            grad[2 * i] += gr[0];
            grad[2 * i + 1] += gr[1];
            for j in 0..k {
                if j == i {
                    continue;
                }
                let (g, dg) = self.green_eval(config[i], config[j])?;
                value -= g;
                grad[2 * i] -= dg[0] + dg[0];
                grad[2 * i + 1] -= dg[1] + dg[1];
            }
        }
        Ok((value, grad))
    }

    fn kr_grad_flat(&self, flat: &[T]) -> Result<Vec<T>> {
        Ok(self.kr_value_grad(&unflatten(flat))?.1)
    }

    /// `Φ_k = Σ_i [R(x_i) − Σ_{j≠i} G(x_i, x_j)]` with gradient and
    /// (finite-difference, symmetrised) Hessian.
    pub fn kirchhoff_routh(&self, config: &[Point<T>]) -> Result<KRPoint<T>> {
        let (value, gradient) = self.kr_value_grad(config)?;
        let flat = flatten(config);
        let jac = richardson_jacobian(|p: &[T]| self.kr_grad_flat(p), &flat, self.gradient_fd_step())?;
        let hessian = jac.symmetrized();
        let (eigenvalues, _) = symmetric_eigen(&hessian);
        let min_abs = eigenvalues.iter().fold(T::infinity(), |m, e| m.min(e.abs()));
        Ok(KRPoint {
            config: config.to_vec(),
            value,
            gradient,
            hessian,
            eigenvalues,
            nondegenerate: min_abs > c(NONDEGENERACY_FLOOR),
        })
    }
}

/// A configuration of `k` points with `Φ_k`, its gradient, Hessian and
/// ascending Hessian eigenvalues.
#[derive(Debug, Clone)]
pub struct KRPoint<T> {
    pub config: Vec<Point<T>>,
    pub value: T,
    pub gradient: Vec<T>,
    pub hessian: DenseMatrix<T>,
    pub eigenvalues: Vec<T>,
    pub nondegenerate: bool,
}

impl<T: Real> KRPoint<T> {
    pub fn gradient_norm(&self) -> T {
        crate::linalg::norm(&self.gradient)
    }
}

fn flatten<T: Real>(config: &[Point<T>]) -> Vec<T> {
    config.iter().flat_map(|p| [p[0], p[1]]).collect()
}

fn unflatten<T: Real>(flat: &[T]) -> Vec<Point<T>> {
    flat.chunks(2).map(|w| [w[0], w[1]]).collect()
}

fn check_config<T: Real>(domain: &DomainSpec<T>, config: &[Point<T>]) -> Result<()> {
    for (i, &p) in config.iter().enumerate() {
        domain.check_interior(p)?;
        for &q in &config[..i] {
            if dist(p, q) == T::zero() {
                return Err(Error::Domain("coincident points in configuration".into()));
            }
        }
    }
    Ok(())
}

fn richardson_gradient<T: Real, F: Fn(Point<T>) -> Result<T>>(f: F, x: Point<T>, h: T) -> Result<[T; 2]> {
    let mut g = [T::zero(); 2];
    for axis in 0..2 {
        let diff = |step: T| -> Result<T> {
            let mut a = x;
            let mut b = x;
            a[axis] += step;
            b[axis] -= step;
            Ok((f(a)? - f(b)?) / (step + step))
        };
        let d1 = diff(h)?;
        let d2 = diff(h * c(0.5))?;
        g[axis] = (c::<T>(4.0) * d2 - d1) / c(3.0);
    }
    Ok(g)
}

/// Central-difference Jacobian of a vector field with one Richardson level.
fn richardson_jacobian<T: Real, F: Fn(&[T]) -> Result<Vec<T>>>(f: F, x: &[T], h: T) -> Result<DenseMatrix<T>> {
    let n = x.len();
    let mut jac = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let column = |step: T| -> Result<Vec<T>> {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[j] += step;
            b[j] -= step;
            let (fa, fb) = (f(&a)?, f(&b)?);
            Ok(fa.iter().zip(&fb).map(|(&u, &v)| (u - v) / (step + step)).collect())
        };
        let c1 = column(h)?;
        let c2 = column(h * c(0.5))?;
        for i in 0..n {
            jac.data[i * n + j] = (c::<T>(4.0) * c2[i] - c1[i]) / c(3.0);
        }
    }
    Ok(jac)
}

/// Disk regular part in unit-disk coordinates: `H = −(1/4π) log(1 − 2x·y + |x|²|y|²)`.
fn disk_regular<T: Real>(x: Point<T>, y: Point<T>) -> (T, [T; 2]) {
    let xy = x[0] * y[0] + x[1] * y[1];
    let x2 = x[0] * x[0] + x[1] * x[1];
    let y2 = y[0] * y[0] + y[1] * y[1];
    let d = T::one() - xy - xy + x2 * y2;
    let s = -inv_four_pi::<T>() / d;
    let two = c::<T>(2.0);
    (-inv_four_pi::<T>() * d.ln(), [s * (two * y2 * x[0] - two * y[0]), s * (two * y2 * x[1] - two * y[1])])
}

/// `ln(sinh²(αa) + sin²(αc))` and its partial derivatives in `a` and `c`.
fn strip_log<T: Real>(alpha: T, a: T, cc: T) -> (T, T, T) {
    let sa = (alpha * a).sinh();
    let sc = (alpha * cc).sin();
    let s = sa * sa + sc * sc;
    let two = c::<T>(2.0);
    (s.ln(), alpha * (two * alpha * a).sinh() / s, alpha * (two * alpha * cc).sin() / s)
}

/// Rectangle `[0,w]×[0,h]` regular part from the Green function of the strip
/// `0 < x₂ < b` reflected across `x₁ = 0` and `x₁ = a`:
/// `G = −(1/4π) Σ_k [L(x₁−ξ₁−2ka, x₂−ξ₂) − L(x₁−ξ₁−2ka, x₂+ξ₂)
///      − L(x₁+ξ₁−2ka, x₂−ξ₂) + L(x₁+ξ₁−2ka, x₂+ξ₂)]`,
/// `L(a,c) = ln(sinh²(πa/2b) + sin²(πc/2b))`. The strip runs along the longer
/// side so the image sum converges fast.
fn rect_regular<T: Real>(width: T, height: T, x: Point<T>, y: Point<T>) -> (T, [T; 2]) {
    let swap = height > width;
    let (a, b) = if swap { (height, width) } else { (width, height) };
    let (x, y) = if swap { ([x[1], x[0]], [y[1], y[0]]) } else { (x, y) };
    let alpha = T::PI() / (b + b);
    // images decay like exp(−π(2|k|−1)a/b)
    let kmax = (6.3 * (b / a).to_f64_lossy()).ceil() as i64 + 1;
    let mut rest = T::zero();
    let mut grest = [T::zero(); 2];
    let two_a = a + a;
    let (dy_minus, dy_plus) = (x[1] - y[1], x[1] + y[1]);
    for k in -kmax..=kmax {
        let shift = two_a * T::from_i64(k).unwrap();
        let dx = x[0] - y[0] - shift;
        let dxs = x[0] + y[0] - shift;
        let terms = [(dx, dy_plus, -T::one()), (dxs, dy_minus, -T::one()), (dxs, dy_plus, T::one())];
        for &(aa, cc, sgn) in &terms {
            let (l, la, lc) = strip_log(alpha, aa, cc);
            rest += sgn * l;
            grest[0] += sgn * la;
            grest[1] += sgn * lc;
        }
        if k != 0 {
            let (l, la, lc) = strip_log(alpha, dx, dy_minus);
            rest += l;
            grest[0] += la;
            grest[1] += lc;
        }
    }
    // regular part of the k = 0 direct term: ln(S/r²)
    let (dx, dy) = (x[0] - y[0], dy_minus);
    let r2 = dx * dx + dy * dy;
    let (q, gq) = if alpha * alpha * r2 < c(1e-8) {
        let a2 = alpha * alpha;
        let f = c::<T>(2.0) * a2 / c(3.0);
        (c::<T>(2.0) * alpha.ln() + a2 * (dx * dx - dy * dy) / c(3.0), [f * dx, -f * dy])
    } else {
        let (l, la, lc) = strip_log(alpha, dx, dy);
        (l - r2.ln(), [la - c::<T>(2.0) * dx / r2, lc - c::<T>(2.0) * dy / r2])
    };
    let s = inv_four_pi::<T>();
    let val = s * (q + rest);
    let g = [s * (gq[0] + grest[0]), s * (gq[1] + grest[1])];
    if swap {
        (val, [g[1], g[0]])
    } else {
        (val, g)
    }
}

/// Configurations closer than this are treated as collapsing.
pub const COLLAPSE_DISTANCE: f64 = 1e-4;
/// Converged configurations closer than this are merged.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Gradient norm accepted as a critical point.
pub const CRITICAL_TOL: f64 = 1e-10;
/// Hessian eigenvalues below this in magnitude flag degeneracy.
pub const NONDEGENERACY_FLOOR: f64 = 1e-8;
const MAX_NEWTON: usize = 80;

/// Fate of one Newton run.
#[derive(Debug, Clone, PartialEq)]
pub enum StartOutcome {
    Converged { iterations: usize },
    Collapsed { iterations: usize, min_distance: f64 },
    Escaped { iterations: usize },
    Stalled { iterations: usize, grad_norm: f64 },
}

/// Result of a multistart search.
#[derive(Debug, Clone)]
pub struct KrSearch<T> {
    pub points: Vec<KRPoint<T>>,
    pub outcomes: Vec<StartOutcome>,
}

impl<T> KrSearch<T> {
    pub fn diagnostic(&self) -> String {
        let count = |f: fn(&StartOutcome) -> bool| self.outcomes.iter().filter(|o| f(o)).count();
        format!(
            "{} starts: {} converged, {} collapsed, {} escaped, {} stalled; {} distinct critical points",
            self.outcomes.len(),
            count(|o| matches!(o, StartOutcome::Converged { .. })),
            count(|o| matches!(o, StartOutcome::Collapsed { .. })),
            count(|o| matches!(o, StartOutcome::Escaped { .. })),
            count(|o| matches!(o, StartOutcome::Stalled { .. })),
            self.points.len()
        )
    }
}

fn min_pair_distance<T: Real>(config: &[Point<T>]) -> T {
    let mut m = T::infinity();
    for i in 0..config.len() {
        for j in 0..i {
            m = m.min(dist(config[i], config[j]));
        }
    }
    m
}

fn admissible<T: Real>(domain: &DomainSpec<T>, config: &[Point<T>]) -> bool {
    config.iter().all(|&p| domain.boundary_distance(p) > domain.min_dimension() * c(1e-6))
        && min_pair_distance(config) >= c(COLLAPSE_DISTANCE)
}

fn newton_run<T: Real>(model: &GreenModel<T>, start: &[Point<T>]) -> (StartOutcome, Option<Vec<Point<T>>>) {
    let domain = &model.domain;
    let mut x = flatten(start);
    let norm = |v: &[T]| crate::linalg::norm(v);
    let mut g = match model.kr_grad_flat(&x) {
        Ok(g) => g,
        Err(_) => return (StartOutcome::Escaped { iterations: 0 }, None),
    };
    for it in 0..MAX_NEWTON {
        let gn = norm(&g);
        if gn <= c(CRITICAL_TOL) {
            return (StartOutcome::Converged { iterations: it }, Some(unflatten(&x)));
        }
        let jac = match richardson_jacobian(|p: &[T]| model.kr_grad_flat(p), &x, model.gradient_fd_step()) {
            Ok(j) => j.symmetrized(),
            Err(_) => return (StartOutcome::Escaped { iterations: it }, None),
        };
        let neg: Vec<T> = g.iter().map(|&v| -v).collect();
        let dir = lu_solve(&jac, &neg).unwrap_or(neg);
        let mut alpha = T::one();
        let mut accepted = None;
        while alpha > c(1e-10) {
            let trial: Vec<T> = x.iter().zip(&dir).map(|(&a, &d)| a + alpha * d).collect();
            let cfg = unflatten(&trial);
            if cfg.iter().all(|&p| domain.contains(p)) && min_pair_distance(&cfg) > T::zero() {
                if let Ok(gt) = model.kr_grad_flat(&trial) {
                    if norm(&gt) < (T::one() - c::<T>(1e-4) * alpha) * gn {
                        accepted = Some((trial, gt));
                        break;
                    }
                }
            }
            alpha *= c(0.5);
        }
        match accepted {
            Some((xn, gt)) => {
                x = xn;
                g = gt;
            }
            None => {
                return (StartOutcome::Stalled { iterations: it, grad_norm: gn.to_f64_lossy() }, None);
            }
        }
        let cfg = unflatten(&x);
        let md = min_pair_distance(&cfg);
        if md < c(COLLAPSE_DISTANCE) {
            return (StartOutcome::Collapsed { iterations: it + 1, min_distance: md.to_f64_lossy() }, None);
        }
        if !admissible(domain, &cfg) {
            return (StartOutcome::Escaped { iterations: it + 1 }, None);
        }
    }
    let gn = norm(&g);
    if gn <= c(CRITICAL_TOL) {
        (StartOutcome::Converged { iterations: MAX_NEWTON }, Some(unflatten(&x)))
    } else {
        (StartOutcome::Stalled { iterations: MAX_NEWTON, grad_norm: gn.to_f64_lossy() }, None)
    }
}

/// Distance between configurations up to relabelling of the points.
fn config_distance<T: Real>(a: &[Point<T>], b: &[Point<T>]) -> T {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }
    let k = a.len();
    let candidates = if k <= 6 { perms(k) } else { vec![(0..k).collect()] };
    candidates
        .iter()
        .map(|p| (0..k).fold(T::zero(), |m, i| m.max(dist(a[i], b[p[i]]))))
        .fold(T::infinity(), |m, d| m.min(d))
}

/// Damped Newton on `∇Φ_k` from every start (in parallel); converged
/// configurations are deduplicated and classified by their Hessian spectrum.
pub fn find_kr_critical<T: Real>(model: &GreenModel<T>, k: usize, starts: &[Vec<Point<T>>]) -> Result<KrSearch<T>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    for s in starts {
        if s.len() != k {
            return Err(Error::InvalidArgument(format!("start has {} points, expected {k}", s.len())));
        }
        check_config(&model.domain, s)?;
    }
    let runs: Vec<(StartOutcome, Option<Vec<Point<T>>>)> = starts.par_iter().map(|s| newton_run(model, s)).collect();
    let mut points: Vec<KRPoint<T>> = Vec::new();
    let mut outcomes = Vec::with_capacity(runs.len());
    for (outcome, cfg) in runs {
        outcomes.push(outcome);
        if let Some(cfg) = cfg {
            if points.iter().any(|p| config_distance(&p.config, &cfg) < c(DEDUP_RADIUS)) {
                continue;
            }
            points.push(model.kirchhoff_routh(&cfg)?);
        }
    }
    let search = KrSearch { points, outcomes };
    log::debug!("{}", search.diagnostic());
    Ok(search)
}

/// `n` random configurations of `k` interior points, kept away from the
/// boundary and from each other.
pub fn random_starts<T: Real>(domain: &DomainSpec<T>, k: usize, n: usize, seed: u64) -> Vec<Vec<Point<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = domain.min_dimension() * c(0.02);
    let sep = domain.min_dimension() * c(0.05);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut cfg: Vec<Point<T>> = Vec::with_capacity(k);
        while cfg.len() < k {
            let p = domain.sample(c(rng.gen::<f64>()), c(rng.gen::<f64>()));
            if domain.boundary_distance(p) > margin && cfg.iter().all(|&q| dist(p, q) > sep) {
                cfg.push(p);
            }
        }
        out.push(cfg);
    }
    out
}
