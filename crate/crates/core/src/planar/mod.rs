//! Finite-difference Newton solver for the system on general supported
//! domains at moderate `p`, on a composite grid with one level of local
//! refinement.

mod grid;
mod multilevel;

use std::sync::Arc;

use log::debug;

pub use grid::{build_grid, Grid2D, RefineBox, Site};

use crate::asymptotics::predict_rates;
use crate::error::{Error, Result};
use crate::greenrobin::{GreenModel, KRPoint};
use crate::linalg::{gmres, norm_inf, CsrMatrix, KrylovOptions, Preconditioner};
use multilevel::CompositeMultigrid;
use crate::radial::RadialPair;
use crate::scalar::{c, dist, Point, Real};
use crate::special::{bubble_radial, ExponentPair};

/// Nodal solution `(u, v)` on a [`Grid2D`], zero on the boundary.
#[derive(Debug, Clone)]
pub struct PairField<T> {
    pub grid: Arc<Grid2D<T>>,
    pub u: Vec<T>,
    pub v: Vec<T>,
    pub ep: ExponentPair<T>,
    pub residual: T,
    pub iterations: usize,
    /// Newton steps shortened to keep the iterate positive.
    pub damped_steps: usize,
    pub linear_iterations: usize,
}

impl<T: Real> PairField<T> {
    /// Field with the given nodal values, not yet solved.
    pub fn from_values(grid: Arc<Grid2D<T>>, ep: ExponentPair<T>, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        if u.len() != grid.len() || v.len() != grid.len() {
            return Err(Error::InvalidArgument(format!("field needs {} nodal values", grid.len())));
        }
        Ok(Self { grid, u, v, ep, residual: T::infinity(), iterations: 0, damped_steps: 0, linear_iterations: 0 })
    }

    /// Samples `f(x) → (u, v)` at the nodes.
    pub fn from_fn<F: Fn(Point<T>) -> (T, T)>(grid: Arc<Grid2D<T>>, ep: ExponentPair<T>, f: F) -> Self {
        let (u, v) = grid.points().into_iter().map(f).unzip();
        Self { grid, u, v, ep, residual: T::infinity(), iterations: 0, damped_steps: 0, linear_iterations: 0 }
    }

    /// Radial solution evaluated at `|x − center|`.
    pub fn from_radial(grid: Arc<Grid2D<T>>, sol: &RadialPair<T>, center: Point<T>) -> Self {
        Self::from_fn(grid, sol.ep, |x| {
            let r = dist(x, center);
            (sol.eval_u(r).0.max(c(1e-12)), sol.eval_v(r).0.max(c(1e-12)))
        })
    }

    /// `p∫∇u·∇v` by the discrete Green identity.
    pub fn energy(&self) -> T {
        self.ep.p * self.grid.gradient_pairing(&self.u, &self.v)
    }

    /// Largest spread of nodal values over the orbits of the grid under the
    /// symmetries of the square lattice about `center` (reflections in both
    /// axes and the diagonal). Nodes whose images are not nodes are skipped.
    pub fn symmetry_deviation(&self, center: Point<T>) -> T {
        let g = &self.grid;
        let hh = g.h * c(0.5);
        let ci = ((center[0] - g.origin[0]) / hh).round().to_isize().unwrap();
        let cj = ((center[1] - g.origin[1]) / hh).round().to_isize().unwrap();
        let mut worst = T::zero();
        for (k, &(i, j)) in g.nodes.iter().enumerate() {
            let (a, b) = (i as isize - ci, j as isize - cj);
            for (x, y) in [(-a, b), (a, -b), (-a, -b), (b, a), (-b, a), (b, -a), (-b, -a)] {
                if let Site::Unknown(m) = g.site(ci + x, cj + y) {
                    worst = worst.max((self.u[k] - self.u[m]).abs()).max((self.v[k] - self.v[m]).abs());
                }
            }
        }
        worst
    }

    /// Index of the largest `v`.
    pub fn argmax_v(&self) -> usize {
        (0..self.v.len()).fold(0, |b, k| if self.v[k] > self.v[b] { k } else { b })
    }
}

/// Newton controls for [`solve_planar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarOptions<T> {
    pub tol: T,
    pub max_iterations: usize,
    pub damping_floor: T,
    /// Relative residual reduction of each inner Krylov solve.
    pub linear_tol: T,
    pub rescale: bool,
}

impl<T: Real> Default for PlanarOptions<T> {
    fn default() -> Self {
        Self { tol: c(1e-10), max_iterations: 50, damping_floor: c(1e-12), linear_tol: c(1e-10), rescale: true }
    }
}

/// Additional right-hand sides `(f_u, f_v)`: `−Δu = v^p + f_u`, `−Δv = u^q + f_v`.
pub type Forcing<'a, T> = Option<(&'a [T], &'a [T])>;

#[inline]
fn pow_clip<T: Real>(x: T, p: T) -> T {
    (p * x.max(c(1e-12)).ln()).exp()
}

fn residual<T: Real>(g: &Grid2D<T>, u: &[T], v: &[T], ep: &ExponentPair<T>, forcing: Forcing<'_, T>) -> (Vec<T>, T) {
    let n = g.len();
    let lu = g.laplacian.matvec(u);
    let lv = g.laplacian.matvec(v);
    let mut f = vec![T::zero(); 2 * n];
    let mut scale = T::one();
    for i in 0..n {
        let vp = pow_clip(v[i], ep.p);
        let uq = pow_clip(u[i], ep.q);
        scale = scale.max(vp).max(uq);
        f[i] = lu[i] - vp;
        f[n + i] = lv[i] - uq;
        if let Some((fu, fv)) = forcing {
            f[i] -= fu[i];
            f[n + i] -= fv[i];
        }
    }
    (f, scale)
}

/// Amplitude factors `(α, β)` putting `(αu, βv)` on the discrete Nehari set
/// `⟨v, Lu⟩_w = Σ w v^{p+1}`, `⟨u, Lv⟩_w = Σ w u^{q+1}`.
fn nehari_rescale<T: Real>(g: &Grid2D<T>, u: &[T], v: &[T], ep: &ExponentPair<T>) -> Option<(T, T)> {
    let a = g.gradient_pairing(v, u);
    if !(a > T::zero()) {
        return None;
    }
    let n = g.len();
    let log_sum = |f: &dyn Fn(usize) -> T| -> T {
        let mx = (0..n).map(f).fold(T::neg_infinity(), T::max);
        mx + (0..n).map(|i| (f(i) - mx).exp()).sum::<T>().ln()
    };
    let floor = c::<T>(1e-300);
    let lbv = log_sum(&|i| g.weights[i].ln() + (ep.p + T::one()) * v[i].max(floor).ln());
    let lbu = log_sum(&|i| g.weights[i].ln() + (ep.q + T::one()) * u[i].max(floor).ln());
    let (xu, xv) = (lbu - a.ln(), lbv - a.ln());
    let ln_alpha = -(ep.p * xu + xv) / (ep.p * ep.q - T::one());
    let ln_beta = ep.q * ln_alpha + xu;
    let (al, be) = (ln_alpha.exp(), ln_beta.exp());
    (al.is_finite() && be.is_finite()).then_some((al, be))
}

/// Damped Newton for the discrete system; each step solves the block
/// Jacobian `[[−Δ_h, −p v^{p−1}], [−q u^{q−1}, −Δ_h]]` by restarted GMRES,
/// right-preconditioned on each block by a two-level multigrid cycle for
/// the composite Laplacian.
pub fn solve_planar<T: Real>(init: &PairField<T>, opts: &PlanarOptions<T>) -> Result<PairField<T>> {
    solve_planar_forced(init, None, opts)
}

/// [`solve_planar`] with additional forcing terms.
pub fn solve_planar_forced<T: Real>(init: &PairField<T>, forcing: Forcing<'_, T>, opts: &PlanarOptions<T>) -> Result<PairField<T>> {
    let g = init.grid.clone();
    let ep = init.ep;
    let n = g.len();
    if init.u.iter().chain(&init.v).any(|&x| !(x > T::zero())) {
        return Err(Error::InvalidArgument("initial guess must be positive at interior nodes".into()));
    }
    let mg = CompositeMultigrid::new(&g)?;
    let precond = |r: &[T], z: &mut [T]| {
        let (ra, rb) = r.split_at(n);
        let (za, zb) = z.split_at_mut(n);
        mg.apply(ra, za);
        mg.apply(rb, zb);
    };
    let (mut u, mut v) = (init.u.clone(), init.v.clone());
    let mut damped = 0;
    let mut lin_total = 0;
    let (mut f, mut scale) = residual(&g, &u, &v, &ep, forcing);
    let mut res = norm_inf(&f);
    let kopts = KrylovOptions { rel_tol: opts.linear_tol, max_iterations: 4000, restart: 80 };
    for it in 0..=opts.max_iterations {
        debug!("planar p={} newton {it}: residual {:e}", ep.p, res.to_f64_lossy());
        if res <= opts.tol * scale {
            return Ok(PairField {
                grid: g,
                u,
                v,
                ep,
                residual: res,
                iterations: it,
                damped_steps: damped,
                linear_iterations: lin_total,
            });
        }
        if it == opts.max_iterations {
            break;
        }
        if opts.rescale && forcing.is_none() && res > c::<T>(1e-3) * scale {
            if let Some((al, be)) = nehari_rescale(&g, &u, &v, &ep) {
                u.iter_mut().for_each(|x| *x *= al);
                v.iter_mut().for_each(|x| *x *= be);
                f = residual(&g, &u, &v, &ep, forcing).0;
            }
        }
        let mut trip = Vec::with_capacity(2 * g.laplacian.nnz() + 2 * n);
        for i in 0..n {
            for (j, a) in g.laplacian.row(i) {
                trip.push((i, j, a));
                trip.push((n + i, n + j, a));
            }
            trip.push((i, n + i, -ep.p * pow_clip(v[i], ep.p - T::one())));
            trip.push((n + i, i, -ep.q * pow_clip(u[i], ep.q - T::one())));
        }
        let jac = CsrMatrix::from_triplets(2 * n, 2 * n, &trip);
        let rhs: Vec<T> = f.iter().map(|&x| -x).collect();
        let mut step = vec![T::zero(); 2 * n];
        let stats = gmres(&jac, &rhs, &mut step, &precond, &kopts)?;
        lin_total += stats.iterations;
        let mut alpha = T::one();
        while !(0..n).all(|i| u[i] + alpha * step[i] > T::zero() && v[i] + alpha * step[n + i] > T::zero()) {
            alpha *= c(0.5);
            if alpha < opts.damping_floor {
                return Err(Error::Positivity(format!("planar p={}: step damping reached {:e}", ep.p, alpha.to_f64_lossy())));
            }
        }
        if alpha < T::one() {
            damped += 1;
        }
        for i in 0..n {
            u[i] += alpha * step[i];
            v[i] += alpha * step[n + i];
        }
        let r = residual(&g, &u, &v, &ep, forcing);
        f = r.0;
        scale = r.1;
        res = norm_inf(&f);
        if !res.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence {
        context: format!("planar Newton at p={}", ep.p),
        iterations: opts.max_iterations,
        residual: res.to_f64_lossy(),
    })
}

/// Bubble ansatz around the points of a Kirchhoff-Routh critical
/// configuration: near `x_i`, `V_i(1 + U(|x − x_i|/μ_i)/p)` with the
/// predicted `V_i`, `μ_i` at `Φ_{k,i} = R(x_i) − Σ_{j≠i} G(x_i, x_j)`;
/// away from the points, `(8π√e/p)(1 − log p/(p−1)) Σ G(x, x_i)`. The two
/// are blended smoothly over `|x − x_i| ∈ [pμ_i/2, pμ_i]`; values are
/// clipped below at `1e−12`.
pub fn initial_guess_from_kr<T: Real>(
    model: &GreenModel<T>,
    ep: &ExponentPair<T>,
    kr: &KRPoint<T>,
    grid: Arc<Grid2D<T>>,
) -> Result<PairField<T>> {
    let pts = &kr.config;
    for &x in pts {
        grid.domain.check_interior(x)?;
    }
    let p = ep.p;
    let mut bubbles = Vec::with_capacity(pts.len());
    for (i, &x) in pts.iter().enumerate() {
        let mut phi = model.robin_eval(x)?.value;
        for (j, &y) in pts.iter().enumerate() {
            if j != i {
                phi -= model.green_eval(x, y)?.0;
            }
        }
        let pred = predict_rates(ep, phi);
        bubbles.push((x, pred));
    }
    let sqrt_e = c::<T>(0.5).exp();
    let outer_coef = c::<T>(8.0) * T::PI() * sqrt_e / p * (T::one() - p.ln() / (p - T::one()));
    let floor = c::<T>(1e-12);
    let g2 = grid.clone();
    let points = g2.points();
    let mut u = Vec::with_capacity(points.len());
    let mut v = Vec::with_capacity(points.len());
    for &x in &points {
        let mut outer = T::zero();
        for &(y, _) in &bubbles {
            if dist(x, y) > T::zero() {
                outer += model.green_eval(x, y)?.0;
            }
        }
        outer *= outer_coef;
        let (mut gu, mut gv) = (outer, outer);
        for &(y, pred) in &bubbles {
            let r = dist(x, y);
            let s = r / (p * pred.mu);
            if s >= T::one() {
                continue;
            }
            let rho = r / pred.mu;
            let bub = bubble_radial(rho * rho, T::zero());
            let sigma = ep.theta * pred.v_max.ln();
            let iv = pred.v_max * (T::one() + bub / p);
            let iu = pred.v_max * (T::one() + (bub - sigma) / p);
            // smoothstep from inner (s ≤ 1/2) to outer (s ≥ 1)
            let t = ((s - c(0.5)) * c(2.0)).max(T::zero());
            let w = t * t * (c::<T>(3.0) - c::<T>(2.0) * t);
            gv = iv * (T::one() - w) + gv * w;
            gu = iu * (T::one() - w) + gu * w;
        }
        u.push(gu.max(floor));
        v.push(gv.max(floor));
    }
    PairField::from_values(grid, *ep, u, v)
}
