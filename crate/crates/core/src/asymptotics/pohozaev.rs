use super::Solution;
use crate::error::Result;
use crate::greenrobin::GreenModel;
use crate::scalar::{c, Point, Real};

/// Angular nodes of the circle quadrature.
const CIRCLE_NODES: usize = 720;

/// Both sides of the local Pohozaev identities on `B_r(center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PohozaevReport<T> {
    pub radius: T,
    pub p_lhs: T,
    pub p_rhs: T,
    pub q_lhs: [T; 2],
    pub q_rhs: [T; 2],
    pub p_residual: T,
    pub q_residual: [T; 2],
}

impl<T: Real> PohozaevReport<T> {
    /// `|P_lhs − P_rhs| / |P_lhs|`.
    pub fn p_relative(&self) -> T {
        self.p_residual / self.p_lhs.abs()
    }

    /// `Q` residuals relative to `|P_lhs|`.
    pub fn q_relative(&self) -> [T; 2] {
        [self.q_residual[0] / self.p_lhs.abs(), self.q_residual[1] / self.p_lhs.abs()]
    }
}

/// Trapezoid rule on `∂B_r(center)` for `f(y, ν)`, with arc-length weight.
fn circle<T: Real, const N: usize, F: FnMut(Point<T>, Point<T>) -> [T; N]>(center: Point<T>, r: T, mut f: F) -> [T; N] {
    let dth = (T::PI() + T::PI()) / T::from_usize_lossy(CIRCLE_NODES);
    let mut acc = [T::zero(); N];
    for k in 0..CIRCLE_NODES {
        let th = dth * T::from_usize_lossy(k);
        let nu = [th.cos(), th.sin()];
        let y = [center[0] + r * nu[0], center[1] + r * nu[1]];
        for (a, v) in acc.iter_mut().zip(f(y, nu)) {
            *a += v * r * dth;
        }
    }
    acc
}

/// `[P, Q₁, Q₂]` integrands of the pair of gradients `(a, b)` at normal `ν`.
fn forms<T: Real>(r: T, a: [T; 2], b: [T; 2], nu: Point<T>) -> [T; 3] {
    let an = a[0] * nu[0] + a[1] * nu[1];
    let bn = b[0] * nu[0] + b[1] * nu[1];
    let ab = a[0] * b[0] + a[1] * b[1];
    let q = |i: usize| -(an * b[i] + bn * a[i]) + ab * nu[i];
    [-(r + r) * an * bn + r * ab, q(0), q(1)]
}

/// Evaluates the quadratic forms
/// `P(u,v) = −2r∮⟨∇u,ν⟩⟨∇v,ν⟩ + r∮⟨∇u,∇v⟩`,
/// `Q_i(u,v) = −∮(⟨∇u,ν⟩∂_i v + ⟨∇v,ν⟩∂_i u) + ∮⟨∇u,∇v⟩ν_i`
/// on the solution and the matching right-hand sides built from
/// `F = u^{q+1}/(q+1) + v^{p+1}/(p+1)`: `r∮F − 2∫_{B_r}F` and `∮Fν_i`.
pub fn pohozaev_check<'a, T: Real, S: Into<Solution<'a, T>>>(sol: S, center: Point<T>, r: T) -> Result<PohozaevReport<T>>
where
    T: 'a,
{
    let sol = sol.into();
    sol.check_ball(center, r)?;
    let ep = sol.exponents();
    let (p1, q1) = (ep.p + T::one(), ep.q + T::one());
    let big_f = move |u: T, v: T| u.max(T::zero()).powf(q1) / q1 + v.max(T::zero()).powf(p1) / p1;
    let b = circle(center, r, |y, nu| {
        let s = sol.sample(y);
        let [pp, qa, qb] = forms(r, s.grad_u, s.grad_v, nu);
        let f = big_f(s.u, s.v);
        [pp, qa, qb, f, f * nu[0], f * nu[1]]
    });
    let area = sol.ball_integral(center, r, big_f)?;
    let p_rhs = r * b[3] - area * c(2.0);
    let q_rhs = [b[4], b[5]];
    Ok(PohozaevReport {
        radius: r,
        p_lhs: b[0],
        p_rhs,
        q_lhs: [b[1], b[2]],
        q_rhs,
        p_residual: (b[0] - p_rhs).abs(),
        q_residual: [(b[1] - q_rhs[0]).abs(), (b[2] - q_rhs[1]).abs()],
    })
}

/// `P(G(x,·), G(x,·))` and `Q_i(G(x,·), G(x,·))` on `∂B_r(x)`.
pub fn pohozaev_green<T: Real>(model: &GreenModel<T>, x: Point<T>, r: T) -> Result<(T, [T; 2])> {
    model.domain.check_interior(x)?;
    let mut err = None;
    let b = circle(x, r, |y, nu| match model.green_eval(y, x) {
        Ok((_, g)) => forms(r, g, g, nu),
        Err(e) => {
            err = Some(e);
            [T::zero(); 3]
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok((b[0], [b[1], b[2]])),
    }
}
