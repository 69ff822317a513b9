use super::{nodes_within, Solution};
use crate::error::{Error, Result};
use crate::quadrature::trapezoid;
use crate::radial::scaling_parameter;
use crate::scalar::{c, dist, norm2, Point, Real};
use crate::special::{bubble_radial, correction_profiles, CorrectionConstants, ExponentPair, SpecialTables};

/// Concentration data of one bubble.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleDiagnostics<T> {
    /// Maximum point of `v`, refined below the grid.
    pub x_n: Point<T>,
    pub v_max: T,
    pub u_at_max: T,
    /// `(p·v_max^{p−1})^{−1/2}`.
    pub mu: T,
    /// `θ·log v_max`.
    pub sigma: T,
    /// Radius of the mass ball, `dist(x_n, ∂Ω)/4`.
    pub mass_radius: T,
    /// `∫_{B_r(x_n)} v^p`.
    pub mass_v: T,
    /// `∫_{B_r(x_n)} u^q`.
    pub mass_u: T,
    /// `(p∫∇u·∇v, p∫|∇u|², p∫|∇v|²)`.
    pub energy: [T; 3],
}

/// Vertex offset and value change of the parabola through `(−s, fm)`,
/// `(0, f0)`, `(s, fp)`, with the offset kept within `[−s/2, s/2]`.
fn parabola<T: Real>(fm: T, f0: T, fp: T, s: T) -> T {
    let curv = fm - f0 - f0 + fp;
    if curv < T::zero() {
        (s * (fm - fp) / (curv + curv)).max(-s * c(0.5)).min(s * c(0.5))
    } else {
        T::zero()
    }
}

fn parabola_eval<T: Real>(fm: T, f0: T, fp: T, s: T, d: T) -> T {
    f0 + (fp - fm) / (s + s) * d + (fp - f0 - f0 + fm) / (s * s + s * s) * d * d
}

/// Locates the maximum of `v` in `B_{r_loc}(center)`, refines it by one
/// three-point quadratic step per axis, and collects masses and energies.
/// Fails if the grid maximum sits on the rim of the search ball.
pub fn extract_bubble<'a, T: Real, S: Into<Solution<'a, T>>>(sol: S, center: Point<T>, r_loc: T) -> Result<BubbleDiagnostics<T>>
where
    T: 'a,
{
    let sol = sol.into();
    sol.check_ball(center, r_loc)?;
    let ep = sol.exponents();
    let (x_n, v_max, u_at_max) = match sol {
        Solution::Radial(s) => {
            let nodes = &s.mesh.nodes;
            // the ball covers the radii [|c| − r_loc, |c| + r_loc]
            let rc = norm2(center);
            let first = nodes.iter().position(|&r| r >= rc - r_loc).unwrap_or(0);
            let last = nodes.iter().rposition(|&r| r <= rc + r_loc).unwrap_or(0);
            let k = (first..=last).fold(first, |b, i| if s.v[i] > s.v[b] { i } else { b });
            if (k > 0 && k == first) || (k > 0 && k + 1 >= last) {
                return Err(Error::Extraction(format!("maximum of v on the rim of the search ball (r = {})", nodes[k])));
            }
            let dir = if rc > T::zero() { [center[0] / rc, center[1] / rc] } else { [T::one(), T::zero()] };
            if k == 0 {
                ([T::zero(), T::zero()], s.v[0], s.u[0])
            } else {
                // a ring maximum: parabola through three nodes in r
                let (a, b, cc) = (nodes[k - 1], nodes[k], nodes[k + 1]);
                let fit = |f: &[T]| {
                    let d1 = (f[k] - f[k - 1]) / (b - a);
                    let d2 = (f[k + 1] - f[k]) / (cc - b);
                    let c2 = (d2 - d1) / (cc - a);
                    (d1, c2)
                };
                let (d1, c2) = fit(&s.v);
                let r_star = if c2 < T::zero() { ((a + b) * c(0.5) - d1 / (c2 + c2)).max(a).min(cc) } else { b };
                let val = |f: &[T]| {
                    let (d1, c2) = fit(f);
                    f[k - 1] + d1 * (r_star - a) + c2 * (r_star - a) * (r_star - b)
                };
                ([r_star * dir[0], r_star * dir[1]], val(&s.v), val(&s.u))
            }
        }
        Solution::Planar(s) => {
            let g = &s.grid;
            let mut best: Option<usize> = None;
            for k in 0..g.len() {
                if dist(g.point(k), center) <= r_loc && best.map_or(true, |b| s.v[k] > s.v[b]) {
                    best = Some(k);
                }
            }
            let k = best.ok_or_else(|| Error::Extraction("no grid node inside the search ball".into()))?;
            let x0 = g.point(k);
            if dist(x0, center) > r_loc - c::<T>(2.0) * g.spacing[k] {
                return Err(Error::Extraction(format!("maximum of v on the rim of the search ball at ({}, {})", x0[0], x0[1])));
            }
            let (i, j) = g.nodes[k];
            let (i, j) = (i as isize, j as isize);
            let sp = g.spacing[k];
            let step = (sp / (g.h * c(0.5))).round().to_isize().unwrap_or(2);
            let triple = |f: &[T], axis: usize| {
                let (di, dj) = if axis == 0 { (step, 0) } else { (0, step) };
                (g.lattice_value(f, i - di, j - dj), f[k], g.lattice_value(f, i + di, j + dj))
            };
            let mut x = x0;
            let (mut vm, mut um) = (s.v[k], s.u[k]);
            for axis in 0..2 {
                let (a, b, cc) = triple(&s.v, axis);
                let d = parabola(a, b, cc, sp);
                x[axis] += d;
                vm += parabola_eval(a, b, cc, sp, d) - b;
                let (a, b, cc) = triple(&s.u, axis);
                um += parabola_eval(a, b, cc, sp, d) - b;
            }
            (x, vm, um)
        }
    };
    let mass_radius = sol.domain().boundary_distance(x_n) * c(0.25);
    let (mass_v, mass_u) = ball_masses(&sol, x_n, mass_radius, &ep);
    let energy = match sol {
        Solution::Radial(s) => {
            let (mid, du, dv) = s.face_derivatives();
            let n = &s.mesh.nodes;
            let pair = |a: &[T], b: &[T]| -> T {
                let sum: T = (0..mid.len()).map(|i| a[i] * b[i] * mid[i] * (n[i + 1] - n[i])).sum();
                (T::PI() + T::PI()) * sum * ep.p
            };
            [pair(&du, &dv), pair(&du, &du), pair(&dv, &dv)]
        }
        Solution::Planar(s) => {
            let g = &s.grid;
            [g.gradient_pairing(&s.u, &s.v) * ep.p, g.gradient_pairing(&s.u, &s.u) * ep.p, g.gradient_pairing(&s.v, &s.v) * ep.p]
        }
    };
    Ok(BubbleDiagnostics {
        x_n,
        v_max,
        u_at_max,
        mu: scaling_parameter(ep.p, v_max),
        sigma: ep.theta * v_max.ln(),
        mass_radius,
        mass_v,
        mass_u,
        energy,
    })
}

/// `∫_{B_R(x)} v^p` and `∫_{B_R(x)} u^q` by the composite trapezoid rule:
/// in `r` on the radial mesh, by the nodal weights on the planar grid.
fn ball_masses<T: Real>(sol: &Solution<'_, T>, x: Point<T>, radius: T, ep: &ExponentPair<T>) -> (T, T) {
    let pv = |v: T| v.max(T::zero()).powf(ep.p);
    let qu = |u: T| u.max(T::zero()).powf(ep.q);
    match sol {
        Solution::Radial(s) => {
            let mut rs: Vec<T> = s.mesh.nodes.iter().copied().take_while(|&r| r < radius).collect();
            let mut fv: Vec<T> = rs.iter().enumerate().map(|(i, &r)| pv(s.v[i]) * r).collect();
            let mut fu: Vec<T> = rs.iter().enumerate().map(|(i, &r)| qu(s.u[i]) * r).collect();
            rs.push(radius);
            fv.push(pv(s.eval_v(radius).0) * radius);
            fu.push(qu(s.eval_u(radius).0) * radius);
            let two_pi = T::PI() + T::PI();
            (two_pi * trapezoid(&rs, &fv), two_pi * trapezoid(&rs, &fu))
        }
        Solution::Planar(s) => {
            let g = &s.grid;
            let (mut mv, mut mu) = (T::zero(), T::zero());
            for k in 0..g.len() {
                if dist(g.point(k), x) <= radius {
                    mv += g.weights[k] * pv(s.v[k]);
                    mu += g.weights[k] * qu(s.u[k]);
                }
            }
            (mv, mu)
        }
    }
}

/// `p(v_max − u_at_max)/(θ·v_max·log v_max)`, which tends to 1.
pub fn gap_law_ratio<T: Real>(diag: &BubbleDiagnostics<T>, ep: &ExponentPair<T>) -> Result<T> {
    if ep.theta == T::zero() {
        return Err(Error::UndefinedRatio("gap-law ratio needs θ > 0".into()));
    }
    Ok(ep.p * (diag.v_max - diag.u_at_max) / (ep.theta * diag.v_max * diag.v_max.ln()))
}

/// Rescaled profiles at one node: `z = p(v − v_max)/v_max`,
/// `w = p(u − v_max)/v_max` at `y = (x − x_n)/μ`, with the references
/// `U + t*/p` and `U − σ + s*/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    pub rho: T,
    pub z: T,
    pub w: T,
    pub z_ref: T,
    pub w_ref: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileError<T> {
    /// `sup |z − (U + t*/p)|` over `|y| ≤ ρ`.
    pub z_err: T,
    /// `sup |w − (U − σ + s*/p)|` over `|y| ≤ ρ`.
    pub w_err: T,
    pub samples: Vec<ProfileSample<T>>,
}

/// Sup-norm distance of the rescaled profiles from their two-term
/// expansions on `|y| ≤ rho`, sampled at the grid nodes. The ball `B_{ρμ}`
/// must contain at least 10 nodes.
pub fn profile_error<'a, T: Real, S: Into<Solution<'a, T>>>(
    sol: S,
    diag: &BubbleDiagnostics<T>,
    ep: &ExponentPair<T>,
    rho: T,
) -> Result<ProfileError<T>>
where
    T: 'a,
{
    let sol = sol.into();
    let radius = rho * diag.mu;
    sol.check_ball(diag.x_n, radius)?;
    let near = nodes_within(&sol, diag.x_n, radius);
    if near.len() < 10 {
        return Err(Error::Resolution(format!("only {} nodes within ρμ = {:e} of the maximum", near.len(), radius.to_f64_lossy())));
    }
    let tables = SpecialTables::new()?;
    let k = CorrectionConstants::new(ep.theta, diag.sigma);
    let p = ep.p;
    let mut out = ProfileError { z_err: T::zero(), w_err: T::zero(), samples: Vec::with_capacity(near.len()) };
    for (d, u, v) in near {
        let y = d / diag.mu;
        let cv = correction_profiles(y, &k, &tables);
        let big_u = bubble_radial(y * y, T::zero());
        let s = ProfileSample {
            rho: y,
            z: p * (v - diag.v_max) / diag.v_max,
            w: p * (u - diag.v_max) / diag.v_max,
            z_ref: big_u + cv.t_star / p,
            w_ref: big_u - diag.sigma + cv.s_star / p,
        };
        out.z_err = out.z_err.max((s.z - s.z_ref).abs());
        out.w_err = out.w_err.max((s.w - s.w_ref).abs());
        out.samples.push(s);
    }
    Ok(out)
}
