//! Bubble diagnostics extracted from solved fields, compared against the
//! asymptotic rate laws, gap law, Pohozaev identities and the kernel
//! structure of the linearised Liouville operators.

mod bubble;
mod kernel;
mod outer;
mod pohozaev;
mod rates;
mod spectral;

pub use bubble::{extract_bubble, gap_law_ratio, profile_error, BubbleDiagnostics, ProfileError, ProfileSample};
pub use kernel::{limit_kernel_modes, GrowthClass, ModeReport};
pub use outer::{outer_coefficient_fit, outer_expansion_check, OuterCheck};
pub use pohozaev::{pohozaev_check, pohozaev_green, PohozaevReport};
pub use rates::{fit_order, predict_rates, FittedOrders, RatePrediction, RateReport, RateRow};
pub use spectral::{linearized_probe, LinearizedOperator, SpectralProbe, NONDEGENERACY_FLOOR};

use crate::error::{Error, Result};
use crate::greenrobin::DomainSpec;
use crate::planar::PairField;
use crate::quadrature::{integrate, QuadOptions};
use crate::radial::RadialPair;
use crate::scalar::{c, dist, norm2, Point, Real};
use crate::special::ExponentPair;

/// A solved field from either solver. Radial solutions live on the unit disk.
#[derive(Debug, Clone, Copy)]
pub enum Solution<'a, T> {
    Radial(&'a RadialPair<T>),
    Planar(&'a PairField<T>),
}

impl<'a, T> From<&'a RadialPair<T>> for Solution<'a, T> {
    fn from(s: &'a RadialPair<T>) -> Self {
        Solution::Radial(s)
    }
}

impl<'a, T> From<&'a PairField<T>> for Solution<'a, T> {
    fn from(s: &'a PairField<T>) -> Self {
        Solution::Planar(s)
    }
}

/// Values and gradients of both components at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample<T> {
    pub u: T,
    pub grad_u: [T; 2],
    pub v: T,
    pub grad_v: [T; 2],
}

impl<T: Real> Solution<'_, T> {
    pub fn exponents(&self) -> ExponentPair<T> {
        match self {
            Solution::Radial(s) => s.ep,
            Solution::Planar(s) => s.ep,
        }
    }

    pub fn domain(&self) -> DomainSpec<T> {
        match self {
            Solution::Radial(_) => DomainSpec::unit_disk(),
            Solution::Planar(s) => s.grid.domain.clone(),
        }
    }

    /// Interpolated values and gradients at `x`.
    pub fn sample(&self, x: Point<T>) -> FieldSample<T> {
        match self {
            Solution::Radial(s) => {
                let r = norm2(x);
                let (u, du) = s.eval_u(r);
                let (v, dv) = s.eval_v(r);
                let dir = if r > T::zero() { [x[0] / r, x[1] / r] } else { [T::zero(), T::zero()] };
                FieldSample { u, grad_u: [du * dir[0], du * dir[1]], v, grad_v: [dv * dir[0], dv * dir[1]] }
            }
            Solution::Planar(s) => {
                let (u, grad_u) = s.grid.interpolate(&s.u, x);
                let (v, grad_v) = s.grid.interpolate(&s.v, x);
                FieldSample { u, grad_u, v, grad_v }
            }
        }
    }

    /// Fails unless the closed ball `B_r(center)` lies inside the domain.
    pub fn check_ball(&self, center: Point<T>, r: T) -> Result<()> {
        let d = self.domain().boundary_distance(center);
        if !(r > T::zero()) || !(r < d) {
            return Err(Error::Domain(format!("ball of radius {r} around ({}, {}) leaves the domain", center[0], center[1])));
        }
        Ok(())
    }

    /// `∫_{B_r(center)} f(u, v)` by adaptive quadrature in the radius, on
    /// geometric panels `[2^{−k−1}r, 2^{−k}r]` down to `1e−24`, and the
    /// trapezoid rule in angle, on the interpolated fields.
    pub fn ball_integral<F: Fn(T, T) -> T>(&self, center: Point<T>, r: T, f: F) -> Result<T> {
        let n_angles = match self {
            Solution::Radial(_) if norm2(center) == T::zero() => 1,
            _ => 128,
        };
        let opts = QuadOptions { abs_tol: c(1e-15), rel_tol: c(1e-11), max_subdivisions: 2000 };
        let two_pi = T::PI() + T::PI();
        let dth = two_pi / T::from_usize_lossy(n_angles);
        let ring = |rho: T| -> T {
            let s: T = (0..n_angles)
                .map(|k| {
                    let th = dth * T::from_usize_lossy(k);
                    let s = self.sample([center[0] + rho * th.cos(), center[1] + rho * th.sin()]);
                    f(s.u.max(T::zero()), s.v.max(T::zero()))
                })
                .sum();
            s * dth * rho
        };
        let mut total = T::zero();
        let mut hi = r;
        while hi > c(1e-24) {
            let lo = hi * c(0.5);
            total += integrate(&ring, lo, hi, &opts)?.value;
            hi = lo;
        }
        total += integrate(&ring, T::zero(), hi, &opts)?.value;
        Ok(total)
    }

    /// Nodes as `(point, u, v)`.
    pub fn nodes(&self) -> Vec<(Point<T>, T, T)> {
        match self {
            Solution::Radial(s) => s.mesh.nodes.iter().zip(s.u.iter().zip(&s.v)).map(|(&r, (&u, &v))| ([r, T::zero()], u, v)).collect(),
            Solution::Planar(s) => s.grid.points().into_iter().zip(s.u.iter().zip(&s.v)).map(|(x, (&u, &v))| (x, u, v)).collect(),
        }
    }
}

/// Nodes within distance `r` of `center`, with their distances.
fn nodes_within<T: Real>(sol: &Solution<'_, T>, center: Point<T>, r: T) -> Vec<(T, T, T)> {
    sol.nodes()
        .into_iter()
        .filter_map(|(x, u, v)| {
            let d = dist(x, center);
            (d <= r).then_some((d, u, v))
        })
        .collect()
}
