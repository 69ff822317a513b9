use super::Solution;
use crate::error::{Error, Result};
use crate::greenrobin::GreenModel;
use crate::scalar::{c, dist, Point, Real};

/// Minimum distance of an outer test point from every bubble.
const OUTER_CLEARANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterCheck<T> {
    /// `max |p·u(x) − 8π√e Σ G(x, x_i)|`.
    pub sup_u: T,
    /// The same for `v`.
    pub sup_v: T,
}

fn green_sum<T: Real>(model: &GreenModel<T>, centers: &[Point<T>], x: Point<T>) -> Result<T> {
    let mut s = T::zero();
    for &y in centers {
        if dist(x, y) < c(OUTER_CLEARANCE) {
            return Err(Error::Domain(format!("test point ({}, {}) within {OUTER_CLEARANCE} of a bubble", x[0], x[1])));
        }
        s += model.green_eval(x, y)?.0;
    }
    Ok(s)
}

/// Distance of the rescaled field from the outer limit `8π√e Σ G(·, x_i)`.
pub fn outer_expansion_check<'a, T: Real, S: Into<Solution<'a, T>>>(
    sol: S,
    model: &GreenModel<T>,
    centers: &[Point<T>],
    points: &[Point<T>],
) -> Result<OuterCheck<T>>
where
    T: 'a,
{
    let sol = sol.into();
    let p = sol.exponents().p;
    let coef = c::<T>(8.0) * T::PI() * c::<T>(0.5).exp();
    let mut out = OuterCheck { sup_u: T::zero(), sup_v: T::zero() };
    for &x in points {
        let g = green_sum(model, centers, x)? * coef;
        let s = sol.sample(x);
        out.sup_u = out.sup_u.max((p * s.u - g).abs());
        out.sup_v = out.sup_v.max((p * s.v - g).abs());
    }
    Ok(out)
}

/// Least-squares slope (through the origin) of `p·u(x)` against
/// `Σ G(x, x_i)` over the given points; tends to `8π√e`.
pub fn outer_coefficient_fit<'a, T: Real, S: Into<Solution<'a, T>>>(
    sol: S,
    model: &GreenModel<T>,
    centers: &[Point<T>],
    points: &[Point<T>],
) -> Result<T>
where
    T: 'a,
{
    let sol = sol.into();
    let p = sol.exponents().p;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for &x in points {
        let g = green_sum(model, centers, x)?;
        sxy += g * p * sol.sample(x).u;
        sxx += g * g;
    }
    if sxx == T::zero() {
        return Err(Error::InvalidArgument("outer fit needs a point with G ≠ 0".into()));
    }
    Ok(sxy / sxx)
}
