use super::bubble::{gap_law_ratio, BubbleDiagnostics};
use crate::scalar::{c, Real};
use crate::special::ExponentPair;

/// Leading-order predictions for a bubble at a point with Kirchhoff-Routh
/// value `Φ` (`Φ = R(0) = 0` for the centred bubble on the unit disk).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePrediction<T> {
    pub v_max: T,
    pub u_max: T,
    pub mu: T,
}

/// `v_max = √e[1 − log p/(p−1) + (4πΦ + 3log2 + 2 + θ/4)/p]`,
/// `u_max = √e[1 − log p/(p−1) + (4πΦ + 3log2 + 2 + (1/4 − √e/2)θ)/p]`,
/// `μ = e^{−p/4}·e^{−(2πΦ + (3/2)log2 + 3/4 + θ/8)}`.
pub fn predict_rates<T: Real>(ep: &ExponentPair<T>, phi: T) -> RatePrediction<T> {
    let p = ep.p;
    let theta = ep.theta;
    let sqrt_e = c::<T>(0.5).exp();
    let ln2 = T::LN_2();
    let pi = T::PI();
    let base = T::one() - p.ln() / (p - T::one());
    let k = c::<T>(4.0) * pi * phi + c::<T>(3.0) * ln2 + c(2.0);
    let v_max = sqrt_e * (base + (k + theta * c(0.25)) / p);
    let u_max = sqrt_e * (base + (k + (c::<T>(0.25) - sqrt_e * c(0.5)) * theta) / p);
    let mu = (-p * c(0.25)).exp() * (-(c::<T>(2.0) * pi * phi + c::<T>(1.5) * ln2 + c(0.75) + theta / c(8.0))).exp();
    RatePrediction { v_max, u_max, mu }
}

/// One exponent pair of a continuation run, predictions next to
/// measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow<T> {
    pub p: T,
    pub theta: T,
    pub v_pred: T,
    pub v_comp: T,
    pub u_pred: T,
    pub u_comp: T,
    pub mu_pred: T,
    pub mu_comp: T,
    /// `None` at `θ = 0`.
    pub gap_ratio: Option<T>,
}

impl<T: Real> RateRow<T> {
    pub fn new(ep: &ExponentPair<T>, phi: T, diag: &BubbleDiagnostics<T>) -> Self {
        let pred = predict_rates(ep, phi);
        Self {
            p: ep.p,
            theta: ep.theta,
            v_pred: pred.v_max,
            v_comp: diag.v_max,
            u_pred: pred.u_max,
            u_comp: diag.u_at_max,
            mu_pred: pred.mu,
            mu_comp: diag.mu,
            gap_ratio: gap_law_ratio(diag, ep).ok(),
        }
    }

    /// `|−log μ + log μ_pred|`, the defect of the μ law.
    pub fn mu_log_error(&self) -> T {
        (self.mu_comp.ln() - self.mu_pred.ln()).abs()
    }
}

/// Least-squares slopes of `log|error|` against `log p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedOrders<T> {
    pub v_max: T,
    pub u_max: T,
    pub mu_log: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport<T> {
    /// Sorted by `p`.
    pub rows: Vec<RateRow<T>>,
    /// Present once there are at least four rows.
    pub orders: Option<FittedOrders<T>>,
}

impl<T: Real> RateReport<T> {
    pub fn new(mut rows: Vec<RateRow<T>>) -> Self {
        rows.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap_or(std::cmp::Ordering::Equal));
        let orders = (rows.len() >= 4).then(|| {
            let ps: Vec<T> = rows.iter().map(|r| r.p).collect();
            let col = |f: &dyn Fn(&RateRow<T>) -> T| -> T {
                let e: Vec<T> = rows.iter().map(f).collect();
                fit_order(&ps, &e)
            };
            FittedOrders {
                v_max: col(&|r| (r.v_comp - r.v_pred).abs()),
                u_max: col(&|r| (r.u_comp - r.u_pred).abs()),
                mu_log: col(&|r| r.mu_log_error()),
            }
        });
        Self { rows, orders }
    }
}

/// Unweighted least-squares slope of `log|e|` against `log p`; NaN when an
/// error is zero or fewer than two points are given.
pub fn fit_order<T: Real>(p: &[T], e: &[T]) -> T {
    let n = p.len().min(e.len());
    if n < 2 || e.iter().any(|&x| !(x.abs() > T::zero())) {
        return T::nan();
    }
    let xs: Vec<T> = p.iter().map(|x| x.ln()).collect();
    let ys: Vec<T> = e.iter().map(|x| x.abs().ln()).collect();
    let nn = T::from_usize_lossy(n);
    let mx = xs.iter().copied().sum::<T>() / nn;
    let my = ys.iter().copied().sum::<T>() / nn;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
