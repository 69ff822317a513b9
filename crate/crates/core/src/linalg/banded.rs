use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage reserves `kl` extra super-diagonals for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Real> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![T::zero(); n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku, "({i},{j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku {
            return T::zero();
        }
        self.data[self.slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        let s = self.slot(i, j);
        self.data[s] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                y[j] += self.get(i, j) * x[i];
            }
        }
        y
    }

    /// LU factorisation with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut piv = vec![0usize; n];
        let mut mult = vec![T::zero(); n * kl.max(1)];
        let scale = self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut pmax = self.data[self.slot(k, k)].abs();
            for i in (k + 1)..=last_row {
                let v = self.data[self.slot(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    p = i;
                }
            }
            if pmax == T::zero() || pmax <= scale * T::epsilon() * T::epsilon() {
                return Err(Error::InvalidArgument(format!("singular band matrix at pivot {k}")));
            }
            piv[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.slot(k, k)];
            for i in (k + 1)..=last_row {
                let s = self.slot(i, k);
                let f = self.data[s] / d;
                self.data[s] = T::zero();
                mult[k * kl.max(1) + (i - k - 1)] = f;
                if f != T::zero() {
                    for j in (k + 1)..=last_col {
                        let ukj = self.data[self.slot(k, j)];
                        let sij = self.slot(i, j);
                        self.data[sij] -= f * ukj;
                    }
                }
            }
        }
        Ok(BandLu { band: self, piv, mult })
    }
}

/// Factorised band matrix.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    band: BandMatrix<T>,
    piv: Vec<usize>,
    mult: Vec<T>,
}

impl<T: Real> BandLu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.band.n;
        let kl = self.band.kl;
        let reach = kl + self.band.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            let last_row = (k + kl).min(n - 1);
            for i in (k + 1)..=last_row {
                x[i] -= self.mult[k * kl.max(1) + (i - k - 1)] * xk;
            }
        }
        for k in (0..n).rev() {
            let last_col = (k + reach).min(n - 1);
            let mut s = x[k];
            for j in (k + 1)..=last_col {
                s -= self.band.data[self.band.slot(k, j)] * x[j];
            }
            x[k] = s / self.band.data[self.band.slot(k, k)];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.band.n;
        let kl = self.band.kl;
        let reach = kl + self.band.ku;
        let mut y = b.to_vec();
        // Uᵀ y = b
        for k in 0..n {
            let lo = k.saturating_sub(reach);
            let mut s = y[k];
            for j in lo..k {
                s -= self.band.data[self.band.slot(j, k)] * y[j];
            }
            y[k] = s / self.band.data[self.band.slot(k, k)];
        }
        for k in (0..n).rev() {
            let last_row = (k + kl).min(n - 1);
            let mut s = y[k];
            for i in (k + 1)..=last_row {
                s -= self.mult[k * kl.max(1) + (i - k - 1)] * y[i];
            }
            y[k] = s;
            y.swap(k, self.piv[k]);
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64) -> BandMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // weak diagonal so that pivoting actually happens
                a.set(i, j, rng.gen_range(-1.0..1.0) * if i == j { 0.1 } else { 1.0 });
            }
        }
        a
    }

    #[test]
    fn solve_and_transpose_solve() {
        let a = random_band(40, 3, 2, 7);
        let x_true: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec(&x_true);
        let bt = a.matvec_transpose(&x_true);
        let lu = a.clone().factor().unwrap();
        let x = lu.solve(&b);
        let xt = lu.solve_transpose(&bt);
        for i in 0..40 {
            assert!((x[i] - x_true[i]).abs() < 1e-9, "solve {i}");
            assert!((xt[i] - x_true[i]).abs() < 1e-9, "transpose {i}");
        }
    }

    #[test]
    fn singular_band_rejected() {
        let a = BandMatrix::<f64>::zeros(5, 1, 1);
        assert!(a.factor().is_err());
    }
}
