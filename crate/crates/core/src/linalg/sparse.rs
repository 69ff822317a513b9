//! Compressed-row sparse matrices, ILU(0), restarted GMRES and BiCGSTAB.

use super::{axpy, dot, norm};
use crate::error::{Error, Result};
use crate::scalar::{c, Real};

#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![T::zero(); triplets.len()];
        for &(i, j, v) in triplets {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, T)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match r.binary_search(&j) {
            Ok(k) => self.values[self.indptr[i] + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        for i in 0..self.nrows {
            let mut s = T::zero();
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            y[i] = s;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Self {
        let mut trip = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                trip.push((j, i, v));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, &trip)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }
}

/// Action of an approximate inverse.
pub trait Preconditioner<T> {
    fn apply(&self, r: &[T], z: &mut [T]);
}

/// No preconditioning.
pub struct Identity;

impl<T: Copy> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

impl<T, F: Fn(&[T], &mut [T])> Preconditioner<T> for F {
    fn apply(&self, r: &[T], z: &mut [T]) {
        self(r, z)
    }
}

/// Incomplete LU factorisation with zero fill on the pattern of `A`.
#[derive(Debug, Clone)]
pub struct Ilu0<T> {
    lu: CsrMatrix<T>,
    diag: Vec<usize>,
}

impl<T: Real> Ilu0<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.nrows;
        let mut lu = a.clone();
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in lu.indptr[i]..lu.indptr[i + 1] {
                if lu.indices[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::InvalidArgument(format!("ILU(0): missing diagonal in row {i}")));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.indptr[i], lu.indptr[i + 1]);
            for k in start..end {
                pos[lu.indices[k]] = k;
            }
            for k in start..end {
                let j = lu.indices[k];
                if j >= i {
                    break;
                }
                let piv = lu.values[diag[j]];
                let f = lu.values[k] / piv;
                lu.values[k] = f;
                for kk in (diag[j] + 1)..lu.indptr[j + 1] {
                    let col = lu.indices[kk];
                    let p = pos[col];
                    if p != usize::MAX {
                        let v = lu.values[kk];
                        lu.values[p] -= f * v;
                    }
                }
            }
            for k in start..end {
                pos[lu.indices[k]] = usize::MAX;
            }
            if lu.values[diag[i]] == T::zero() {
                return Err(Error::InvalidArgument(format!("ILU(0): zero pivot in row {i}")));
            }
        }
        Ok(Self { lu, diag })
    }
}

impl<T: Real> Preconditioner<T> for Ilu0<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let n = self.lu.nrows;
        for i in 0..n {
            let mut s = r[i];
            for k in self.lu.indptr[i]..self.diag[i] {
                s -= self.lu.values[k] * z[self.lu.indices[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in (self.diag[i] + 1)..self.lu.indptr[i + 1] {
                s -= self.lu.values[k] * z[self.lu.indices[k]];
            }
            z[i] = s / self.lu.values[self.diag[i]];
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions<T> {
    /// Required reduction of the residual norm relative to `‖b‖`.
    pub rel_tol: T,
    pub max_iterations: usize,
    /// Restart length for GMRES.
    pub restart: usize,
}

impl<T: Real> Default for KrylovOptions<T> {
    fn default() -> Self {
        Self { rel_tol: c(1e-10), max_iterations: 2000, restart: 80 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats<T> {
    pub iterations: usize,
    pub rel_residual: T,
}

/// Right-preconditioned restarted GMRES. `x` holds the initial guess on entry.
pub fn gmres<T: Real, P: Preconditioner<T> + ?Sized>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    prec: &P,
    opts: &KrylovOptions<T>,
) -> Result<KrylovStats<T>> {
    let n = a.nrows;
    let bnorm = norm(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(KrylovStats { iterations: 0, rel_residual: T::zero() });
    }
    let m = opts.restart.max(1);
    let mut iters = 0usize;
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    loop {
        a.matvec_into(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        let mut rel = beta / bnorm;
        if rel <= opts.rel_tol {
            return Ok(KrylovStats { iterations: iters, rel_residual: rel });
        }
        if iters >= opts.max_iterations {
            return Err(Error::LinearStagnation { iterations: iters, residual: rel.to_f64_lossy() });
        }
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|&v| v / beta).collect());
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            prec.apply(&basis[k], &mut z);
            a.matvec_into(&z, &mut w);
            for j in 0..=k {
                let hij = dot(&w, &basis[j]);
                h[j][k] = hij;
                axpy(-hij, &basis[j], &mut w);
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == T::zero() {
                cs[k] = T::one();
                sn[k] = T::zero();
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = denom;
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            iters += 1;
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= opts.rel_tol || hn == T::zero() || iters >= opts.max_iterations {
                break;
            }
            basis.push(w.iter().map(|&v| v / hn).collect());
        }
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in (i + 1)..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![T::zero(); n];
        for (j, &yj) in y.iter().enumerate() {
            axpy(yj, &basis[j], &mut update);
        }
        prec.apply(&update, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
        if !rel.is_finite() {
            return Err(Error::LinearStagnation { iterations: iters, residual: f64::NAN });
        }
    }
}

/// Right-preconditioned BiCGSTAB. `x` holds the initial guess on entry.
pub fn bicgstab<T: Real, P: Preconditioner<T> + ?Sized>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    prec: &P,
    opts: &KrylovOptions<T>,
) -> Result<KrylovStats<T>> {
    let n = a.nrows;
    let bnorm = norm(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(KrylovStats { iterations: 0, rel_residual: T::zero() });
    }
    let mut r = a.matvec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut best_rel = norm(&r) / bnorm;
    if best_rel <= opts.rel_tol {
        return Ok(KrylovStats { iterations: 0, rel_residual: best_rel });
    }
    let mut r_hat = r.clone();
    let mut rho = T::one();
    let mut alpha = T::one();
    let mut omega = T::one();
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut zz = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut restarts = 0;
    for it in 1..=opts.max_iterations {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() <= T::epsilon() * T::epsilon() * bnorm * bnorm || omega == T::zero() {
            // breakdown: restart from the current residual
            restarts += 1;
            if restarts > 20 {
                break;
            }
            r_hat.copy_from_slice(&r);
            rho = T::one();
            alpha = T::one();
            omega = T::one();
            v.iter_mut().for_each(|e| *e = T::zero());
            p.iter_mut().for_each(|e| *e = T::zero());
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        prec.apply(&p, &mut y);
        a.matvec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() {
            break;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        let snorm = norm(&s);
        if snorm / bnorm <= opts.rel_tol {
            axpy(alpha, &y, x);
            return Ok(KrylovStats { iterations: it, rel_residual: snorm / bnorm });
        }
        prec.apply(&s, &mut zz);
        a.matvec_into(&zz, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == T::zero() { T::zero() } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm(&r) / bnorm;
        best_rel = best_rel.min(rel);
        if rel <= opts.rel_tol {
            return Ok(KrylovStats { iterations: it, rel_residual: rel });
        }
        if !rel.is_finite() {
            break;
        }
    }
    Err(Error::LinearStagnation { iterations: opts.max_iterations, residual: best_rel.to_f64_lossy() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn triplets_merge_duplicates() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 4.0)]);
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.transpose().get(1, 0), 3.0);
    }

    #[test]
    fn ilu0_is_exact_for_tridiagonal() {
        let a = poisson_1d(50);
        let ilu = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let mut x = vec![0.0; 50];
        ilu.apply(&b, &mut x);
        let r = a.matvec(&x);
        for i in 0..50 {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn krylov_solvers_agree() {
        let n = 200;
        let mut a = poisson_1d(n);
        // add a nonsymmetric convection term
        let mut t = Vec::new();
        for i in 0..n {
            for (j, v) in a.row(i) {
                t.push((i, j, v));
            }
            if i + 1 < n {
                t.push((i, i + 1, 0.3));
            }
        }
        a = CsrMatrix::from_triplets(n, n, &t);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.1).sin()).collect();
        let opts = KrylovOptions { rel_tol: 1e-11, max_iterations: 5000, restart: 50 };
        let mut x1 = vec![0.0; n];
        gmres(&a, &b, &mut x1, &Identity, &opts).unwrap();
        let mut x2 = vec![0.0; n];
        bicgstab(&a, &b, &mut x2, &Ilu0::new(&a).unwrap(), &opts).unwrap();
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() < 1e-6 * x1[i].abs().max(1.0));
        }
    }
}
