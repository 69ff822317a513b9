//! Linear algebra kernels: small dense matrices, banded LU and sparse Krylov
//! solvers.

pub mod banded;
pub mod dense;
pub mod sparse;

pub use banded::{BandLu, BandMatrix};
pub use dense::{lu_solve, symmetric_eigen, DenseMatrix};
pub use sparse::{bicgstab, gmres, CsrMatrix, Ilu0, KrylovOptions, KrylovStats, Preconditioner};

use crate::scalar::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn norm_inf<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// `y += alpha * x`
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
