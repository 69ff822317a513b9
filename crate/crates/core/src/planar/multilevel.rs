//! Two-level preconditioner for the composite Laplacian: Gauss-Seidel on the
//! composite grid, coarse correction by a multigrid V-cycle on the base
//! lattice of spacing `h`.

use super::grid::{Grid2D, Site};
use crate::error::Result;
use crate::greenrobin::harmonic::Multigrid;
use crate::linalg::Preconditioner;
use crate::scalar::{c, Real};

const NONE: usize = usize::MAX;

pub struct CompositeMultigrid<'a, T> {
    grid: &'a Grid2D<T>,
    base: Multigrid<T>,
    /// Composite unknown at each base node.
    to_composite: Vec<usize>,
    /// Restriction stencil of each base node: `(composite index, weight)`.
    restriction: Vec<Vec<(usize, T)>>,
    pub sweeps: usize,
}

impl<'a, T: Real> CompositeMultigrid<'a, T> {
    pub fn new(grid: &'a Grid2D<T>) -> Result<Self> {
        let base = Multigrid::new(&grid.domain, grid.h)?;
        let fine = base.fine();
        let w = [c::<T>(0.25), c::<T>(0.5), c::<T>(0.25)];
        let mut to_composite = Vec::with_capacity(fine.len());
        let mut restriction = Vec::with_capacity(fine.len());
        for &(i, j) in &fine.nodes {
            let (ci, cj) = (2 * i as isize, 2 * j as isize);
            let k = match grid.site(ci, cj) {
                Site::Unknown(k) => k,
                _ => NONE,
            };
            to_composite.push(k);
            let mut stencil = Vec::new();
            let mut total = T::zero();
            for (b, dj) in (-1..=1).enumerate() {
                for (a, di) in (-1..=1).enumerate() {
                    if let Site::Unknown(m) = grid.site(ci + di, cj + dj) {
                        stencil.push((m, w[a] * w[b]));
                        total += w[a] * w[b];
                    }
                }
            }
            stencil.iter_mut().for_each(|s| s.1 /= total);
            restriction.push(stencil);
        }
        Ok(Self { grid, base, to_composite, restriction, sweeps: 2 })
    }

    fn prolong_add(&self, e: &[T], x: &mut [T]) {
        let fine = self.base.fine();
        let get = |i: isize, j: isize| {
            let k = fine.node_index(i, j);
            if k == NONE {
                T::zero()
            } else {
                e[k]
            }
        };
        let half = c::<T>(0.5);
        for (k, &(i, j)) in self.grid.nodes.iter().enumerate() {
            let (bi, bj) = ((i / 2) as isize, (j / 2) as isize);
            x[k] += match (i % 2, j % 2) {
                (0, 0) => get(bi, bj),
                (1, 0) => half * (get(bi, bj) + get(bi + 1, bj)),
                (0, _) => half * (get(bi, bj) + get(bi, bj + 1)),
                _ => half * half * (get(bi, bj) + get(bi + 1, bj) + get(bi, bj + 1) + get(bi + 1, bj + 1)),
            };
        }
    }
}

impl<T: Real> Preconditioner<T> for CompositeMultigrid<'_, T> {
    fn apply(&self, b: &[T], x: &mut [T]) {
        let a = &self.grid.laplacian;
        x.iter_mut().for_each(|v| *v = T::zero());
        for s in 0..self.sweeps {
            Multigrid::smooth(a, b, x, s % 2 == 0);
        }
        let ax = a.matvec(x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let rc: Vec<T> = self
            .restriction
            .iter()
            .zip(&self.to_composite)
            .map(|(st, &k)| if k == NONE { T::zero() } else { st.iter().map(|&(m, w)| w * r[m]).sum() })
            .collect();
        let mut ec = vec![T::zero(); rc.len()];
        self.base.apply(&rc, &mut ec);
        self.prolong_add(&ec, x);
        for s in 0..self.sweeps {
            Multigrid::smooth(a, b, x, s % 2 == 1);
        }
    }
}
