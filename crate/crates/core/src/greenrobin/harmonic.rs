//! Dirichlet problems for the Laplacian on a uniform lattice clipped to the
//! domain, with Shortley-Weller rows next to curved boundaries, solved by
//! BiCGSTAB preconditioned with a geometric multigrid V-cycle.

use super::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::linalg::{bicgstab, BandLu, BandMatrix, CsrMatrix, KrylovOptions, Preconditioner};
use crate::scalar::{c, Point, Real};

const NONE: usize = usize::MAX;

/// Boundary coupling of one row: `rhs[row] += coef · g(point)`.
#[derive(Debug, Clone)]
pub struct BoundaryLink<T> {
    pub row: usize,
    pub point: Point<T>,
    pub coef: T,
}

/// Lattice `origin + (i h, j h)`, `0 ≤ i ≤ nx`, `0 ≤ j ≤ ny`, with unknowns at
/// the lattice nodes strictly inside the domain.
#[derive(Debug, Clone)]
pub struct UniformGrid<T> {
    pub h: T,
    pub origin: Point<T>,
    pub nx: usize,
    pub ny: usize,
    /// Unknown index of node `(i, j)` at `j * (nx+1) + i`, or `usize::MAX`.
    pub index: Vec<usize>,
    pub nodes: Vec<(usize, usize)>,
    /// `−Δ_h` with boundary values eliminated.
    pub matrix: CsrMatrix<T>,
    pub links: Vec<BoundaryLink<T>>,
}

impl<T: Real> UniformGrid<T> {
    /// Lattice with `nx × ny` cells of size `h` starting at `origin`.
    pub fn build(domain: &DomainSpec<T>, h: T, origin: Point<T>, nx: usize, ny: usize) -> Self {
        let stride_nodes = nx + 1;
        let mut index = vec![NONE; stride_nodes * (ny + 1)];
        let mut nodes = Vec::new();
        let margin = h * c(1e-6);
        for j in 0..=ny {
            for i in 0..=nx {
                let x = [origin[0] + h * T::from_usize_lossy(i), origin[1] + h * T::from_usize_lossy(j)];
                if domain.boundary_distance(x) > margin {
                    index[j * stride_nodes + i] = nodes.len();
                    nodes.push((i, j));
                }
            }
        }
        let mut trip = Vec::with_capacity(nodes.len() * 5);
        let mut links = Vec::new();
        for (row, &(i, j)) in nodes.iter().enumerate() {
            let x = [origin[0] + h * T::from_usize_lossy(i), origin[1] + h * T::from_usize_lossy(j)];
            let mut diag = T::zero();
            for axis in 0..2 {
                // neighbour index or boundary distance on each side
                let side = |positive: bool| -> (usize, T) {
                    let (ii, jj) = match (axis, positive) {
                        (0, true) => (i as isize + 1, j as isize),
                        (0, false) => (i as isize - 1, j as isize),
                        (_, true) => (i as isize, j as isize + 1),
                        (_, false) => (i as isize, j as isize - 1),
                    };
                    if ii >= 0 && jj >= 0 && (ii as usize) <= nx && (jj as usize) <= ny {
                        let k = index[jj as usize * stride_nodes + ii as usize];
                        if k != NONE {
                            return (k, h);
                        }
                    }
                    (NONE, domain.ray_to_boundary(x, axis, positive).min(h).max(margin))
                };
                let (kp, b) = side(true);
                let (km, a) = side(false);
                let cp = c::<T>(2.0) / (b * (a + b));
                let cm = c::<T>(2.0) / (a * (a + b));
                diag += cp + cm;
                for (k, coef, dist, positive) in [(kp, cp, b, true), (km, cm, a, false)] {
                    if k != NONE {
                        trip.push((row, k, -coef));
                    } else {
                        let mut p = x;
                        p[axis] += if positive { dist } else { -dist };
                        links.push(BoundaryLink { row, point: p, coef });
                    }
                }
            }
            trip.push((row, row, diag));
        }
        let n = nodes.len();
        Self { h, origin, nx, ny, index, nodes, matrix: CsrMatrix::from_triplets(n, n, &trip), links }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_point(&self, k: usize) -> Point<T> {
        let (i, j) = self.nodes[k];
        [self.origin[0] + self.h * T::from_usize_lossy(i), self.origin[1] + self.h * T::from_usize_lossy(j)]
    }

    pub(crate) fn node_index(&self, i: isize, j: isize) -> usize {
        if i < 0 || j < 0 || i as usize > self.nx || j as usize > self.ny {
            NONE
        } else {
            self.index[j as usize * (self.nx + 1) + i as usize]
        }
    }

    /// Right-hand side for boundary data `g`.
    pub fn boundary_rhs<G: Fn(Point<T>) -> T>(&self, g: G) -> Vec<T> {
        let mut b = vec![T::zero(); self.len()];
        for l in &self.links {
            b[l.row] += l.coef * g(l.point);
        }
        b
    }

    /// Interpolates nodal `values` at `x` with Keys bicubic convolution, or
    /// bilinearly when the 4×4 stencil leaves the unknowns; missing nodes take
    /// `ghost(node)`. Returns value and gradient.
    pub fn interpolate<G: Fn(Point<T>) -> T>(&self, values: &[T], x: Point<T>, ghost: G) -> (T, [T; 2]) {
        let fx = (x[0] - self.origin[0]) / self.h;
        let fy = (x[1] - self.origin[1]) / self.h;
        let i0 = fx.floor().to_isize().unwrap_or(0).clamp(0, self.nx as isize - 1);
        let j0 = fy.floor().to_isize().unwrap_or(0).clamp(0, self.ny as isize - 1);
        let tx = fx - T::from_isize(i0).unwrap();
        let ty = fy - T::from_isize(j0).unwrap();
        let node_val = |i: isize, j: isize| -> T {
            let k = self.node_index(i, j);
            if k != NONE {
                values[k]
            } else {
                ghost([
                    self.origin[0] + self.h * T::from_isize(i).unwrap(),
                    self.origin[1] + self.h * T::from_isize(j).unwrap(),
                ])
            }
        };
        let full = (-1..=2).all(|dj| (-1..=2).all(|di| self.node_index(i0 + di, j0 + dj) != NONE));
        if full {
            let (wx, dwx) = keys_weights(tx);
            let (wy, dwy) = keys_weights(ty);
            let mut v = T::zero();
            let mut gx = T::zero();
            let mut gy = T::zero();
            for (b, dj) in (-1..=2).enumerate() {
                for (a, di) in (-1..=2).enumerate() {
                    let f = node_val(i0 + di, j0 + dj);
                    v += wx[a] * wy[b] * f;
                    gx += dwx[a] * wy[b] * f;
                    gy += wx[a] * dwy[b] * f;
                }
            }
            (v, [gx / self.h, gy / self.h])
        } else {
            let f00 = node_val(i0, j0);
            let f10 = node_val(i0 + 1, j0);
            let f01 = node_val(i0, j0 + 1);
            let f11 = node_val(i0 + 1, j0 + 1);
            let one = T::one();
            let v = f00 * (one - tx) * (one - ty) + f10 * tx * (one - ty) + f01 * (one - tx) * ty + f11 * tx * ty;
            let gx = ((f10 - f00) * (one - ty) + (f11 - f01) * ty) / self.h;
            let gy = ((f01 - f00) * (one - tx) + (f11 - f10) * tx) / self.h;
            (v, [gx, gy])
        }
    }
}

/// Keys cubic-convolution weights (a = −1/2) and their derivatives for the
/// nodes at offsets −1, 0, 1, 2 from the cell origin.
fn keys_weights<T: Real>(t: T) -> ([T; 4], [T; 4]) {
    let half = c::<T>(0.5);
    let t2 = t * t;
    let t3 = t2 * t;
    let w = [
        half * (-t3 + c::<T>(2.0) * t2 - t),
        half * (c::<T>(3.0) * t3 - c::<T>(5.0) * t2 + c(2.0)),
        half * (c::<T>(-3.0) * t3 + c::<T>(4.0) * t2 + t),
        half * (t3 - t2),
    ];
    let dw = [
        half * (c::<T>(-3.0) * t2 + c::<T>(4.0) * t - T::one()),
        half * (c::<T>(9.0) * t2 - c::<T>(10.0) * t),
        half * (c::<T>(-9.0) * t2 + c::<T>(8.0) * t + T::one()),
        half * (c::<T>(3.0) * t2 - c::<T>(2.0) * t),
    ];
    (w, dw)
}

/// Geometric multigrid hierarchy on nested lattices, each level rediscretised.
pub struct Multigrid<T> {
    pub levels: Vec<UniformGrid<T>>,
    coarse: BandLu<T>,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

/// Unknown count at which the hierarchy stops and a banded LU takes over.
const COARSE_LIMIT: usize = 1500;

impl<T: Real> Multigrid<T> {
    /// Builds the hierarchy for spacing `h` on the domain's bounding box.
    pub fn new(domain: &DomainSpec<T>, h: T) -> Result<Self> {
        let (lo, hi) = domain.bounding_box();
        if !(h > T::zero()) || h > domain.min_dimension() / c(4.0) {
            return Err(Error::Parameter(format!("grid spacing {h} too large for {}", domain.description)));
        }
        let cells = |len: T| -> usize {
            let n = (len / h).to_f64_lossy();
            let r = n.round();
            if (n - r).abs() < 1e-9 {
                r as usize
            } else {
                n.ceil() as usize
            }
        };
        let mut nx = cells(hi[0] - lo[0]);
        let mut ny = cells(hi[1] - lo[1]);
        let mut levels = vec![UniformGrid::build(domain, h, lo, nx, ny)];
        let mut hl = h;
        while levels.last().unwrap().len() > COARSE_LIMIT && nx % 2 == 0 && ny % 2 == 0 {
            nx /= 2;
            ny /= 2;
            hl = hl + hl;
            let g = UniformGrid::build(domain, hl, lo, nx, ny);
            if g.len() < 4 {
                break;
            }
            levels.push(g);
        }
        let cg = levels.last().unwrap();
        let bw = cg.nx + 2;
        let mut band = BandMatrix::zeros(cg.len(), bw, bw);
        for i in 0..cg.len() {
            for (j, v) in cg.matrix.row(i) {
                band.add(i, j, v);
            }
        }
        let coarse = band.factor()?;
        Ok(Self { levels, coarse, pre_sweeps: 2, post_sweeps: 2 })
    }

    pub(crate) fn smooth(a: &CsrMatrix<T>, b: &[T], x: &mut [T], forward: bool) {
        let n = a.nrows;
        let mut step = |i: usize| {
            let mut s = b[i];
            let mut d = T::one();
            for k in a.indptr[i]..a.indptr[i + 1] {
                let j = a.indices[k];
                if j == i {
                    d = a.values[k];
                } else {
                    s -= a.values[k] * x[j];
                }
            }
            x[i] = s / d;
        };
        if forward {
            (0..n).for_each(&mut step);
        } else {
            (0..n).rev().for_each(&mut step);
        }
    }

    fn restrict(fine: &UniformGrid<T>, coarse: &UniformGrid<T>, r: &[T]) -> Vec<T> {
        let w = [c::<T>(0.25), c::<T>(0.5), c::<T>(0.25)];
        coarse
            .nodes
            .iter()
            .map(|&(ic, jc)| {
                let mut s = T::zero();
                for (b, dj) in (-1..=1).enumerate() {
                    for (a, di) in (-1..=1).enumerate() {
                        let k = fine.node_index(2 * ic as isize + di, 2 * jc as isize + dj);
                        if k != NONE {
                            s += w[a] * w[b] * r[k];
                        }
                    }
                }
                s
            })
            .collect()
    }

    fn prolong_add(fine: &UniformGrid<T>, coarse: &UniformGrid<T>, e: &[T], x: &mut [T]) {
        let get = |i: isize, j: isize| {
            let k = coarse.node_index(i, j);
            if k == NONE {
                T::zero()
            } else {
                e[k]
            }
        };
        let half = c::<T>(0.5);
        for (k, &(i, j)) in fine.nodes.iter().enumerate() {
            let (ic, jc) = ((i / 2) as isize, (j / 2) as isize);
            let v = match (i % 2, j % 2) {
                (0, 0) => get(ic, jc),
                (1, 0) => half * (get(ic, jc) + get(ic + 1, jc)),
                (0, _) => half * (get(ic, jc) + get(ic, jc + 1)),
                _ => half * half * (get(ic, jc) + get(ic + 1, jc) + get(ic, jc + 1) + get(ic + 1, jc + 1)),
            };
            x[k] += v;
        }
    }

    fn vcycle(&self, level: usize, b: &[T], x: &mut [T]) {
        if level + 1 == self.levels.len() {
            x.copy_from_slice(&self.coarse.solve(b));
            return;
        }
        let g = &self.levels[level];
        for s in 0..self.pre_sweeps {
            Self::smooth(&g.matrix, b, x, s % 2 == 0);
        }
        let ax = g.matrix.matvec(x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
        let cg = &self.levels[level + 1];
        let rc = Self::restrict(g, cg, &r);
        let mut ec = vec![T::zero(); cg.len()];
        self.vcycle(level + 1, &rc, &mut ec);
        Self::prolong_add(g, cg, &ec, x);
        for s in 0..self.post_sweeps {
            Self::smooth(&g.matrix, b, x, s % 2 == 1);
        }
    }

    pub fn fine(&self) -> &UniformGrid<T> {
        &self.levels[0]
    }

    /// Solves `−Δ_h u = f` in the interior with `u = g` on the boundary.
    pub fn solve<G: Fn(Point<T>) -> T>(&self, f: Option<&[T]>, g: G, rel_tol: T) -> Result<Vec<T>> {
        let grid = self.fine();
        let mut b = grid.boundary_rhs(g);
        if let Some(f) = f {
            for (bi, &fi) in b.iter_mut().zip(f) {
                *bi += fi;
            }
        }
        let mut x = vec![T::zero(); grid.len()];
        let opts = KrylovOptions { rel_tol, max_iterations: 200, restart: 30 };
        bicgstab(&grid.matrix, &b, &mut x, self, &opts)?;
        Ok(x)
    }
}

impl<T: Real> Preconditioner<T> for Multigrid<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.iter_mut().for_each(|v| *v = T::zero());
        self.vcycle(0, r, z);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_harmonic_polynomial_on_disk() {
        let d = DomainSpec::<f64>::unit_disk();
        let mg = Multigrid::new(&d, 1.0 / 64.0).unwrap();
        assert!(mg.levels.len() >= 2);
        let g = |p: Point<f64>| p[0] * p[0] - p[1] * p[1] + 0.5 * p[0] * p[1];
        let u = mg.solve(None, g, 1e-12).unwrap();
        let err = (0..u.len()).map(|k| (u[k] - g(mg.fine().node_point(k))).abs()).fold(0.0, f64::max);
        // quadratics are reproduced exactly by the Shortley-Weller stencil
        assert!(err < 1e-10, "err {err}");
    }

    #[test]
    fn interpolation_is_cubic_exact() {
        let d = DomainSpec::rectangle(1.0f64, 1.0).unwrap();
        let mg = Multigrid::new(&d, 1.0 / 32.0).unwrap();
        let g = |p: Point<f64>| p[0].powi(3) - 3.0 * p[0] * p[1] * p[1];
        let u = mg.solve(None, g, 1e-13).unwrap();
        let (v, grad) = mg.fine().interpolate(&u, [0.4123, 0.5371], g);
        let x = [0.4123, 0.5371];
        assert!((v - g(x)).abs() < 1e-4);
        assert!((grad[0] - (3.0 * x[0] * x[0] - 3.0 * x[1] * x[1])).abs() < 1e-2);
    }
}
