use super::Solution;
use crate::error::{Error, Result};
use crate::linalg::dense::{symmetric_eigen, DenseMatrix};
use crate::linalg::{dot, BandLu, BandMatrix, CsrMatrix};
use crate::planar::PairField;
use crate::radial::RadialPair;
use crate::scalar::{c, Real};

/// Smallest singular value, relative to the smallest singular value of the
/// Laplacian block, below which a solution is flagged as degenerate.
pub const NONDEGENERACY_FLOOR: f64 = 1e-6;

/// Angular modes `0..=RADIAL_MODES` probed on radial solutions.
pub const RADIAL_MODES: usize = 3;

const MAX_SWEEPS: usize = 400;
const RITZ_TOL: f64 = 1e-11;

/// Discrete linearised operator `(ξ, η) ↦ (−Δξ − p v^{p−1} η, −Δη − q u^{q−1} ξ)`,
/// symmetrised by the quadrature weights: the Laplacian block is
/// `W^{1/2}(−Δ_h)W^{−1/2}`, so singular values are those of the operator in
/// the discrete `L²` norm.
#[derive(Debug, Clone)]
pub struct LinearizedOperator<T> {
    pub laplacian: CsrMatrix<T>,
    /// `p v^{p−1}`, coupling `η` into the first row block.
    pub dp: Vec<T>,
    /// `q u^{q−1}`, coupling `ξ` into the second row block.
    pub dq: Vec<T>,
    /// Angular mode for radial operators, 0 for planar ones.
    pub mode: usize,
}

impl<T: Real> LinearizedOperator<T> {
    /// Angular mode `j` of the linearisation at a radial solution: the
    /// finite-volume Laplacian plus `j²/r²`, with `φ(0) = 0` for `j ≥ 1`.
    pub fn radial(sol: &RadialPair<T>, j: usize) -> Self {
        let (a, vol) = sol.mesh.stencil();
        let m = vol.len();
        let nodes = &sol.mesh.nodes;
        let first = usize::from(j > 0);
        let n = m - first;
        let jj = T::from_usize_lossy(j * j);
        let mut trip = Vec::with_capacity(3 * n);
        for i in first..m {
            let row = i - first;
            let mut diag = a[i];
            if i > 0 {
                diag += a[i - 1];
                if i > first {
                    trip.push((row, row - 1, -a[i - 1] / (vol[i] * vol[i - 1]).sqrt()));
                }
                // ∫ j²/r² r dr over the cell
                let (lo, hi) = ((nodes[i - 1] + nodes[i]) * c(0.5), (nodes[i] + nodes[i + 1]) * c(0.5));
                diag += jj * (hi / lo).ln();
            }
            if i + 1 < m {
                trip.push((row, row + 1, -a[i] / (vol[i] * vol[i + 1]).sqrt()));
            }
            trip.push((row, row, diag / vol[i]));
        }
        let p = sol.ep.p;
        let q = sol.ep.q;
        Self {
            laplacian: CsrMatrix::from_triplets(n, n, &trip),
            dp: (first..m).map(|i| p * sol.v[i].max(T::zero()).powf(p - T::one())).collect(),
            dq: (first..m).map(|i| q * sol.u[i].max(T::zero()).powf(q - T::one())).collect(),
            mode: j,
        }
    }

    pub fn planar(sol: &PairField<T>) -> Self {
        let g = &sol.grid;
        let sw: Vec<T> = g.weights.iter().map(|w| w.sqrt()).collect();
        let mut trip = Vec::with_capacity(g.laplacian.nnz());
        for i in 0..g.len() {
            for (j, a) in g.laplacian.row(i) {
                trip.push((i, j, a * sw[i] / sw[j]));
            }
        }
        let (p, q) = (sol.ep.p, sol.ep.q);
        Self {
            laplacian: CsrMatrix::from_triplets(g.len(), g.len(), &trip),
            dp: sol.v.iter().map(|&v| p * v.max(T::zero()).powf(p - T::one())).collect(),
            dq: sol.u.iter().map(|&u| q * u.max(T::zero()).powf(q - T::one())).collect(),
            mode: 0,
        }
    }

    /// The Laplacian blocks alone.
    pub fn without_potential(&self) -> Self {
        Self { dp: vec![T::zero(); self.dp.len()], dq: vec![T::zero(); self.dq.len()], ..self.clone() }
    }

    /// The operator with the roles of `(ξ, η)` exchanged.
    pub fn swapped(&self) -> Self {
        Self { dp: self.dq.clone(), dq: self.dp.clone(), ..self.clone() }
    }

    /// Largest absolute row sum of the Laplacian block.
    pub fn laplacian_norm(&self) -> T {
        (0..self.laplacian.nrows).map(|i| self.laplacian.row(i).map(|(_, a)| a.abs()).sum::<T>()).fold(T::zero(), T::max)
    }

    /// Block operator with `(ξ_i, η_i)` interleaved.
    fn band(&self) -> BandMatrix<T> {
        let n = self.laplacian.nrows;
        let reach = (0..n).flat_map(|i| self.laplacian.row(i).map(move |(j, _)| i.abs_diff(j))).max().unwrap_or(0);
        let w = 2 * reach + 1;
        let mut b = BandMatrix::zeros(2 * n, w, w);
        for i in 0..n {
            for (j, a) in self.laplacian.row(i) {
                b.add(2 * i, 2 * j, a);
                b.add(2 * i + 1, 2 * j + 1, a);
            }
            b.add(2 * i, 2 * i + 1, -self.dp[i]);
            b.add(2 * i + 1, 2 * i, -self.dq[i]);
        }
        b
    }

    /// The `k` smallest singular values by subspace iteration with
    /// `(KKᵀ)⁻¹`, with Rayleigh-Ritz on the inverse at each sweep. Returns the values and
    /// whether each settled to relative change `1e−11`.
    pub fn smallest_singular_values(&self, k: usize) -> Result<(Vec<T>, Vec<bool>)> {
        let band = self.band();
        let n = band.dim();
        let k = k.min(n);
        let m = (k + 3).min(n);
        let lu: BandLu<T> = band.factor()?;
        // deterministic start: smooth, linearly independent vectors
        let mut x: Vec<Vec<T>> = (0..m)
            .map(|s| (0..n).map(|i| (T::from_usize_lossy((s + 1) * (i + 1)) * c(0.618_033_988_75)).sin() + c(0.1)).collect())
            .collect();
        orthonormalize(&mut x);
        let mut prev = vec![T::infinity(); m];
        let mut settled = vec![false; k];
        for _ in 0..MAX_SWEEPS {
            let y: Vec<Vec<T>> = x.iter().map(|col| lu.solve_transpose(&lu.solve(col))).collect();
            // Ritz values of (KKᵀ)⁻¹ on span(x) are 1/σ²
            let mut gram = DenseMatrix::zeros(m, m);
            for a in 0..m {
                for b in a..m {
                    let v = (dot(&x[a], &y[b]) + dot(&x[b], &y[a])) * c(0.5);
                    gram[(a, b)] = v;
                    gram[(b, a)] = v;
                }
            }
            let (vals, vecs) = symmetric_eigen(&gram);
            // descending in 1/σ², i.e. ascending in σ
            x = (0..m)
                .map(|a| {
                    let col = m - 1 - a;
                    (0..n).map(|i| (0..m).map(|b| vecs[(b, col)] * y[b][i]).sum()).collect()
                })
                .collect();
            orthonormalize(&mut x);
            let sv: Vec<T> = (0..m).map(|a| T::one() / vals[m - 1 - a].max(T::min_positive_value()).sqrt()).collect();
            for s in 0..k {
                settled[s] = (sv[s] - prev[s]).abs() <= c::<T>(RITZ_TOL) * sv[s];
            }
            prev = sv;
            if settled.iter().all(|&f| f) {
                break;
            }
        }
        Ok((prev[..k].to_vec(), settled))
    }
}

fn orthonormalize<T: Real>(x: &mut [Vec<T>]) {
    for pass in 0..2 {
        for a in 0..x.len() {
            for b in 0..a {
                let proj = dot(&x[a], &x[b]);
                let (head, tail) = x.split_at_mut(a);
                tail[0].iter_mut().zip(&head[b]).for_each(|(v, &w)| *v -= proj * w);
            }
            let nrm = dot(&x[a], &x[a]).sqrt();
            if nrm > T::zero() {
                x[a].iter_mut().for_each(|v| *v /= nrm);
            } else if pass == 0 {
                let len = x[a].len();
                x[a][a % len] = T::one();
            }
        }
    }
}

/// Smallest singular values of the linearised operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProbe<T> {
    /// Ascending.
    pub singular_values: Vec<T>,
    /// Angular mode of each value (radial solutions; each `j ≥ 1` value is
    /// double in the plane). All zero for planar solutions.
    pub modes: Vec<usize>,
    pub converged: Vec<bool>,
    pub laplacian_norm: T,
    /// Smallest singular value of the Laplacian block alone.
    pub laplacian_scale: T,
    /// `singular_values[0] / laplacian_scale > NONDEGENERACY_FLOOR`.
    pub nondegenerate: bool,
}

/// The `k` smallest singular values of the linearisation at `sol`; radial
/// solutions are probed mode by mode over `j = 0..=RADIAL_MODES`. Fails
/// with the partial values if the smallest one does not settle.
pub fn linearized_probe<'a, T: Real, S: Into<Solution<'a, T>>>(sol: S, k: usize) -> Result<SpectralProbe<T>>
where
    T: 'a,
{
    let ops: Vec<LinearizedOperator<T>> = match sol.into() {
        Solution::Radial(s) => (0..=RADIAL_MODES).map(|j| LinearizedOperator::radial(s, j)).collect(),
        Solution::Planar(s) => vec![LinearizedOperator::planar(s)],
    };
    let norm = ops[0].laplacian_norm();
    let (lap, _) = ops[0].without_potential().smallest_singular_values(1)?;
    let scale = lap[0];
    let mut all = Vec::new();
    for op in &ops {
        let (vals, ok) = op.smallest_singular_values(k)?;
        all.extend(vals.into_iter().zip(ok).map(|(v, f)| (v, op.mode, f)));
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    all.truncate(k);
    if all.first().map_or(true, |f| !f.2) {
        return Err(Error::ProbeStagnation { partial: all.iter().map(|v| v.0.to_f64_lossy()).collect() });
    }
    let smallest = all[0].0;
    Ok(SpectralProbe {
        singular_values: all.iter().map(|v| v.0).collect(),
        modes: all.iter().map(|v| v.1).collect(),
        converged: all.iter().map(|v| v.2).collect(),
        laplacian_norm: norm,
        laplacian_scale: scale,
        nondegenerate: smallest / scale > c(NONDEGENERACY_FLOOR),
    })
}
