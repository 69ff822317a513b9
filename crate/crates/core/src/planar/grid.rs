use crate::error::{Error, Result};
use crate::greenrobin::DomainSpec;
use crate::linalg::CsrMatrix;
use crate::scalar::{c, Point, Real};

/// Axis-aligned box `[lo, hi]` refined to spacing `h/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineBox<T> {
    pub lo: Point<T>,
    pub hi: Point<T>,
}

/// Lattice point classification on the half-spacing lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Unknown(usize),
    /// Midpoint of a refinement-box edge between two unknowns.
    Hanging(usize, usize),
    Absent,
}

/// Composite finite-difference grid: a lattice of spacing `h` on the
/// bounding box, with refinement boxes at spacing `h/2`. Every point is
/// addressed on the half-spacing lattice `origin + (I, J)·h/2`.
#[derive(Debug, Clone)]
pub struct Grid2D<T> {
    pub domain: DomainSpec<T>,
    pub h: T,
    pub origin: Point<T>,
    /// Half-lattice extent: `0 ≤ I ≤ nx`, `0 ≤ J ≤ ny` (both even).
    pub nx: usize,
    pub ny: usize,
    /// Refinement boxes in half-lattice indices `[i0, i1] × [j0, j1]`, all even.
    pub boxes: Vec<[usize; 4]>,
    sites: Vec<Site>,
    /// Half-lattice coordinates of each unknown.
    pub nodes: Vec<(usize, usize)>,
    /// `−Δ_h` with zero Dirichlet data eliminated.
    pub laplacian: CsrMatrix<T>,
    /// Dual-cell areas for nodal quadrature.
    pub weights: Vec<T>,
    /// Local stencil spacing of each unknown.
    pub spacing: Vec<T>,
}

impl<T: Real> Grid2D<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn site(&self, i: isize, j: isize) -> Site {
        if i < 0 || j < 0 || i as usize > self.nx || j as usize > self.ny {
            Site::Absent
        } else {
            self.sites[j as usize * (self.nx + 1) + i as usize]
        }
    }

    pub fn lattice_point(&self, i: isize, j: isize) -> Point<T> {
        let hh = self.h * c(0.5);
        [self.origin[0] + hh * T::from_isize(i).unwrap(), self.origin[1] + hh * T::from_isize(j).unwrap()]
    }

    pub fn point(&self, k: usize) -> Point<T> {
        let (i, j) = self.nodes[k];
        self.lattice_point(i as isize, j as isize)
    }

    pub fn points(&self) -> Vec<Point<T>> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    fn in_box_closed(&self, i: usize, j: usize) -> bool {
        self.boxes.iter().any(|b| i >= b[0] && i <= b[1] && j >= b[2] && j <= b[3])
    }

    fn in_box_open(&self, i: usize, j: usize) -> bool {
        self.boxes.iter().any(|b| i > b[0] && i < b[1] && j > b[2] && j < b[3])
    }

    /// Value of a nodal field at lattice point `(i, j)`: unknowns directly,
    /// hanging points by averaging, zero elsewhere (Dirichlet data).
    pub fn lattice_value(&self, f: &[T], i: isize, j: isize) -> T {
        match self.site(i, j) {
            Site::Unknown(k) => f[k],
            Site::Hanging(a, b) => (f[a] + f[b]) * c(0.5),
            Site::Absent => T::zero(),
        }
    }

    /// Interpolates `f` at `x` with Keys bicubic convolution on the finest
    /// lattice whose 4×4 stencil around `x` is fully available, falling back
    /// to bilinear. Returns value and gradient.
    pub fn interpolate(&self, f: &[T], x: Point<T>) -> (T, [T; 2]) {
        let hh = self.h * c(0.5);
        let fx = (x[0] - self.origin[0]) / hh;
        let fy = (x[1] - self.origin[1]) / hh;
        for step in [1isize, 2] {
            let s = T::from_isize(step).unwrap();
            let gi = (fx / s).floor().to_isize().unwrap_or(0);
            let gj = (fy / s).floor().to_isize().unwrap_or(0);
            let (i0, j0) = (gi * step, gj * step);
            let ok = (-1..=2).all(|dj| (-1..=2).all(|di| self.site(i0 + di * step, j0 + dj * step) != Site::Absent));
            if !ok {
                continue;
            }
            if step == 1 && !(self.in_box_closed(i0.max(0) as usize, j0.max(0) as usize)) {
                continue;
            }
            let tx = fx / s - T::from_isize(gi).unwrap();
            let ty = fy / s - T::from_isize(gj).unwrap();
            let (wx, dwx) = keys(tx);
            let (wy, dwy) = keys(ty);
            let (mut v, mut gx, mut gy) = (T::zero(), T::zero(), T::zero());
            for (b, dj) in (-1..=2).enumerate() {
                for (a, di) in (-1..=2).enumerate() {
                    let val = self.lattice_value(f, i0 + di * step, j0 + dj * step);
                    v += wx[a] * wy[b] * val;
                    gx += dwx[a] * wy[b] * val;
                    gy += wx[a] * dwy[b] * val;
                }
            }
            let hs = hh * s;
            return (v, [gx / hs, gy / hs]);
        }
        // bilinear on the coarse lattice with zero outside the domain
        let gi = (fx * c(0.5)).floor().to_isize().unwrap_or(0);
        let gj = (fy * c(0.5)).floor().to_isize().unwrap_or(0);
        let tx = fx * c(0.5) - T::from_isize(gi).unwrap();
        let ty = fy * c(0.5) - T::from_isize(gj).unwrap();
        let (i0, j0) = (2 * gi, 2 * gj);
        let f00 = self.lattice_value(f, i0, j0);
        let f10 = self.lattice_value(f, i0 + 2, j0);
        let f01 = self.lattice_value(f, i0, j0 + 2);
        let f11 = self.lattice_value(f, i0 + 2, j0 + 2);
        let one = T::one();
        let v = f00 * (one - tx) * (one - ty) + f10 * tx * (one - ty) + f01 * (one - tx) * ty + f11 * tx * ty;
        let gx = ((f10 - f00) * (one - ty) + (f11 - f01) * ty) / self.h;
        let gy = ((f01 - f00) * (one - tx) + (f11 - f10) * tx) / self.h;
        (v, [gx, gy])
    }

    /// `Σ w_i f_i`.
    pub fn integrate(&self, f: &[T]) -> T {
        self.weights.iter().zip(f).map(|(&w, &x)| w * x).sum()
    }

    /// Discrete `∫∇a·∇b = Σ w_i a_i (−Δ_h b)_i`.
    pub fn gradient_pairing(&self, a: &[T], b: &[T]) -> T {
        let lb = self.laplacian.matvec(b);
        self.weights.iter().zip(a).zip(&lb).map(|((&w, &x), &y)| w * x * y).sum()
    }
}

/// Builds the composite grid. Boxes are snapped outward to the coarse
/// lattice and must stay at least `h` inside the domain.
pub fn build_grid<T: Real>(domain: &DomainSpec<T>, h: T, refine: &[RefineBox<T>]) -> Result<Grid2D<T>> {
    let min_dim = domain.min_dimension();
    if !(h > T::zero()) || h > min_dim / c(16.0) {
        return Err(Error::Parameter(format!("grid spacing {h} exceeds min dimension/16 for the {}", domain.description)));
    }
    let (lo, hi) = domain.bounding_box();
    let cells = |len: T| -> usize {
        let n = (len / h).to_f64_lossy();
        if (n - n.round()).abs() < 1e-9 {
            n.round() as usize
        } else {
            n.ceil() as usize
        }
    };
    let (cx, cy) = (cells(hi[0] - lo[0]), cells(hi[1] - lo[1]));
    let (nx, ny) = (2 * cx, 2 * cy);
    let mut boxes = Vec::new();
    for b in refine {
        let idx = |v: T, o: T, up: bool| -> isize {
            let t = ((v - o) / h).to_f64_lossy();
            let t = if (t - t.round()).abs() < 1e-9 { t.round() } else if up { t.ceil() } else { t.floor() };
            2 * t as isize
        };
        let bx = [idx(b.lo[0], lo[0], false), idx(b.hi[0], lo[0], true), idx(b.lo[1], lo[1], false), idx(b.hi[1], lo[1], true)];
        if bx[0] < 0 || bx[2] < 0 || bx[1] > nx as isize || bx[3] > ny as isize || bx[1] <= bx[0] || bx[3] <= bx[2] {
            return Err(Error::Domain("refinement box outside the lattice".into()));
        }
        let hh = h * c(0.5);
        for (i, j) in [(bx[0], bx[2]), (bx[1], bx[2]), (bx[0], bx[3]), (bx[1], bx[3])] {
            let p = [lo[0] + hh * T::from_isize(i).unwrap(), lo[1] + hh * T::from_isize(j).unwrap()];
            if domain.boundary_distance(p) < h {
                return Err(Error::Domain(format!("refinement box corner ({}, {}) within h of the boundary", p[0], p[1])));
            }
        }
        let new = [bx[0] as usize, bx[1] as usize, bx[2] as usize, bx[3] as usize];
        // boxes must be separated by at least one coarse cell
        if boxes.iter().any(|o: &[usize; 4]| new[0] <= o[1] + 2 && o[0] <= new[1] + 2 && new[2] <= o[3] + 2 && o[2] <= new[3] + 2) {
            return Err(Error::Domain("refinement boxes overlap or touch".into()));
        }
        boxes.push(new);
    }
    let mut g = Grid2D {
        domain: domain.clone(),
        h,
        origin: lo,
        nx,
        ny,
        boxes,
        sites: vec![Site::Absent; (nx + 1) * (ny + 1)],
        nodes: Vec::new(),
        laplacian: CsrMatrix::from_triplets(0, 0, &[]),
        weights: Vec::new(),
        spacing: Vec::new(),
    };
    let margin = h * c(1e-6);
    let stride = nx + 1;
    let mut hanging = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let x = g.lattice_point(i as isize, j as isize);
            if domain.boundary_distance(x) <= margin {
                continue;
            }
            let even = i % 2 == 0 && j % 2 == 0;
            if g.in_box_closed(i, j) && !g.in_box_open(i, j) && !even {
                // on a box edge between two coarse points; unless another box covers it
                hanging.push((i, j));
            } else if even || g.in_box_closed(i, j) {
                g.sites[j * stride + i] = Site::Unknown(g.nodes.len());
                g.nodes.push((i, j));
            }
        }
    }
    for (i, j) in hanging {
        let (a, b) = if i % 2 == 1 { ((i - 1, j), (i + 1, j)) } else { ((i, j - 1), (i, j + 1)) };
        let ka = g.sites[a.1 * stride + a.0];
        let kb = g.sites[b.1 * stride + b.0];
        if let (Site::Unknown(ka), Site::Unknown(kb)) = (ka, kb) {
            g.sites[j * stride + i] = Site::Hanging(ka, kb);
        }
    }
    assemble(&mut g);
    Ok(g)
}

fn assemble<T: Real>(g: &mut Grid2D<T>) {
    let n = g.nodes.len();
    let hh = g.h * c(0.5);
    let mut trip = Vec::with_capacity(6 * n);
    let mut weights = vec![T::zero(); n];
    let mut spacing = vec![T::zero(); n];
    for (row, &(i, j)) in g.nodes.iter().enumerate() {
        // fine stencil strictly inside a box and at odd points on its edges
        let fine = g.in_box_open(i, j) || (g.in_box_closed(i, j) && (i % 2 == 1 || j % 2 == 1));
        let step: isize = if fine { 1 } else { 2 };
        let s = hh * T::from_isize(step).unwrap();
        spacing[row] = s;
        let x = g.lattice_point(i as isize, j as isize);
        let mut diag = T::zero();
        let mut area = T::one();
        for axis in 0..2 {
            let arm = |sign: isize| -> (T, Vec<(usize, T)>) {
                let (di, dj) = if axis == 0 { (sign * step, 0) } else { (0, sign * step) };
                match g.site(i as isize + di, j as isize + dj) {
                    Site::Unknown(k) => (s, vec![(k, T::one())]),
                    Site::Hanging(a, b) => (s, vec![(a, c(0.5)), (b, c(0.5))]),
                    Site::Absent => (g.domain.ray_to_boundary(x, axis, sign > 0).min(s).max(g.h * c(1e-6)), Vec::new()),
                }
            };
            let (b, plus) = arm(1);
            let (a, minus) = arm(-1);
            let cp = c::<T>(2.0) / (b * (a + b));
            let cm = c::<T>(2.0) / (a * (a + b));
            diag += cp + cm;
            for (k, w) in plus {
                trip.push((row, k, -cp * w));
            }
            for (k, w) in minus {
                trip.push((row, k, -cm * w));
            }
            area *= (a + b) * c(0.5);
        }
        trip.push((row, row, diag));
        weights[row] = if g.in_box_closed(i, j) { box_weight(g, i, j) } else { area };
    }
    // a hanging point's fine cell is half inside its box; split it evenly
    let quarter = hh * hh;
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            if let Site::Hanging(a, b) = g.sites[j * (g.nx + 1) + i] {
                weights[a] += quarter * c(0.25);
                weights[b] += quarter * c(0.25);
            }
        }
    }
    g.laplacian = CsrMatrix::from_triplets(n, n, &trip);
    g.weights = weights;
    g.spacing = spacing;
}

/// Dual-cell area of a node in a closed box: the part of its fine cell
/// inside the box plus, for coarse points on the box edge, the part of its
/// coarse cell outside.
fn box_weight<T: Real>(g: &Grid2D<T>, i: usize, j: usize) -> T {
    let b = g.boxes.iter().find(|b| i >= b[0] && i <= b[1] && j >= b[2] && j <= b[3]).unwrap();
    let fx = if i == b[0] || i == b[1] { c::<T>(0.5) } else { T::one() };
    let fy = if j == b[2] || j == b[3] { c::<T>(0.5) } else { T::one() };
    let hh = g.h * c(0.5);
    hh * hh * fx * fy + g.h * g.h * (T::one() - fx * fy)
}

fn keys<T: Real>(t: T) -> ([T; 4], [T; 4]) {
    let half = c::<T>(0.5);
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [
            half * (-t3 + c::<T>(2.0) * t2 - t),
            half * (c::<T>(3.0) * t3 - c::<T>(5.0) * t2 + c(2.0)),
            half * (c::<T>(-3.0) * t3 + c::<T>(4.0) * t2 + t),
            half * (t3 - t2),
        ],
        [
            half * (c::<T>(-3.0) * t2 + c::<T>(4.0) * t - T::one()),
            half * (c::<T>(9.0) * t2 - c::<T>(10.0) * t),
            half * (c::<T>(-9.0) * t2 + c::<T>(8.0) * t + T::one()),
            half * (c::<T>(3.0) * t2 - c::<T>(2.0) * t),
        ],
    )
}
