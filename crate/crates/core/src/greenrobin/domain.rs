use crate::error::{Error, Result};
use crate::scalar::{c, Point, Real};

/// Shape of a supported domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind<T> {
    UnitDisk,
    /// `[0, width] × [0, height]`.
    Rectangle { width: T, height: T },
    ScaledDisk { center: Point<T>, radius: T },
}

/// A bounded planar domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T> {
    pub kind: DomainKind<T>,
    pub description: String,
}

impl<T: Real> DomainSpec<T> {
    pub fn unit_disk() -> Self {
        Self { kind: DomainKind::UnitDisk, description: "unit disk".into() }
    }

    pub fn rectangle(width: T, height: T) -> Result<Self> {
        if !(width > T::zero() && height > T::zero()) || !width.is_finite() || !height.is_finite() {
            return Err(Error::InvalidArgument(format!("rectangle sides must be positive, got {width} x {height}")));
        }
        Ok(Self { kind: DomainKind::Rectangle { width, height }, description: format!("rectangle {width} x {height}") })
    }

    pub fn scaled_disk(center: Point<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("disk radius must be positive, got {radius}")));
        }
        Ok(Self {
            kind: DomainKind::ScaledDisk { center, radius },
            description: format!("disk centred at ({}, {}) with radius {radius}", center[0], center[1]),
        })
    }

    /// Centre and radius if the domain is a disk.
    pub fn disk_parameters(&self) -> Option<(Point<T>, T)> {
        match self.kind {
            DomainKind::UnitDisk => Some(([T::zero(), T::zero()], T::one())),
            DomainKind::ScaledDisk { center, radius } => Some((center, radius)),
            DomainKind::Rectangle { .. } => None,
        }
    }

    pub fn center(&self) -> Point<T> {
        match self.kind {
            DomainKind::Rectangle { width, height } => [width * c(0.5), height * c(0.5)],
            _ => self.disk_parameters().unwrap().0,
        }
    }

    /// Lower-left and upper-right corners of the bounding box.
    pub fn bounding_box(&self) -> (Point<T>, Point<T>) {
        match self.kind {
            DomainKind::Rectangle { width, height } => ([T::zero(), T::zero()], [width, height]),
            _ => {
                let (ce, r) = self.disk_parameters().unwrap();
                ([ce[0] - r, ce[1] - r], [ce[0] + r, ce[1] + r])
            }
        }
    }

    /// Diameter of a disk, shorter side of a rectangle.
    pub fn min_dimension(&self) -> T {
        match self.kind {
            DomainKind::Rectangle { width, height } => width.min(height),
            _ => self.disk_parameters().unwrap().1 * c(2.0),
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn boundary_distance(&self, x: Point<T>) -> T {
        match self.kind {
            DomainKind::Rectangle { width, height } => x[0].min(width - x[0]).min(x[1]).min(height - x[1]),
            _ => {
                let (ce, r) = self.disk_parameters().unwrap();
                r - (x[0] - ce[0]).hypot(x[1] - ce[1])
            }
        }
    }

    /// Strictly interior.
    pub fn contains(&self, x: Point<T>) -> bool {
        self.boundary_distance(x) > T::zero()
    }

    pub fn check_interior(&self, x: Point<T>) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point ({}, {}) is not inside the {}", x[0], x[1], self.description)))
        }
    }

    /// Distance from an interior point to the boundary along `±e_axis`.
    pub fn ray_to_boundary(&self, x: Point<T>, axis: usize, positive: bool) -> T {
        match self.kind {
            DomainKind::Rectangle { width, height } => {
                let hi = if axis == 0 { width } else { height };
                if positive {
                    hi - x[axis]
                } else {
                    x[axis]
                }
            }
            _ => {
                let (ce, r) = self.disk_parameters().unwrap();
                let d = [x[0] - ce[0], x[1] - ce[1]];
                let other = d[1 - axis];
                let root = (r * r - other * other).max(T::zero()).sqrt();
                if positive {
                    root - d[axis]
                } else {
                    root + d[axis]
                }
            }
        }
    }

    /// Nearest boundary point.
    pub fn project_to_boundary(&self, x: Point<T>) -> Point<T> {
        match self.kind {
            DomainKind::Rectangle { width, height } => {
                let p = [x[0].max(T::zero()).min(width), x[1].max(T::zero()).min(height)];
                if p != x {
                    return p;
                }
                let d = [x[0], width - x[0], x[1], height - x[1]];
                let k = (0..4).fold(0, |b, i| if d[i] < d[b] { i } else { b });
                match k {
                    0 => [T::zero(), x[1]],
                    1 => [width, x[1]],
                    2 => [x[0], T::zero()],
                    _ => [x[0], height],
                }
            }
            _ => {
                let (ce, r) = self.disk_parameters().unwrap();
                let d = [x[0] - ce[0], x[1] - ce[1]];
                let n = d[0].hypot(d[1]);
                if n == T::zero() {
                    [ce[0] + r, ce[1]]
                } else {
                    [ce[0] + d[0] * r / n, ce[1] + d[1] * r / n]
                }
            }
        }
    }

    /// Uniform point in the domain from two uniforms in `[0,1)`.
    pub fn sample(&self, u: T, v: T) -> Point<T> {
        match self.kind {
            DomainKind::Rectangle { width, height } => [u * width, v * height],
            _ => {
                let (ce, r) = self.disk_parameters().unwrap();
                let rho = r * u.sqrt();
                let th = (T::PI() + T::PI()) * v;
                [ce[0] + rho * th.cos(), ce[1] + rho * th.sin()]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rays_hit_the_circle() {
        let d = DomainSpec::<f64>::scaled_disk([1.0, 2.0], 0.5).unwrap();
        let x = [1.1, 2.2];
        for axis in 0..2 {
            for pos in [true, false] {
                let t = d.ray_to_boundary(x, axis, pos);
                let mut y = x;
                y[axis] += if pos { t } else { -t };
                assert!(d.boundary_distance(y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rectangle_geometry() {
        let d = DomainSpec::rectangle(2.0f64, 1.0).unwrap();
        assert_eq!(d.center(), [1.0, 0.5]);
        assert_eq!(d.ray_to_boundary([0.5, 0.25], 0, true), 1.5);
        assert_eq!(d.project_to_boundary([0.5, 0.1]), [0.5, 0.0]);
        assert!(!d.contains([0.0, 0.5]));
        assert!(DomainSpec::rectangle(0.0f64, 1.0).is_err());
    }
}
