use crate::error::{Error, Result};
use crate::scalar::{cmp, Scalar};

/// Rectangular state-space window `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> Window<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Result<Self> {
        let w = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        w.validate()?;
        Ok(w)
    }

    /// `[-half, half]²`.
    pub fn square(half: T) -> Self {
        Self {
            x_min: -half,
            x_max: half,
            y_min: -half,
            y_max: half,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "empty or non-finite window {self:?}"
            )))
        }
    }

    /// Cell-center coordinates for `n` cells along x, symmetric about the
    /// window midpoint so that mirrored cells get exactly negated offsets.
    pub fn x_centers(&self, n: usize) -> Vec<T> {
        centers(self.x_min, self.x_max, n)
    }

    pub fn y_centers(&self, n: usize) -> Vec<T> {
        centers(self.y_min, self.y_max, n)
    }
}

fn centers<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    let step = (hi - lo) / T::from_usize_lossy(n);
    let mid = (lo + hi) / T::lit(2.0);
    let half = T::from_usize_lossy(n - 1) / T::lit(2.0);
    (0..n)
        .map(|i| mid + (T::from_usize_lossy(i) - half) * step)
        .collect()
}

/// Gridded scalar field: `values[iy * nx + ix]` is the value on the cell whose
/// lower-left corner is `(x_min + ix·dx, y_min + iy·dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D<T> {
    pub x_min: T,
    pub y_min: T,
    pub dx: T,
    pub dy: T,
    nx: usize,
    ny: usize,
    values: Vec<T>,
}

impl<T: Scalar> ScalarField2D<T> {
    pub fn new(
        x_min: T,
        y_min: T,
        dx: T,
        dy: T,
        nx: usize,
        ny: usize,
        values: Vec<T>,
    ) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidInput("field needs at least one cell".into()));
        }
        if values.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {nx}×{ny} grid",
                values.len()
            )));
        }
        if !(dx > T::zero() && dy > T::zero() && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidInput("grid spacings must be positive".into()));
        }
        if !(x_min.is_finite() && y_min.is_finite()) {
            return Err(Error::InvalidInput("grid origin must be finite".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                value: values[i].as_f64(),
                location: format!("cell ({}, {})", i % nx, i / nx),
            });
        }
        Ok(Self {
            x_min,
            y_min,
            dx,
            dy,
            nx,
            ny,
            values,
        })
    }

    /// Unit-spaced field at the origin, rows given top-to-bottom as `rows[iy][ix]`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let ny = rows.len();
        let nx = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nx) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let values = rows.iter().flatten().copied().collect();
        Self::new(T::zero(), T::zero(), T::one(), T::one(), nx, ny, values)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> T {
        self.values[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (T, T) {
        let half = T::lit(0.5);
        (
            self.x_min + (T::from_usize_lossy(ix) + half) * self.dx,
            self.y_min + (T::from_usize_lossy(iy) + half) * self.dy,
        )
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// All cells attaining the maximum, as `(ix, iy)`.
    pub fn argmax(&self) -> Vec<(usize, usize)> {
        let m = self.max();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == m)
            .map(|(i, _)| (i % self.nx, i / self.nx))
            .collect()
    }

    /// Same grid, values transformed elementwise.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.x_min,
            self.y_min,
            self.dx,
            self.dy,
            self.nx,
            self.ny,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Divides by the grid maximum so the peak value is exactly 1.
    pub fn normalize_max(&self) -> Result<Self> {
        let m = self.max();
        if !(m > T::zero()) {
            return Err(Error::ZeroField);
        }
        self.map(|v| v / m)
    }

    /// Values sorted ascending (for quantile-style level choices).
    pub fn sorted_values(&self) -> Vec<T> {
        let mut v = self.values.clone();
        v.sort_by(cmp);
        v
    }
}
