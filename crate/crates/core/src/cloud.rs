use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "point dimension must be positive".into(),
            ));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                value: coords[i].as_f64(),
                location: format!("point {} coordinate {}", i / dim, i % dim),
            });
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[T]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Sub-cloud made of the listed points, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        Self {
            dim: self.dim,
            coords,
        }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            dim: self.dim,
            coords: self.coords.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        euclidean(self.point(i), self.point(j))
    }
}

pub fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}
