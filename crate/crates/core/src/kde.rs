//! Product-Gaussian kernel density estimation with Scott's rule.

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::field::{ScalarField2D, Window};
use crate::scalar::Scalar;

/// Per-dimension Scott bandwidths `h_i = n^{-1/(d+4)} s_i`, with `s_i` the
/// sample standard deviation (n - 1 denominator).
pub fn scott_bandwidth<T: Scalar>(cloud: &PointCloud<T>) -> Result<Vec<T>> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::Degenerate(format!(
            "Scott's rule needs at least 2 samples (got {n})"
        )));
    }
    let d = cloud.dim();
    let nf = T::from_usize_lossy(n);
    let factor = nf.powf(-T::one() / T::from_usize_lossy(d + 4));
    (0..d)
        .map(|k| {
            let mean = cloud.iter().map(|p| p[k]).sum::<T>() / nf;
            let var = cloud
                .iter()
                .map(|p| (p[k] - mean) * (p[k] - mean))
                .sum::<T>()
                / (nf - T::one());
            if var > T::zero() {
                Ok(factor * var.sqrt())
            } else {
                Err(Error::Degenerate(format!("zero variance in dimension {k}")))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel<T> {
    samples: PointCloud<T>,
    bandwidths: Vec<T>,
}

impl<T: Scalar> KdeModel<T> {
    pub fn new(samples: PointCloud<T>, bandwidths: Vec<T>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("KDE needs at least one sample".into()));
        }
        if bandwidths.len() != samples.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} bandwidths for {}-dimensional samples",
                bandwidths.len(),
                samples.dim()
            )));
        }
        if !bandwidths.iter().all(|&h| h > T::zero() && h.is_finite()) {
            return Err(Error::InvalidInput(
                "bandwidths must be positive and finite".into(),
            ));
        }
        Ok(Self {
            samples,
            bandwidths,
        })
    }

    /// Model with Scott's-rule bandwidths.
    pub fn scott(samples: PointCloud<T>) -> Result<Self> {
        let bw = scott_bandwidth(&samples)?;
        Self::new(samples, bw)
    }

    pub fn samples(&self) -> &PointCloud<T> {
        &self.samples
    }

    pub fn bandwidths(&self) -> &[T] {
        &self.bandwidths
    }

    /// Geometric mean of the per-dimension bandwidths.
    pub fn scalar_bandwidth(&self) -> T {
        let d = T::from_usize_lossy(self.bandwidths.len());
        (self.bandwidths.iter().map(|h| h.ln()).sum::<T>() / d).exp()
    }

    /// `p̂(x) = (1/n) Σ_j Π_i φ((x_i - X_ji) / h_i) / h_i`.
    pub fn density_at(&self, x: &[T]) -> T {
        let d = self.samples.dim();
        let two_pi = T::lit(std::f64::consts::TAU);
        let norm = self.bandwidths.iter().fold(T::one(), |acc, &h| acc * h)
            * two_pi.powf(T::from_usize_lossy(d) / T::lit(2.0))
            * T::from_usize_lossy(self.samples.len());
        let half = T::lit(0.5);
        let sum: T = self
            .samples
            .iter()
            .map(|s| {
                let q: T = s
                    .iter()
                    .zip(x)
                    .zip(&self.bandwidths)
                    .map(|((&si, &xi), &h)| {
                        let z = (xi - si) / h;
                        z * z
                    })
                    .sum();
                (-half * q).exp()
            })
            .sum();
        sum / norm
    }

    /// Densities at each query point.
    pub fn evaluate(&self, queries: &PointCloud<T>) -> Result<Vec<T>> {
        if queries.dim() != self.samples.dim() {
            return Err(Error::DimensionMismatch(format!(
                "query dimension {} vs sample dimension {}",
                queries.dim(),
                self.samples.dim()
            )));
        }
        let pts: Vec<&[T]> = queries.iter().collect();
        Ok(pts.par_iter().map(|p| self.density_at(p)).collect())
    }
}

pub fn kde_evaluate<T: Scalar>(model: &KdeModel<T>, queries: &PointCloud<T>) -> Result<Vec<T>> {
    model.evaluate(queries)
}

/// Samples a 2D KDE at cell centers, optionally max-normalized.
pub fn kde_on_grid<T: Scalar>(
    model: &KdeModel<T>,
    window: &Window<T>,
    nx: usize,
    ny: usize,
    normalize: bool,
) -> Result<ScalarField2D<T>> {
    if model.samples.dim() != 2 {
        return Err(Error::DimensionMismatch(
            "grid evaluation needs 2D samples".into(),
        ));
    }
    window.validate()?;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 2×2 (got {nx}×{ny})"
        )));
    }
    let xs = window.x_centers(nx);
    let ys = window.y_centers(ny);
    let rows: Vec<Vec<T>> = ys
        .par_iter()
        .map(|&y| xs.iter().map(|&x| model.density_at(&[x, y])).collect())
        .collect();
    let field = ScalarField2D::new(
        window.x_min,
        window.y_min,
        (window.x_max - window.x_min) / T::from_usize_lossy(nx),
        (window.y_max - window.y_min) / T::from_usize_lossy(ny),
        nx,
        ny,
        rows.into_iter().flatten().collect(),
    )?;
    if normalize {
        field.normalize_max()
    } else {
        Ok(field)
    }
}
