use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

const NEGATIVE_VARIANCE_WARN: f64 = 1e-8;

/// Per-point, per-latent Gaussian possibility summaries `(mean, variance)`.
///
/// Binary models have a single latent column; multiclass models one column
/// per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentPosterior<T: Real> {
    mean: DMatrix<T>,
    variance: DMatrix<T>,
}

impl<T: Real> LatentPosterior<T> {
    /// Negative variances (round-off) are clamped to zero.
    pub fn new(mean: DMatrix<T>, mut variance: DMatrix<T>) -> Result<Self> {
        if mean.shape() != variance.shape() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: variance.len() });
        }
        for v in variance.iter_mut() {
            if *v < T::zero() {
                if *v < -T::lit(NEGATIVE_VARIANCE_WARN) {
                    log::warn!("clamping negative latent variance {v} to zero");
                }
                *v = T::zero();
            }
        }
        Ok(Self { mean, variance })
    }

    /// Single-latent posterior from mean and variance vectors.
    pub fn binary(mean: Vec<T>, variance: Vec<T>) -> Result<Self> {
        let n = mean.len();
        if variance.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: variance.len() });
        }
        Self::new(DMatrix::from_vec(n, 1, mean), DMatrix::from_vec(n, 1, variance))
    }

    pub fn n_points(&self) -> usize {
        self.mean.nrows()
    }

    pub fn n_latent(&self) -> usize {
        self.mean.ncols()
    }

    pub fn is_binary(&self) -> bool {
        self.n_latent() == 1
    }

    pub fn mean(&self, point: usize, latent: usize) -> T {
        self.mean[(point, latent)]
    }

    pub fn variance(&self, point: usize, latent: usize) -> T {
        self.variance[(point, latent)]
    }

    pub fn point_means(&self, point: usize) -> Vec<T> {
        self.mean.row(point).iter().copied().collect()
    }

    pub fn point_variances(&self, point: usize) -> Vec<T> {
        self.variance.row(point).iter().copied().collect()
    }

    pub fn means(&self) -> &DMatrix<T> {
        &self.mean
    }

    pub fn variances(&self) -> &DMatrix<T> {
        &self.variance
    }

    /// Posterior restricted to the given points, in that order.
    pub fn select(&self, points: &[usize]) -> Self {
        let pick = |m: &DMatrix<T>| DMatrix::from_fn(points.len(), m.ncols(), |i, j| m[(points[i], j)]);
        Self { mean: pick(&self.mean), variance: pick(&self.variance) }
    }
}
