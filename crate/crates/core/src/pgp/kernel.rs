use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Squared-exponential kernel `s * exp(-|x - x'|^2 / (2 l^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel<T: Real> {
    lengthscale: T,
    signal_variance: T,
}

impl<T: Real> RbfKernel<T> {
    pub fn new(lengthscale: T, signal_variance: T) -> Result<Self> {
        if !(lengthscale > T::zero()) || !lengthscale.is_finite() {
            return Err(Error::InvalidParameter(format!("lengthscale must be positive, got {lengthscale}")));
        }
        if !(signal_variance > T::zero()) || !signal_variance.is_finite() {
            return Err(Error::InvalidParameter(format!("signal variance must be positive, got {signal_variance}")));
        }
        Ok(Self { lengthscale, signal_variance })
    }

    pub fn lengthscale(&self) -> T {
        self.lengthscale
    }

    pub fn signal_variance(&self) -> T {
        self.signal_variance
    }

    /// Diagonal jitter used by every factorization of this kernel's Gram matrix.
    pub fn jitter(&self) -> T {
        T::lit(super::JITTER) * self.signal_variance
    }

    pub fn eval(&self, x: &[T], y: &[T]) -> T {
        let d2 = x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b));
        self.signal_variance * (-d2 / (T::lit(2.0) * self.lengthscale * self.lengthscale)).exp()
    }

    /// Cross-covariance between the rows of `a` and the rows of `b`.
    pub fn matrix(&self, a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
        if a.ncols() != b.ncols() && a.nrows() > 0 && b.nrows() > 0 {
            return Err(Error::DimensionMismatch { expected: a.ncols(), got: b.ncols() });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("kernel inputs must be finite".into()));
        }
        let two_l2 = T::lit(2.0) * self.lengthscale * self.lengthscale;
        Ok(DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
            let d2 = (a.row(i) - b.row(j)).norm_squared();
            self.signal_variance * (-d2 / two_l2).exp()
        }))
    }

    /// Gram matrix of `x` with jitter on the diagonal.
    pub fn gram(&self, x: &DMatrix<T>) -> Result<DMatrix<T>> {
        let mut k = self.matrix(x, x)?;
        crate::linalg::add_diagonal(&mut k, self.jitter());
        Ok(crate::linalg::symmetrize(&k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigen_bounds;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kernel_examples() {
        let k = RbfKernel::new(1.0, 2.5).unwrap();
        assert_eq!(k.eval(&[0.3, -1.0], &[0.3, -1.0]), 2.5);
        let k = RbfKernel::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(k.eval(&[0.0, 0.0], &[0.6, 0.8]), (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(k.eval(&[0.0], &[1.0]), 0.60653, epsilon = 1e-5);
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        assert!(RbfKernel::new(0.0, 1.0).is_err());
        assert!(RbfKernel::new(1.0, -1.0).is_err());
        assert!(RbfKernel::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn matrix_is_symmetric_psd() {
        let x = DMatrix::from_row_slice(5, 2, &[0.1, 0.2, -1.0, 0.5, 2.0, 2.0, 0.3, -0.7, 1.1, 0.0]);
        let k = RbfKernel::new(0.8, 1.3).unwrap();
        let m = k.matrix(&x, &x).unwrap();
        assert!((&m - m.transpose()).amax() == 0.0);
        let (min, max) = eigen_bounds(&m);
        assert!(min >= -1e-8 * max);
        for i in 0..5 {
            assert_eq!(m[(i, i)], 1.3);
        }
    }

    #[test]
    fn matrix_rejects_mismatched_dimensions() {
        let k = RbfKernel::new(1.0, 1.0).unwrap();
        assert!(k.matrix(&DMatrix::zeros(2, 2), &DMatrix::zeros(2, 3)).is_err());
    }
}
