use nalgebra::{DMatrix, DVector};

use super::{check_index_set, complement, CovarianceReport};
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, covariance_from_precision, eigen_bounds, is_numerically_singular, is_symmetric, spd_inverse, submatrix,
    subvector, symmetrize,
};
use crate::scalar::Real;

const SYMMETRY_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// Gaussian possibility function `exp(-1/2 (x - mean)' P (x - mean))`.
///
/// Stored in precision form so that a positive semidefinite `P` (including
/// `P = 0`, complete absence of information) is representable.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPossibility<T: Real> {
    mean: DVector<T>,
    precision: DMatrix<T>,
}

impl<T: Real> GaussianPossibility<T> {
    pub fn new(mean: DVector<T>, precision: DMatrix<T>) -> Result<Self> {
        let n = mean.len();
        if precision.nrows() != n || precision.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: precision.nrows() });
        }
        if !is_symmetric(&precision, T::lit(SYMMETRY_TOL)) {
            return Err(Error::NotPositiveSemidefinite("precision is not symmetric".into()));
        }
        let precision = symmetrize(&precision);
        let (min, max) = eigen_bounds(&precision);
        if min < -T::lit(PSD_TOL) * max.abs().max(T::one()) {
            return Err(Error::NotPositiveSemidefinite(format!("smallest eigenvalue {min}")));
        }
        Ok(Self { mean, precision })
    }

    /// Builds from a positive definite covariance matrix.
    pub fn from_covariance(mean: DVector<T>, covariance: &DMatrix<T>) -> Result<Self> {
        let n = mean.len();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: covariance.nrows() });
        }
        if is_numerically_singular(covariance, T::zero()) {
            return Err(Error::Singular("covariance is singular".into()));
        }
        Self::new(mean, spd_inverse(covariance, "covariance")?)
    }

    pub fn univariate(mean: T, variance: T) -> Result<Self> {
        if !(variance > T::zero()) {
            return Err(Error::InvalidParameter(format!("variance must be positive, got {variance}")));
        }
        Ok(Self { mean: DVector::from_element(1, mean), precision: DMatrix::from_element(1, 1, T::one() / variance) })
    }

    /// The uninformative possibility (`P = 0`) centred at `mean`.
    pub fn uninformative(mean: DVector<T>) -> Self {
        let n = mean.len();
        Self { mean, precision: DMatrix::zeros(n, n) }
    }

    /// Joint possibility of two independently described variables.
    pub fn independent_product(&self, other: &Self) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut mean = DVector::zeros(n + m);
        mean.rows_mut(0, n).copy_from(&self.mean);
        mean.rows_mut(n, m).copy_from(&other.mean);
        let mut precision = DMatrix::zeros(n + m, n + m);
        precision.view_mut((0, 0), (n, n)).copy_from(&self.precision);
        precision.view_mut((n, n), (m, m)).copy_from(&other.precision);
        Self { mean, precision }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn precision(&self) -> &DMatrix<T> {
        &self.precision
    }

    /// The mode. For a flat possibility every point is a maximiser and the
    /// stored mean is returned as the representative.
    pub fn mode(&self) -> &DVector<T> {
        &self.mean
    }

    pub fn log_evaluate(&self, theta: &DVector<T>) -> Result<T> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: theta.len() });
        }
        let d = theta - &self.mean;
        let q = (&self.precision * &d).dot(&d);
        Ok(-T::lit(0.5) * q.max(T::zero()))
    }

    pub fn evaluate(&self, theta: &DVector<T>) -> Result<T> {
        Ok(self.log_evaluate(theta)?.exp().min(T::one()))
    }

    pub fn covariance(&self) -> Option<DMatrix<T>> {
        covariance_from_precision(&self.precision)
    }

    /// Possibilistic covariance between components `i` and `j`.
    pub fn cov(&self, i: usize, j: usize) -> Result<T> {
        let n = self.dim();
        if i >= n || j >= n {
            return Err(Error::InvalidIndices(format!("({i}, {j}) out of range for dimension {n}")));
        }
        let c = self.covariance().ok_or(Error::UndefinedCovariance)?;
        Ok(c[(i, j)])
    }

    pub fn report(&self) -> CovarianceReport<T> {
        CovarianceReport { mode: self.mean.clone(), precision: self.precision.clone(), covariance: self.covariance() }
    }

    /// Shift by a constant vector.
    pub fn translate(&self, shift: &DVector<T>) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: shift.len() });
        }
        Ok(Self { mean: &self.mean + shift, precision: self.precision.clone() })
    }

    /// Conditional possibility of the remaining components given
    /// `theta[observed] = values`, in Schur-complement form:
    /// mean `m1 + S12 S22^-1 (v - m2)`, covariance `S11 - S12 S22^-1 S21`.
    pub fn condition(&self, observed: &[usize], values: &DVector<T>) -> Result<Self> {
        let n = self.dim();
        check_index_set(observed, n)?;
        if values.len() != observed.len() {
            return Err(Error::DimensionMismatch { expected: observed.len(), got: values.len() });
        }
        let rest = complement(observed, n);
        if rest.is_empty() {
            return Err(Error::InvalidIndices("every component is observed".into()));
        }
        let sigma = self.covariance().ok_or(Error::UndefinedCovariance)?;
        let s11 = submatrix(&sigma, &rest, &rest);
        let s12 = submatrix(&sigma, &rest, observed);
        let s22 = submatrix(&sigma, observed, observed);
        let chol = cholesky(&s22, "observed covariance block")?;
        let resid = values - subvector(&self.mean, observed);
        let mean = subvector(&self.mean, &rest) + &s12 * chol.solve(&resid);
        let cov = symmetrize(&(s11 - &s12 * chol.solve(&s12.transpose())));
        Self::from_covariance(mean, &cov)
    }

    /// Marginal possibility of the components in `keep` (sup over the rest).
    ///
    /// Uses the precision Schur complement `P_kk - P_kd P_dd^+ P_dk`, which
    /// stays valid for singular (PSD) precision matrices.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dim();
        check_index_set(keep, n)?;
        let drop = complement(keep, n);
        let mean = subvector(&self.mean, keep);
        let pkk = submatrix(&self.precision, keep, keep);
        if drop.is_empty() {
            return Ok(Self { mean, precision: pkk });
        }
        let pkd = submatrix(&self.precision, keep, &drop);
        let pdd = submatrix(&self.precision, &drop, &drop);
        let correction = match cholesky(&pdd, "dropped precision block") {
            Ok(chol) => &pkd * chol.solve(&pkd.transpose()),
            Err(_) => {
                let scale = pdd.amax().max(T::one());
                let pinv = pdd.pseudo_inverse(T::lit(1e-12) * scale).map_err(|e| Error::Singular(e.to_string()))?;
                &pkd * pinv * pkd.transpose()
            }
        };
        Self::new(mean, symmetrize(&(pkk - correction)))
    }

    /// Push-forward under `x -> F x`: mean `F m`, covariance `F S F'`.
    pub fn linear_map(&self, f: &DMatrix<T>) -> Result<Self> {
        if f.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: f.ncols() });
        }
        let mean = f * &self.mean;
        match self.covariance() {
            Some(sigma) => {
                let cov = symmetrize(&(f * sigma * f.transpose()));
                Self::from_covariance(mean, &cov)
                    .map_err(|_| Error::Singular("F S F' is singular; F must have full row rank".into()))
            }
            None => {
                // Only an invertible change of variables keeps a PSD precision.
                if !f.is_square() {
                    return Err(Error::UndefinedCovariance);
                }
                let finv = f.clone().try_inverse().ok_or(Error::UndefinedCovariance)?;
                let precision = symmetrize(&(finv.transpose() * &self.precision * finv));
                Self::new(mean, precision)
            }
        }
    }
}
