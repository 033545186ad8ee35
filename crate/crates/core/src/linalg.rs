//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative eigenvalue threshold below which a precision matrix is treated
/// as singular: `lambda_min < SINGULAR_RATIO * lambda_max`.
pub const SINGULAR_RATIO: f64 = 1e-10;

pub fn is_symmetric<T: Real>(m: &DMatrix<T>, tol: T) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(T::one());
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn symmetrize<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    (m + m.transpose()) * T::lit(0.5)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_bounds<T: Real>(m: &DMatrix<T>) -> (T, T) {
    if m.nrows() == 0 {
        return (T::zero(), T::zero());
    }
    let eig = SymmetricEigen::new(m.clone());
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    (min, max)
}

/// True when the symmetric matrix has a numerically vanishing eigenvalue
/// under the [`SINGULAR_RATIO`] rule, or an absolute floor `abs_floor`.
pub fn is_numerically_singular<T: Real>(m: &DMatrix<T>, abs_floor: T) -> bool {
    let (min, max) = eigen_bounds(m);
    max <= T::zero() || min < T::lit(SINGULAR_RATIO) * max || min <= abs_floor
}

pub fn cholesky<T: Real>(m: &DMatrix<T>, what: &str) -> Result<Cholesky<T, Dyn>> {
    Cholesky::new(m.clone()).ok_or_else(|| Error::Singular(format!("{what} is not positive definite")))
}

pub fn spd_inverse<T: Real>(m: &DMatrix<T>, what: &str) -> Result<DMatrix<T>> {
    Ok(symmetrize(&cholesky(m, what)?.inverse()))
}

/// Inverse of a symmetric positive semidefinite precision matrix, or `None`
/// when it is singular.
pub fn covariance_from_precision<T: Real>(precision: &DMatrix<T>) -> Option<DMatrix<T>> {
    if precision.nrows() == 0 || is_numerically_singular(precision, T::zero()) {
        return None;
    }
    spd_inverse(precision, "precision").ok()
}

pub fn submatrix<T: Real>(m: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn subvector<T: Real>(v: &DVector<T>, idx: &[usize]) -> DVector<T> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

pub fn add_diagonal<T: Real>(m: &mut DMatrix<T>, value: T) {
    for i in 0..m.nrows().min(m.ncols()) {
        m[(i, i)] += value;
    }
}
