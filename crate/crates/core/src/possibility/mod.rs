//! Possibility functions: the Gaussian family in precision form and a
//! tabulated grid representation used as a numerical reference for every
//! sup-based operation.

mod gaussian;
mod grid;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use gaussian::GaussianPossibility;
pub use grid::{GridAxis, GridPossibility, CURVATURE_FLOOR};

/// Mode, precision (observed information at the mode) and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport<T: Real> {
    pub mode: DVector<T>,
    pub precision: DMatrix<T>,
    /// `None` when the precision matrix is singular.
    pub covariance: Option<DMatrix<T>>,
}

impl<T: Real> CovarianceReport<T> {
    pub fn is_defined(&self) -> bool {
        self.covariance.is_some()
    }

    pub fn covariance(&self) -> Result<&DMatrix<T>> {
        self.covariance.as_ref().ok_or(Error::UndefinedCovariance)
    }
}

/// Checks that `idx` is a non-empty set of distinct indices below `n`.
pub(crate) fn check_index_set(idx: &[usize], n: usize) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut seen = vec![false; n];
    for &i in idx {
        if i >= n {
            return Err(Error::InvalidIndices(format!("index {i} out of range for dimension {n}")));
        }
        if seen[i] {
            return Err(Error::InvalidIndices(format!("index {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

pub(crate) fn complement(idx: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !idx.contains(i)).collect()
}
