use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{LatentPosterior, RbfKernel};
use crate::error::{Error, Result};
use crate::linalg::{add_diagonal, cholesky};
use crate::scalar::Real;

/// PGP regression posterior. Systematic (possibilistic) and random
/// (Gaussian) observation error lead to the same predictive equations.
#[derive(Debug, Clone)]
pub struct RegressionModel<T: Real> {
    inputs: DMatrix<T>,
    targets: DVector<T>,
    kernel: RbfKernel<T>,
    noise_variance: T,
    factor: Option<Cholesky<T, Dyn>>,
    /// `[K + s^2 I]^-1 y`
    weights: DVector<T>,
}

impl<T: Real> RegressionModel<T> {
    pub fn fit(inputs: DMatrix<T>, targets: DVector<T>, kernel: RbfKernel<T>, noise_variance: T) -> Result<Self> {
        if inputs.nrows() != targets.len() {
            return Err(Error::DimensionMismatch { expected: inputs.nrows(), got: targets.len() });
        }
        if noise_variance < T::zero() || !noise_variance.is_finite() {
            return Err(Error::InvalidParameter(format!("noise variance must be >= 0, got {noise_variance}")));
        }
        if inputs.nrows() == 0 {
            return Ok(Self { inputs, targets, kernel, noise_variance, factor: None, weights: DVector::zeros(0) });
        }
        let mut k = kernel.gram(&inputs)?;
        add_diagonal(&mut k, noise_variance);
        let factor = cholesky(&k, "K + noise * I")?;
        let weights = factor.solve(&targets);
        Ok(Self { inputs, targets, kernel, noise_variance, factor: Some(factor), weights })
    }

    pub fn kernel(&self) -> &RbfKernel<T> {
        &self.kernel
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn targets(&self) -> &DVector<T> {
        &self.targets
    }

    /// The cached factor of `K + s^2 I` (with jitter), if any training data.
    pub fn factor(&self) -> Option<&Cholesky<T, Dyn>> {
        self.factor.as_ref()
    }

    /// Predictive mean `K_t [K + s^2 I]^-1 y` and variance
    /// `k(x, x) - K_t [K + s^2 I]^-1 K_t'` at each test point.
    pub fn predict(&self, test: &DMatrix<T>) -> Result<LatentPosterior<T>> {
        let m = test.nrows();
        let prior = self.kernel.signal_variance();
        let Some(factor) = &self.factor else {
            return LatentPosterior::binary(vec![T::zero(); m], vec![prior; m]);
        };
        let kt = self.kernel.matrix(test, &self.inputs)?;
        let mean = &kt * &self.weights;
        let l = factor.l();
        let v = l.solve_lower_triangular(&kt.transpose()).ok_or_else(|| Error::Singular("Cholesky factor".into()))?;
        let var: Vec<T> = (0..m).map(|j| prior - v.column(j).norm_squared()).collect();
        LatentPosterior::binary(mean.iter().copied().collect(), var)
    }
}
