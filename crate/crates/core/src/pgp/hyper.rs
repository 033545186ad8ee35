use nalgebra::DMatrix;

use super::{BinaryClassifierModel, Link, MulticlassClassifierModel, NewtonOptions, RbfKernel};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of a lengthscale grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthscaleSearch<T: Real> {
    pub lengthscale: T,
    pub log_marginal_likelihood: T,
    /// `(candidate, evidence)` for every candidate whose fit converged.
    pub evaluated: Vec<(T, T)>,
}

/// Pick the lengthscale maximizing the Laplace marginal likelihood over a
/// fixed candidate list. Binary problems use `labels` in `{0, 1}` mapped to
/// `{-1, +1}`; anything with more classes uses the softmax model.
pub fn select_lengthscale<T: Real>(
    inputs: &DMatrix<T>,
    labels: &[usize],
    n_classes: usize,
    candidates: &[T],
    signal_variance: T,
    link: Link,
) -> Result<LengthscaleSearch<T>> {
    if candidates.is_empty() {
        return Err(Error::InvalidParameter("no lengthscale candidates".into()));
    }
    let mut evaluated = Vec::with_capacity(candidates.len());
    let mut best: Option<(T, T)> = None;
    for &ell in candidates {
        let kernel = RbfKernel::new(ell, signal_variance)?;
        let evidence = if n_classes == 2 {
            let y: Vec<i8> = labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect();
            BinaryClassifierModel::fit(inputs.clone(), &y, kernel, link, NewtonOptions::binary())
                .map(|m| m.log_marginal_likelihood())
        } else {
            MulticlassClassifierModel::fit_shared(
                inputs.clone(),
                labels,
                n_classes,
                kernel,
                NewtonOptions::multiclass(),
            )
            .map(|m| m.log_marginal_likelihood())
        };
        match evidence {
            Ok(e) if e.is_finite() => {
                evaluated.push((ell, e));
                if best.is_none_or(|(_, b)| e > b) {
                    best = Some((ell, e));
                }
            }
            Ok(_) => log::warn!("non-finite evidence at lengthscale {}", ell.as_f64()),
            Err(err) => log::warn!("fit failed at lengthscale {}: {err}", ell.as_f64()),
        }
    }
    let (lengthscale, log_marginal_likelihood) =
        best.ok_or_else(|| Error::InvalidParameter("no lengthscale candidate produced a fit".into()))?;
    Ok(LengthscaleSearch { lengthscale, log_marginal_likelihood, evaluated })
}
