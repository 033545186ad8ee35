//! Epistemic uncertainty measures and necessities of correct
//! classification built on Gaussian and grid possibilities.

mod optimize;

pub use optimize::{maximize_scalar, ScalarMax, BRENT_MAX_ITER, BRENT_TOL};

use crate::error::{Error, Result};
use crate::pgp::Link;
use crate::possibility::GridPossibility;
use crate::scalar::Real;
use crate::special::log_sum_exp;

/// Half-width of the `u_l_bin` search window in standard deviations.
pub const BRACKET_SIGMAS: f64 = 12.0;
pub const MULTI_MAX_SWEEPS: usize = 50;
pub const MULTI_REL_TOL: f64 = 1e-10;
/// Per-grid-point tolerance on `sum_y p(y|theta) = 1`.
pub const LIKELIHOOD_NORM_TOL: f64 = 1e-9;

/// Integral of a 1D Gaussian possibility with variance `var`.
pub fn u_theta_gaussian<T: Real>(_mean: T, var: T) -> Result<T> {
    if !(var > T::zero()) {
        return Err(Error::InvalidParameter("variance must be positive".into()));
    }
    Ok(var.sqrt() * T::two_pi().sqrt())
}

/// Integral of a tabulated possibility.
pub fn u_theta_grid<T: Real>(f: &GridPossibility<T>) -> T {
    f.integral()
}

/// Discrete-label uncertainty on a grid: `sum_y max_theta f(theta) p(y|theta) - 1`.
///
/// `likelihood[y][k]` is the probability of label `y` at grid point `k`.
pub fn u_y_discrete<T: Real>(prior: &GridPossibility<T>, likelihood: &[Vec<T>]) -> Result<T> {
    if likelihood.is_empty() {
        return Err(Error::InvalidParameter("no labels".into()));
    }
    for row in likelihood {
        if row.len() != prior.len() {
            return Err(Error::DimensionMismatch { expected: prior.len(), got: row.len() });
        }
    }
    let tol = T::tol(LIKELIHOOD_NORM_TOL);
    for k in 0..prior.len() {
        let s = likelihood.iter().fold(T::zero(), |acc, row| acc + row[k]);
        if (s - T::one()).abs() > tol || likelihood.iter().any(|row| row[k] < T::zero()) {
            return Err(Error::NotNormalized(format!("label probabilities at grid point {k} sum to {}", s.as_f64())));
        }
    }
    let total = likelihood.iter().fold(T::zero(), |acc, row| {
        let sup = prior.values().iter().zip(row).fold(T::zero(), |m, (&f, &p)| m.max(f * p));
        acc + sup
    });
    Ok((total - T::one()).max(T::zero()))
}

/// Binary label uncertainty of a latent `N(mu, var)` possibility:
/// `sup N(g) p(+1|g) + sup N(g) p(-1|g) - 1`.
pub fn u_l_bin<T: Real>(mu: T, var: T, link: Link) -> Result<T> {
    if var < T::zero() {
        return Err(Error::InvalidParameter("variance must be non-negative".into()));
    }
    if var == T::zero() {
        return Ok(T::zero());
    }
    let sd = var.sqrt();
    let half_width = T::lit(BRACKET_SIGMAS) * sd;
    let (lo, hi) = (mu - half_width, mu + half_width);
    let quad = |g: T| (g - mu) * (g - mu) / (var + var);
    let pos = maximize_scalar(|g| link.log_lik(T::one(), g) - quad(g), lo, hi)?;
    let neg = maximize_scalar(|g| link.log_complement(g) - quad(g), lo, hi)?;
    let u = pos.max.exp() + neg.max.exp() - T::one();
    Ok(u.max(T::zero()).min(T::one()))
}

/// Softmax label uncertainty of independent per-class latent possibilities:
/// `sum_l sup_theta softmax_l(theta) prod_k N(theta_k; mu_k, var_k) - 1`.
pub fn u_l_multi<T: Real>(mu: &[T], var: &[T]) -> Result<T> {
    let n = mu.len();
    if n < 2 {
        return Err(Error::InvalidParameter("at least two classes are required".into()));
    }
    if var.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: var.len() });
    }
    if var.iter().any(|&v| v < T::zero()) {
        return Err(Error::InvalidParameter("variances must be non-negative".into()));
    }
    let mut total = T::zero();
    for label in 0..n {
        total += sup_softmax_label(mu, var, label)?.exp();
    }
    Ok((total - T::one()).max(T::zero()).min(T::lit((n - 1) as f64)))
}

fn log_objective<T: Real>(theta: &[T], mu: &[T], var: &[T], label: usize) -> T {
    let mut penalty = T::zero();
    for k in 0..theta.len() {
        if var[k] > T::zero() {
            let d = theta[k] - mu[k];
            penalty += d * d / (var[k] + var[k]);
        }
    }
    theta[label] - log_sum_exp(theta) - penalty
}

/// Log of the per-label supremum, by coordinate ascent from several starts.
fn sup_softmax_label<T: Real>(mu: &[T], var: &[T], label: usize) -> Result<T> {
    let n = mu.len();
    let mut starts = vec![mu.to_vec()];
    for k in 0..n {
        if var[k] > T::zero() {
            let mut s = mu.to_vec();
            s[k] += if k == label { var[k].sqrt() } else { -var[k].sqrt() };
            starts.push(s);
        }
    }
    let mut best = T::neg_infinity();
    for start in starts {
        best = best.max(coordinate_ascent(start, mu, var, label)?);
    }
    Ok(best)
}

fn coordinate_ascent<T: Real>(mut theta: Vec<T>, mu: &[T], var: &[T], label: usize) -> Result<T> {
    let mut current = log_objective(&theta, mu, var, label);
    let rel = T::tol(MULTI_REL_TOL);
    let sigmas = T::lit(BRACKET_SIGMAS);
    for _ in 0..MULTI_MAX_SWEEPS {
        for k in 0..theta.len() {
            if var[k] <= T::zero() {
                theta[k] = mu[k];
                continue;
            }
            // The softmax term moves the optimum by at most var[k] from mu[k].
            let half_width = var[k] + sigmas * var[k].sqrt();
            let mut probe = theta.clone();
            let r = maximize_scalar(
                |t| {
                    probe[k] = t;
                    log_objective(&probe, mu, var, label)
                },
                mu[k] - half_width,
                mu[k] + half_width,
            )?;
            if r.max > log_objective(&theta, mu, var, label) {
                theta[k] = r.argmax;
            }
        }
        let next = log_objective(&theta, mu, var, label);
        let improvement = next - current;
        current = next;
        if improvement <= rel * current.abs().max(T::one()) {
            return Ok(current);
        }
    }
    Err(Error::NonConvergence { iterations: MULTI_MAX_SWEEPS, grad_norm: f64::NAN })
}

/// Necessity of correct classification under a binary latent `N(mu, var)`:
/// `1 - exp(-mu^2 / (2 var))`. Zero variance gives the limit value.
pub fn nec_bin<T: Real>(mu: T, var: T) -> T {
    if var <= T::zero() {
        return if mu == T::zero() { T::zero() } else { T::one() };
    }
    T::one() - (-(mu * mu) / (var + var)).exp()
}

/// Multiclass necessity together with a flag for tied top means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiNecessity<T> {
    pub value: T,
    /// Class with the largest mean (lowest index on ties).
    pub top: usize,
    pub degenerate: bool,
}

/// Necessity that the class with the largest latent mean is correct:
/// `1 - max_{l != l*} exp(-(mu_l* - mu_l)^2 / (2 (var_l* + var_l)))`.
pub fn nec_multi<T: Real>(mu: &[T], var: &[T]) -> Result<MultiNecessity<T>> {
    let n = mu.len();
    if n < 2 {
        return Err(Error::InvalidParameter("at least two classes are required".into()));
    }
    if var.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: var.len() });
    }
    let mut top = 0;
    for l in 1..n {
        if mu[l] > mu[top] {
            top = l;
        }
    }
    if (0..n).any(|l| l != top && mu[l] == mu[top]) {
        return Ok(MultiNecessity { value: T::zero(), top, degenerate: true });
    }
    let mut worst = T::zero();
    for l in (0..n).filter(|&l| l != top) {
        let gap = mu[top] - mu[l];
        let s = var[top].max(T::zero()) + var[l].max(T::zero());
        if s > T::zero() {
            worst = worst.max((-(gap * gap) / (s + s)).exp());
        }
    }
    Ok(MultiNecessity { value: T::one() - worst, top, degenerate: false })
}
