//! Scalar special functions: normal CDF and friends, logistic sigmoid,
//! softmax, Gauss-Hermite rules.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Real;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this argument `erfc` underflows and the asymptotic series is used.
const PHI_ASYMPTOTIC: f64 = -37.0;

pub fn normal_pdf_f64(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

pub fn normal_cdf_f64(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `log Phi(x)`, accurate far into the lower tail.
pub fn log_normal_cdf_f64(x: f64) -> f64 {
    if x > 5.0 {
        // log(1 - q) with q tiny
        (-0.5 * libm::erfc(x / SQRT_2)).ln_1p()
    } else if x > PHI_ASYMPTOTIC {
        normal_cdf_f64(x).ln()
    } else {
        let z2 = x * x;
        -0.5 * z2 - LN_SQRT_2PI - (-x).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

/// Inverse Mills ratio `phi(x) / Phi(x)`.
pub fn inverse_mills_f64(x: f64) -> f64 {
    if x > PHI_ASYMPTOTIC {
        normal_pdf_f64(x) / normal_cdf_f64(x)
    } else {
        let z2 = x * x;
        -x / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2))
    }
}

pub fn normal_cdf<T: Real>(x: T) -> T {
    T::lit(normal_cdf_f64(x.as_f64()))
}

pub fn normal_pdf<T: Real>(x: T) -> T {
    T::lit(normal_pdf_f64(x.as_f64()))
}

pub fn log_normal_cdf<T: Real>(x: T) -> T {
    T::lit(log_normal_cdf_f64(x.as_f64()))
}

pub fn inverse_mills<T: Real>(x: T) -> T {
    T::lit(inverse_mills_f64(x.as_f64()))
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `log sigmoid(x) = -log(1 + e^{-x})`, stable for large |x|.
pub fn log_sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        -((-x).exp().ln_1p())
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let Some(&first) = xs.first() else {
        return T::zero();
    };
    let m = xs.iter().copied().fold(first, |a, b| a.max(b));
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).fold(T::zero(), |a, b| a + b).ln()
}

pub fn softmax<T: Real>(xs: &[T]) -> Vec<T> {
    let lse = log_sum_exp(xs);
    xs.iter().map(|&x| (x - lse).exp()).collect()
}

/// Shannon entropy in nats; zero-probability terms contribute nothing.
pub fn entropy<T: Real>(ps: &[T]) -> T {
    ps.iter().filter(|&&p| p > T::zero()).map(|&p| -p * p.ln()).fold(T::zero(), |a, b| a + b)
}

/// Gauss-Hermite rule for weight `exp(-x^2)` via Golub-Welsch.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Hermite rule needs at least one node");
        let jacobi =
            DMatrix::from_fn(
                n,
                n,
                |i, j| {
                    if i + 1 == j || j + 1 == i {
                        ((i.max(j)) as f64 / 2.0).sqrt()
                    } else {
                        0.0
                    }
                },
            );
        let eig = SymmetricEigen::new(jacobi);
        let mut pairs: Vec<(f64, f64)> =
            (0..n).map(|k| (eig.eigenvalues[k], PI.sqrt() * eig.eigenvectors[(0, k)].powi(2))).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }

    /// `E[h(g)]` for `g ~ N(mean, var)`.
    pub fn expect<T: Real>(&self, mean: T, var: T, mut h: impl FnMut(T) -> T) -> T {
        let scale = (T::lit(2.0) * var.max(T::zero())).sqrt();
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += T::lit(w) * h(mean + scale * T::lit(x));
        }
        acc / T::lit(PI.sqrt())
    }
}

/// The 32-node rule used for logistic predictive averages and BALD.
pub fn gauss_hermite_32() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(32))
}
