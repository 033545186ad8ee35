use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{LatentPosterior, Link, NewtonOptions, RbfKernel};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_inverse, symmetrize};
use crate::possibility::GaussianPossibility;
use crate::scalar::Real;

/// Binary PGP classifier under a Laplace approximation of the latent
/// posterior: a Gaussian possibility with mode `g_hat` and precision
/// `K^-1 + W`.
#[derive(Debug, Clone)]
pub struct BinaryClassifierModel<T: Real> {
    inputs: DMatrix<T>,
    labels: DVector<T>,
    kernel: RbfKernel<T>,
    link: Link,
    gram: DMatrix<T>,
    mode: DVector<T>,
    grad_log_lik: DVector<T>,
    w: DVector<T>,
    /// Factor of `B = I + W^1/2 K W^1/2` at the mode.
    b_factor: Cholesky<T, Dyn>,
    iterations: usize,
    grad_norm: T,
    objective_trace: Vec<T>,
}

struct State<T: Real> {
    a: DVector<T>,
    g: DVector<T>,
    psi: T,
}

impl<T: Real> BinaryClassifierModel<T> {
    /// Newton iteration on `Psi(g) = log p(Y|g) - g' K^-1 g / 2`, tracked in
    /// the `a = K^-1 g` parameterization.
    pub fn fit(
        inputs: DMatrix<T>,
        labels: &[i8],
        kernel: RbfKernel<T>,
        link: Link,
        opts: NewtonOptions,
    ) -> Result<Self> {
        let n = inputs.nrows();
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("at least one training point is required".into()));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidParameter(format!("binary labels must be -1 or +1, got {bad}")));
        }
        let y = DVector::from_iterator(n, labels.iter().map(|&l| T::from_i8(l).unwrap()));
        let gram = kernel.gram(&inputs)?;
        let tol = T::tol(opts.grad_tol);

        let psi_of = |a: &DVector<T>, g: &DVector<T>| -> T {
            let ll = y.iter().zip(g.iter()).fold(T::zero(), |acc, (&yi, &gi)| acc + link.log_lik(yi, gi));
            ll - T::lit(0.5) * a.dot(g)
        };
        let grad_ll = |g: &DVector<T>| DVector::from_fn(n, |i, _| link.grad(y[i], g[i]));
        let neg_hess = |g: &DVector<T>| DVector::from_fn(n, |i, _| link.neg_hessian(y[i], g[i]));

        let zero = DVector::zeros(n);
        let mut st = State { psi: psi_of(&zero, &zero), a: zero.clone(), g: zero };
        let mut trace = vec![st.psi];
        let mut iterations = 0;
        let mut grad_norm;
        loop {
            let gl = grad_ll(&st.g);
            // both the `a`-space gradient and the `g`-space fixed-point residual
            grad_norm = (&gl - &st.a).amax().max((&st.g - &gram * &gl).amax());
            if grad_norm <= tol {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(Error::NonConvergence { iterations, grad_norm: grad_norm.as_f64() });
            }
            iterations += 1;

            let w = neg_hess(&st.g);
            let sw = w.map(|v| v.sqrt());
            let l = b_factor(&gram, &sw)?;
            let b = w.component_mul(&st.g) + &gl;
            let kb = &gram * &b;
            let c = l.l().solve_lower_triangular(&sw.component_mul(&kb)).expect("triangular solve");
            let correction = l.l().tr_solve_lower_triangular(&c).expect("triangular solve");
            let a_full = &b - sw.component_mul(&correction);

            let step = &a_full - &st.a;
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let a = &st.a + &step * t;
                let g = &gram * &a;
                let psi = psi_of(&a, &g);
                if psi >= st.psi {
                    accepted = Some(State { a, g, psi });
                    break;
                }
                t *= T::lit(0.5);
            }
            match accepted {
                Some(next) => {
                    st = next;
                    trace.push(st.psi);
                }
                // Psi no longer resolves the step; fall back to the gradient.
                None => {
                    let a = a_full;
                    let g = &gram * &a;
                    let gl = grad_ll(&g);
                    let next_norm = (&gl - &a).amax().max((&g - &gram * &gl).amax());
                    if next_norm >= grad_norm {
                        return Err(Error::NonConvergence { iterations, grad_norm: grad_norm.as_f64() });
                    }
                    let psi = psi_of(&a, &g);
                    st = State { a, g, psi };
                    trace.push(psi);
                }
            }
        }

        let w = neg_hess(&st.g);
        let grad_log_lik = grad_ll(&st.g);
        let sw = w.map(|v| v.sqrt());
        let b_factor = b_factor(&gram, &sw)?;
        Ok(Self {
            inputs,
            labels: y,
            kernel,
            link,
            grad_log_lik,
            mode: st.g,
            w,
            b_factor,
            gram,
            iterations,
            grad_norm,
            objective_trace: trace,
        })
    }

    pub fn kernel(&self) -> &RbfKernel<T> {
        &self.kernel
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn inputs(&self) -> &DMatrix<T> {
        &self.inputs
    }

    pub fn labels(&self) -> &DVector<T> {
        &self.labels
    }

    /// Jittered training Gram matrix `K`.
    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    /// Laplace mode `g_hat`.
    pub fn mode(&self) -> &DVector<T> {
        &self.mode
    }

    /// `grad log p(Y | g_hat)`.
    pub fn grad_log_lik(&self) -> &DVector<T> {
        &self.grad_log_lik
    }

    /// Diagonal of `W = -grad grad log p(Y | g_hat)`.
    pub fn w(&self) -> &DVector<T> {
        &self.w
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Sup-norm of the gradient of the log posterior at the returned mode.
    pub fn grad_norm(&self) -> T {
        self.grad_norm
    }

    /// `Psi` after the start point and after every accepted Newton step.
    pub fn objective_trace(&self) -> &[T] {
        &self.objective_trace
    }

    /// Laplace approximation of the training-latent posterior as a Gaussian
    /// possibility with mode `g_hat` and precision `K^-1 + W`.
    pub fn latent_possibility(&self) -> Result<GaussianPossibility<T>> {
        let mut precision = spd_inverse(&self.gram, "K")?;
        for i in 0..self.w.len() {
            precision[(i, i)] += self.w[i];
        }
        GaussianPossibility::new(self.mode.clone(), symmetrize(&precision))
    }

    /// Laplace approximation to the log marginal likelihood.
    pub fn log_marginal_likelihood(&self) -> T {
        let a = &self.grad_log_lik;
        let ll =
            self.labels.iter().zip(self.mode.iter()).fold(T::zero(), |acc, (&y, &g)| acc + self.link.log_lik(y, g));
        let logdet = self.b_factor.l().diagonal().iter().fold(T::zero(), |acc, &d| acc + d.ln());
        -T::lit(0.5) * a.dot(&self.mode) + ll - logdet
    }

    /// Latent posterior at the test points: mean `K_t grad log p(Y|g_hat)`,
    /// variance `k(x,x) - K_t [K + W^-1]^-1 K_t'` evaluated through `B`.
    pub fn classify(&self, test: &DMatrix<T>) -> Result<LatentPosterior<T>> {
        let kt = self.kernel.matrix(test, &self.inputs)?;
        let mean = &kt * &self.grad_log_lik;
        let sw = self.w.map(|v| v.sqrt());
        let mut scaled = kt.transpose();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= sw[i];
        }
        let v = self.b_factor.l().solve_lower_triangular(&scaled).expect("triangular solve");
        let prior = self.kernel.signal_variance();
        let var = (0..test.nrows()).map(|j| prior - v.column(j).norm_squared()).collect();
        LatentPosterior::binary(mean.iter().copied().collect(), var)
    }
}

fn b_factor<T: Real>(gram: &DMatrix<T>, sw: &DVector<T>) -> Result<Cholesky<T, Dyn>> {
    let n = gram.nrows();
    let b = DMatrix::from_fn(n, n, |i, j| {
        let v = sw[i] * gram[(i, j)] * sw[j];
        if i == j {
            v + T::one()
        } else {
            v
        }
    });
    cholesky(&b, "I + W^1/2 K W^1/2")
}
