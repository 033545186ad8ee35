use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{LatentPosterior, NewtonOptions, RbfKernel};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_inverse, symmetrize};
use crate::possibility::GaussianPossibility;
use crate::scalar::Real;
use crate::special::{log_sum_exp, softmax};

/// Multiclass PGP classifier with independent per-class latent functions
/// and a softmax likelihood, under a Laplace approximation.
///
/// Latent vectors are stacked class-major: all `n` training values of
/// class 0, then class 1, and so on.
#[derive(Debug, Clone)]
pub struct MulticlassClassifierModel<T: Real> {
    inputs: DMatrix<T>,
    labels: Vec<usize>,
    n_classes: usize,
    kernels: Vec<RbfKernel<T>>,
    grams: Vec<DMatrix<T>>,
    mode: DVector<T>,
    probs: DVector<T>,
    one_hot: DVector<T>,
    /// `E_c = D_c^1/2 (I + D_c^1/2 K_c D_c^1/2)^-1 D_c^1/2` at the mode.
    e_blocks: Vec<DMatrix<T>>,
    /// Factor of `sum_c E_c`.
    m_factor: Cholesky<T, Dyn>,
    iterations: usize,
    grad_norm: T,
    objective_trace: Vec<T>,
}

struct NewtonTerms<T: Real> {
    e_blocks: Vec<DMatrix<T>>,
    m_factor: Cholesky<T, Dyn>,
}

impl<T: Real> MulticlassClassifierModel<T> {
    /// Fit with one shared kernel replicated across classes.
    pub fn fit_shared(
        inputs: DMatrix<T>,
        labels: &[usize],
        n_classes: usize,
        kernel: RbfKernel<T>,
        opts: NewtonOptions,
    ) -> Result<Self> {
        Self::fit(inputs, labels, vec![kernel; n_classes], opts)
    }

    pub fn fit(inputs: DMatrix<T>, labels: &[usize], kernels: Vec<RbfKernel<T>>, opts: NewtonOptions) -> Result<Self> {
        let n = inputs.nrows();
        let c = kernels.len();
        if c < 2 {
            return Err(Error::InvalidParameter("multiclass models need at least two classes".into()));
        }
        if labels.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("at least one training point is required".into()));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= c) {
            return Err(Error::InvalidParameter(format!("label {bad} out of range for {c} classes")));
        }
        let grams = kernels.iter().map(|k| k.gram(&inputs)).collect::<Result<Vec<_>>>()?;
        let mut one_hot = DVector::zeros(n * c);
        for (i, &l) in labels.iter().enumerate() {
            one_hot[l * n + i] = T::one();
        }
        let tol = T::tol(opts.grad_tol);

        let k_times = |a: &DVector<T>| -> DVector<T> {
            let mut out = DVector::zeros(n * c);
            for (cls, k) in grams.iter().enumerate() {
                out.rows_mut(cls * n, n).copy_from(&(k * a.rows(cls * n, n)));
            }
            out
        };
        let psi_of = |a: &DVector<T>, f: &DVector<T>| -> T {
            let mut lse = T::zero();
            let mut row = vec![T::zero(); c];
            for i in 0..n {
                for (cls, r) in row.iter_mut().enumerate() {
                    *r = f[cls * n + i];
                }
                lse += log_sum_exp(&row);
            }
            -T::lit(0.5) * a.dot(f) + one_hot.dot(f) - lse
        };

        let zero = DVector::zeros(n * c);
        let (mut a, mut f) = (zero.clone(), zero);
        let mut psi = psi_of(&a, &f);
        let mut trace = vec![psi];
        let mut iterations = 0;
        let mut grad_norm;
        loop {
            let pi = stacked_softmax(&f, n, c);
            let resid = &one_hot - &pi;
            grad_norm = (&resid - &a).amax().max((&f - k_times(&resid)).amax());
            if grad_norm <= tol {
                break;
            }
            if iterations >= opts.max_iter {
                return Err(Error::NonConvergence { iterations, grad_norm: grad_norm.as_f64() });
            }
            iterations += 1;

            let terms = newton_terms(&grams, &pi, n)?;
            // b = (D - Pi Pi') f + y - pi
            let mut b = &one_hot - &pi;
            for i in 0..n {
                let mix = (0..c).fold(T::zero(), |acc, cls| acc + pi[cls * n + i] * f[cls * n + i]);
                for cls in 0..c {
                    let j = cls * n + i;
                    b[j] += pi[j] * (f[j] - mix);
                }
            }
            let kb = k_times(&b);
            let mut cvec = DVector::zeros(n * c);
            let mut summed = DVector::zeros(n);
            for cls in 0..c {
                let block = &terms.e_blocks[cls] * kb.rows(cls * n, n);
                summed += &block;
                cvec.rows_mut(cls * n, n).copy_from(&block);
            }
            let s = terms.m_factor.solve(&summed);
            let mut a_full = &b - &cvec;
            for cls in 0..c {
                let mut seg = a_full.rows_mut(cls * n, n);
                seg += &terms.e_blocks[cls] * &s;
            }

            let step = &a_full - &a;
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..=opts.max_halvings {
                let a_try = &a + &step * t;
                let f_try = k_times(&a_try);
                let psi_try = psi_of(&a_try, &f_try);
                if psi_try >= psi {
                    accepted = Some((a_try, f_try, psi_try));
                    break;
                }
                t *= T::lit(0.5);
            }
            match accepted {
                Some((a_new, f_new, psi_new)) => {
                    a = a_new;
                    f = f_new;
                    psi = psi_new;
                    trace.push(psi);
                }
                // Psi no longer resolves the step; fall back to the gradient.
                None => {
                    let f_full = k_times(&a_full);
                    let resid = &one_hot - stacked_softmax(&f_full, n, c);
                    let next_norm = (&resid - &a_full).amax().max((&f_full - k_times(&resid)).amax());
                    if next_norm >= grad_norm {
                        return Err(Error::NonConvergence { iterations, grad_norm: grad_norm.as_f64() });
                    }
                    psi = psi_of(&a_full, &f_full);
                    a = a_full;
                    f = f_full;
                    trace.push(psi);
                }
            }
        }

        let probs = stacked_softmax(&f, n, c);
        let terms = newton_terms(&grams, &probs, n)?;
        Ok(Self {
            inputs,
            labels: labels.to_vec(),
            n_classes: c,
            kernels,
            grams,
            mode: f,
            probs,
            one_hot,
            e_blocks: terms.e_blocks,
            m_factor: terms.m_factor,
            iterations,
            grad_norm,
            objective_trace: trace,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_train(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn inputs(&self) -> &DMatrix<T> {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn kernels(&self) -> &[RbfKernel<T>] {
        &self.kernels
    }

    /// Jittered Gram matrix of class `c`.
    pub fn gram(&self, class: usize) -> &DMatrix<T> {
        &self.grams[class]
    }

    /// Stacked Laplace mode `g_hat`.
    pub fn mode(&self) -> &DVector<T> {
        &self.mode
    }

    /// Mode values of class `c` at the training points.
    pub fn class_mode(&self, class: usize) -> DVector<T> {
        let n = self.n_train();
        self.mode.rows(class * n, n).into_owned()
    }

    /// Stacked softmax probabilities at the mode.
    pub fn probs(&self) -> &DVector<T> {
        &self.probs
    }

    /// Stacked one-hot labels `y`.
    pub fn one_hot(&self) -> &DVector<T> {
        &self.one_hot
    }

    /// `W = diag(pi) - Pi Pi'` in the stacked ordering.
    pub fn w_matrix(&self) -> DMatrix<T> {
        softmax_neg_hessian(&self.probs, self.n_train())
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn grad_norm(&self) -> T {
        self.grad_norm
    }

    pub fn objective_trace(&self) -> &[T] {
        &self.objective_trace
    }

    /// Laplace approximation of the stacked training latents: mode `g_hat`,
    /// precision `K^-1 + W`.
    pub fn latent_possibility(&self) -> Result<GaussianPossibility<T>> {
        let n = self.n_train();
        let mut precision = self.w_matrix();
        for (cls, k) in self.grams.iter().enumerate() {
            let kinv = spd_inverse(k, "K_c")?;
            let mut block = precision.view_mut((cls * n, cls * n), (n, n));
            block += kinv;
        }
        GaussianPossibility::new(self.mode.clone(), symmetrize(&precision))
    }

    /// Laplace log marginal likelihood, with `log det(I + K W)` computed
    /// from an LU factorization of the stacked system.
    pub fn log_marginal_likelihood(&self) -> T {
        let n = self.n_train();
        let c = self.n_classes;
        let a = &self.one_hot - &self.probs;
        let mut lse = T::zero();
        let mut row = vec![T::zero(); c];
        for i in 0..n {
            for (cls, r) in row.iter_mut().enumerate() {
                *r = self.mode[cls * n + i];
            }
            lse += log_sum_exp(&row);
        }
        let w = self.w_matrix();
        let mut kw = DMatrix::zeros(n * c, n * c);
        for (cls, k) in self.grams.iter().enumerate() {
            let rows = w.rows(cls * n, n);
            kw.rows_mut(cls * n, n).copy_from(&(k * rows));
        }
        for i in 0..n * c {
            kw[(i, i)] += T::one();
        }
        let logdet = kw.lu().determinant().abs().ln();
        -T::lit(0.5) * a.dot(&self.mode) + self.one_hot.dot(&self.mode) - lse - T::lit(0.5) * logdet
    }

    /// Per-class latent means `K_c,t' (y_c - pi_c)` and the diagonal of the
    /// per-point cross-class covariance.
    pub fn classify(&self, test: &DMatrix<T>) -> Result<LatentPosterior<T>> {
        let (mean, cov) = self.predict_full(test)?;
        let m = test.nrows();
        let var = DMatrix::from_fn(m, self.n_classes, |i, c| cov[i][(c, c)]);
        LatentPosterior::new(mean, var)
    }

    /// Full `C x C` latent covariance at every test point.
    pub fn latent_covariance(&self, test: &DMatrix<T>) -> Result<Vec<DMatrix<T>>> {
        Ok(self.predict_full(test)?.1)
    }

    fn predict_full(&self, test: &DMatrix<T>) -> Result<(DMatrix<T>, Vec<DMatrix<T>>)> {
        let n = self.n_train();
        let c = self.n_classes;
        let m = test.nrows();
        let resid = &self.one_hot - &self.probs;
        let kts = self.kernels.iter().map(|k| k.matrix(test, &self.inputs)).collect::<Result<Vec<_>>>()?;
        let mut mean = DMatrix::zeros(m, c);
        for (cls, kt) in kts.iter().enumerate() {
            let mu = kt * resid.rows(cls * n, n);
            mean.column_mut(cls).copy_from(&mu);
        }
        let mut covs = Vec::with_capacity(m);
        for j in 0..m {
            let kstar: Vec<DVector<T>> = kts.iter().map(|kt| kt.row(j).transpose()).collect();
            let bs: Vec<DVector<T>> = (0..c).map(|cls| &self.e_blocks[cls] * &kstar[cls]).collect();
            let solved: Vec<DVector<T>> = bs.iter().map(|b| self.m_factor.solve(b)).collect();
            let cov = DMatrix::from_fn(c, c, |p, q| {
                let mut v = bs[p].dot(&solved[q]);
                if p == q {
                    v += self.kernels[p].signal_variance() - kstar[p].dot(&bs[p]);
                }
                v
            });
            covs.push(symmetrize(&cov));
        }
        Ok((mean, covs))
    }
}

/// Softmax over classes at every point of a class-major stacked latent
/// vector (`f[c * n + i]` is class `c` at point `i`).
pub fn stacked_softmax<T: Real>(f: &DVector<T>, n: usize, c: usize) -> DVector<T> {
    let mut out = DVector::zeros(n * c);
    let mut row = vec![T::zero(); c];
    for i in 0..n {
        for (cls, r) in row.iter_mut().enumerate() {
            *r = f[cls * n + i];
        }
        for (cls, p) in softmax(&row).into_iter().enumerate() {
            out[cls * n + i] = p;
        }
    }
    out
}

/// Negative Hessian of the softmax log-likelihood for stacked
/// probabilities: `diag(pi) - Pi Pi'`, nonzero only between entries that
/// share a point.
pub fn softmax_neg_hessian<T: Real>(probs: &DVector<T>, n: usize) -> DMatrix<T> {
    let nc = probs.len();
    DMatrix::from_fn(nc, nc, |r, s| {
        if r % n != s % n {
            return T::zero();
        }
        let diag = if r == s { probs[r] } else { T::zero() };
        diag - probs[r] * probs[s]
    })
}

fn newton_terms<T: Real>(grams: &[DMatrix<T>], pi: &DVector<T>, n: usize) -> Result<NewtonTerms<T>> {
    let mut e_blocks = Vec::with_capacity(grams.len());
    let mut sum = DMatrix::zeros(n, n);
    for (cls, k) in grams.iter().enumerate() {
        let sd = pi.rows(cls * n, n).map(|v| v.sqrt());
        let b = DMatrix::from_fn(n, n, |i, j| {
            let v = sd[i] * k[(i, j)] * sd[j];
            if i == j {
                v + T::one()
            } else {
                v
            }
        });
        let binv = spd_inverse(&b, "I + D^1/2 K D^1/2")?;
        let e = DMatrix::from_fn(n, n, |i, j| sd[i] * binv[(i, j)] * sd[j]);
        sum += &e;
        e_blocks.push(e);
    }
    let m_factor = cholesky(&symmetrize(&sum), "sum of E_c")?;
    Ok(NewtonTerms { e_blocks, m_factor })
}
