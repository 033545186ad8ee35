#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Well-conditioned random SPD matrix `A A' + n I / 2`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = uniform_matrix(rng, n, n, -1.0, 1.0);
    &a * a.transpose() + DMatrix::identity(n, n) * (n as f64 * 0.5)
}

/// RBF kernel written out directly, diagonal jitter optional.
pub fn rbf(a: &DMatrix<f64>, b: &DMatrix<f64>, ell: f64, sv: f64) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| {
        let d2: f64 = (0..a.ncols()).map(|k| (a[(i, k)] - b[(j, k)]).powi(2)).sum();
        sv * (-d2 / (2.0 * ell * ell)).exp()
    })
}

pub fn jittered_gram(x: &DMatrix<f64>, ell: f64, sv: f64) -> DMatrix<f64> {
    let mut k = rbf(x, x, ell, sv);
    for i in 0..k.nrows() {
        k[(i, i)] += 1e-8 * sv;
    }
    k
}

pub fn inv(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().try_inverse().expect("oracle matrix invertible")
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Regression posterior by explicit inversion.
pub fn naive_regression(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    xt: &DMatrix<f64>,
    ell: f64,
    sv: f64,
    noise: f64,
) -> (DVector<f64>, DVector<f64>) {
    let mut k = jittered_gram(x, ell, sv);
    for i in 0..k.nrows() {
        k[(i, i)] += noise;
    }
    let kinv = inv(&k);
    let kt = rbf(xt, x, ell, sv);
    let mean = &kt * &kinv * y;
    let cov = DMatrix::from_element(xt.nrows(), xt.nrows(), 0.0) + rbf(xt, xt, ell, sv) - &kt * &kinv * kt.transpose();
    (mean, cov.diagonal())
}

/// Binary logistic Laplace posterior: plain Newton with explicit inverses,
/// then `K_t grad` and `K_tt - K_t (K + W^-1)^-1 K_t'`.
pub fn naive_binary_logistic(
    x: &DMatrix<f64>,
    y: &[f64],
    xt: &DMatrix<f64>,
    ell: f64,
    sv: f64,
) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
    let n = x.nrows();
    let k = jittered_gram(x, ell, sv);
    let kinv = inv(&k);
    let grad = |g: &DVector<f64>| DVector::from_fn(n, |i, _| (y[i] + 1.0) / 2.0 - logistic(g[i]));
    let w = |g: &DVector<f64>| DVector::from_fn(n, |i, _| logistic(g[i]) * (1.0 - logistic(g[i])));
    let mut g = DVector::zeros(n);
    for _ in 0..200 {
        let wg = w(&g);
        let next = inv(&(&kinv + DMatrix::from_diagonal(&wg))) * (wg.component_mul(&g) + grad(&g));
        let done = (&next - &g).amax() < 1e-14;
        g = next;
        if done {
            break;
        }
    }
    let kt = rbf(xt, x, ell, sv);
    let mean = &kt * grad(&g);
    let winv = DMatrix::from_diagonal(&w(&g).map(|v| 1.0 / v));
    let cov = rbf(xt, xt, ell, sv) - &kt * inv(&(&k + winv)) * kt.transpose();
    (g, mean, cov.diagonal())
}

pub fn stacked_softmax(f: &DVector<f64>, n: usize, c: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n * c);
    for i in 0..n {
        let m = (0..c).map(|l| f[l * n + i]).fold(f64::MIN, f64::max);
        let z: f64 = (0..c).map(|l| (f[l * n + i] - m).exp()).sum();
        for l in 0..c {
            out[l * n + i] = (f[l * n + i] - m).exp() / z;
        }
    }
    out
}

pub fn softmax_w(pi: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let nc = pi.len();
    DMatrix::from_fn(
        nc,
        nc,
        |r, s| {
            if r % n != s % n {
                0.0
            } else {
                (if r == s { pi[r] } else { 0.0 }) - pi[r] * pi[s]
            }
        },
    )
}

/// Multiclass softmax Laplace posterior with one shared kernel: Newton on
/// the stacked latents, then the per-point `C x C` predictive covariance
/// `K** - Q*' (I + W K)^-1 W Q*`.
pub fn naive_multiclass(
    x: &DMatrix<f64>,
    labels: &[usize],
    c: usize,
    xt: &DMatrix<f64>,
    ell: f64,
    sv: f64,
) -> (DVector<f64>, DMatrix<f64>, Vec<DMatrix<f64>>) {
    let n = x.nrows();
    let kc = jittered_gram(x, ell, sv);
    let mut k = DMatrix::zeros(n * c, n * c);
    for l in 0..c {
        k.view_mut((l * n, l * n), (n, n)).copy_from(&kc);
    }
    let kinv = inv(&k);
    let mut y = DVector::zeros(n * c);
    for (i, &l) in labels.iter().enumerate() {
        y[l * n + i] = 1.0;
    }
    let mut f = DVector::zeros(n * c);
    for _ in 0..200 {
        let pi = stacked_softmax(&f, n, c);
        let w = softmax_w(&pi, n);
        let next = inv(&(&kinv + &w)) * (&w * &f + &y - &pi);
        let done = (&next - &f).amax() < 1e-13;
        f = next;
        if done {
            break;
        }
    }
    let pi = stacked_softmax(&f, n, c);
    let w = softmax_w(&pi, n);
    let kt = rbf(xt, x, ell, sv);
    let m = xt.nrows();
    let mut mean = DMatrix::zeros(m, c);
    for l in 0..c {
        let r = y.rows(l * n, n) - pi.rows(l * n, n);
        mean.column_mut(l).copy_from(&(&kt * r));
    }
    let middle = inv(&(DMatrix::identity(n * c, n * c) + &w * &k)) * &w;
    let mut covs = Vec::with_capacity(m);
    for j in 0..m {
        let mut q = DMatrix::zeros(n * c, c);
        for l in 0..c {
            q.view_mut((l * n, l), (n, 1)).copy_from(&kt.row(j).transpose());
        }
        covs.push(DMatrix::identity(c, c) * sv - q.transpose() * &middle * &q);
    }
    (f, mean, covs)
}

/// Dense-grid maximizer: `(argmax, max)` over `lo + k h`.
pub fn grid_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, h: f64) -> (f64, f64) {
    let n = ((hi - lo) / h).round() as usize;
    (0..=n)
        .map(|k| {
            let t = lo + k as f64 * h;
            (t, f(t))
        })
        .fold((lo, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// Standard normal CDF by composite Simpson integration of the density.
pub fn phi_quadrature(x: f64) -> f64 {
    if x < -12.0 {
        return 0.0;
    }
    let (a, n) = (-12.0, 20_000usize);
    let h = (x - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(x);
    for k in 1..n {
        s += pdf(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `Phi(lo + k h)` for `k = 0..=n`, by cumulative Simpson integration of the
/// density from `phi_quadrature(lo)`.
pub fn phi_table(lo: f64, h: f64, n: usize) -> Vec<f64> {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = phi_quadrature(lo);
    out.push(acc);
    for k in 0..n {
        let a = lo + k as f64 * h;
        acc += h / 6.0 * (pdf(a) + 4.0 * pdf(a + 0.5 * h) + pdf(a + h));
        out.push(acc);
    }
    out
}
