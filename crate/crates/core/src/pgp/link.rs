use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LatentPosterior;
use crate::scalar::Real;
use crate::special::{gauss_hermite_32, inverse_mills, log_normal_cdf, log_sigmoid, normal_cdf, sigmoid, softmax};

/// Latent draws used for multiclass predictive averages.
pub const MC_LATENT_DRAWS: usize = 256;

/// Binary link from latent value to the probability of the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    #[default]
    Logistic,
    Probit,
}

impl Link {
    pub fn prob<T: Real>(self, g: T) -> T {
        match self {
            Link::Logistic => sigmoid(g),
            Link::Probit => normal_cdf(g),
        }
    }

    /// `log p(y | g)` for `y` in {-1, +1}.
    pub fn log_lik<T: Real>(self, y: T, g: T) -> T {
        match self {
            Link::Logistic => log_sigmoid(y * g),
            Link::Probit => log_normal_cdf(y * g),
        }
    }

    /// `log(1 - link(g))`.
    pub fn log_complement<T: Real>(self, g: T) -> T {
        self.log_lik(-T::one(), g)
    }

    /// `d/dg log p(y | g)`.
    pub fn grad<T: Real>(self, y: T, g: T) -> T {
        match self {
            Link::Logistic => (y + T::one()) * T::lit(0.5) - sigmoid(g),
            Link::Probit => y * inverse_mills(y * g),
        }
    }

    /// `-d^2/dg^2 log p(y | g)`; non-negative for both links.
    pub fn neg_hessian<T: Real>(self, y: T, g: T) -> T {
        match self {
            Link::Logistic => {
                let p = sigmoid(g);
                p * (T::one() - p)
            }
            Link::Probit => {
                let z = y * g;
                let r = inverse_mills(z);
                (r * r + z * r).max(T::zero())
            }
        }
    }
}

/// Class probabilities at the posterior mode: `link(mu)` for binary
/// posteriors (columns `[negative, positive]`), `softmax(mu)` otherwise.
pub fn predict_prob_mode<T: Real>(post: &LatentPosterior<T>, link: Link) -> DMatrix<T> {
    let n = post.n_points();
    if post.is_binary() {
        DMatrix::from_fn(n, 2, |i, c| {
            let p = link.prob(post.mean(i, 0));
            if c == 1 {
                p
            } else {
                T::one() - p
            }
        })
    } else {
        let mut out = DMatrix::zeros(n, post.n_latent());
        for i in 0..n {
            for (c, p) in softmax(&post.point_means(i)).into_iter().enumerate() {
                out[(i, c)] = p;
            }
        }
        out
    }
}

/// Class probabilities averaged over the latent Gaussian.
///
/// Binary logistic uses 32-node Gauss-Hermite quadrature, probit the closed
/// form `Phi(mu / sqrt(1 + s^2))`, multiclass a Monte Carlo average over
/// [`MC_LATENT_DRAWS`] draws seeded by `seed`.
pub fn predict_prob_averaged<T: Real>(post: &LatentPosterior<T>, link: Link, seed: u64) -> DMatrix<T> {
    let n = post.n_points();
    if post.is_binary() {
        let gh = gauss_hermite_32();
        DMatrix::from_fn(n, 2, |i, c| {
            let (m, v) = (post.mean(i, 0), post.variance(i, 0));
            let p = match link {
                _ if v == T::zero() => link.prob(m),
                Link::Logistic => gh.expect(m, v, sigmoid),
                Link::Probit => normal_cdf(m / (T::one() + v).sqrt()),
            };
            if c == 1 {
                p
            } else {
                T::one() - p
            }
        })
    } else {
        let k = post.n_latent();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = DMatrix::zeros(n, k);
        let mut draw = vec![T::zero(); k];
        let scale = T::one() / T::from_usize(MC_LATENT_DRAWS).unwrap();
        for i in 0..n {
            let sd: Vec<T> = post.point_variances(i).into_iter().map(|v| v.sqrt()).collect();
            if sd.iter().all(|&s| s == T::zero()) {
                for (c, p) in softmax(&post.point_means(i)).into_iter().enumerate() {
                    out[(i, c)] = p;
                }
                continue;
            }
            for _ in 0..MC_LATENT_DRAWS {
                for c in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    draw[c] = post.mean(i, c) + sd[c] * T::lit(z);
                }
                for (c, p) in softmax(&draw).into_iter().enumerate() {
                    out[(i, c)] += p * scale;
                }
            }
        }
        out
    }
}
