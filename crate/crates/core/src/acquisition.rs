//! Pool scoring and query selection.
//!
//! Every strategy maps a pool to one score per point, higher meaning more
//! desirable to query, and selects the first index attaining the maximum.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pgp::{LatentPosterior, Link, MC_LATENT_DRAWS};
use crate::scalar::Real;
use crate::special::{entropy, gauss_hermite_32, softmax};
use crate::uncertainty::{nec_bin, nec_multi, u_l_bin, u_l_multi};

/// Tolerance on per-point probability normalization in a request.
pub const PROB_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    Random,
    Bald,
    MaxEntLatent,
    Entropy,
    LeastConfidence,
    Margin,
    /// Label uncertainty `U^L`.
    UncertaintyL,
    /// Smallest necessity of correct classification.
    Necessity,
}

impl Acquisition {
    pub const ALL: [Acquisition; 8] = [
        Acquisition::Random,
        Acquisition::Bald,
        Acquisition::MaxEntLatent,
        Acquisition::Entropy,
        Acquisition::LeastConfidence,
        Acquisition::Margin,
        Acquisition::UncertaintyL,
        Acquisition::Necessity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Acquisition::Random => "random",
            Acquisition::Bald => "bald",
            Acquisition::MaxEntLatent => "max_ent_latent",
            Acquisition::Entropy => "entropy",
            Acquisition::LeastConfidence => "least_confidence",
            Acquisition::Margin => "margin",
            Acquisition::UncertaintyL => "uncertainty_l",
            Acquisition::Necessity => "necessity",
        }
    }

    /// Whether the strategy reads probabilities averaged over the latent
    /// posterior rather than taken at its mode.
    pub fn uses_averaged_probs(self) -> bool {
        matches!(self, Acquisition::Bald | Acquisition::Entropy | Acquisition::LeastConfidence | Acquisition::Margin)
    }
}

impl fmt::Display for Acquisition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Acquisition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Acquisition::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown acquisition `{s}`")))
    }
}

/// Everything a strategy may look at for one pool.
#[derive(Debug, Clone, Copy)]
pub struct AcquisitionRequest<'a, T: Real> {
    posterior: &'a LatentPosterior<T>,
    probs: &'a DMatrix<T>,
    link: Link,
    rng_seed: u64,
}

impl<'a, T: Real> AcquisitionRequest<'a, T> {
    /// `probs` holds one row of class probabilities per pool point.
    pub fn new(posterior: &'a LatentPosterior<T>, probs: &'a DMatrix<T>, link: Link, rng_seed: u64) -> Result<Self> {
        if probs.nrows() != posterior.n_points() {
            return Err(Error::DimensionMismatch { expected: posterior.n_points(), got: probs.nrows() });
        }
        let tol = T::tol(PROB_SUM_TOL);
        for (i, row) in probs.row_iter().enumerate() {
            let s = row.sum();
            if (s - T::one()).abs() > tol {
                return Err(Error::NotNormalized(format!("probabilities of pool point {i} sum to {}", s.as_f64())));
            }
        }
        Ok(Self { posterior, probs, link, rng_seed })
    }

    pub fn len(&self) -> usize {
        self.posterior.n_points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn posterior(&self) -> &LatentPosterior<T> {
        self.posterior
    }

    pub fn probs(&self) -> &DMatrix<T> {
        self.probs
    }

    pub fn link(&self) -> Link {
        self.link
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
}

/// Per-point scores. Random acquisition has none and returns an error.
pub fn scores<T: Real>(acq: Acquisition, req: &AcquisitionRequest<'_, T>) -> Result<Vec<T>> {
    let post = req.posterior;
    let n = req.len();
    let rows = |f: &dyn Fn(&[T]) -> T| -> Vec<T> {
        (0..n)
            .map(|i| {
                let row: Vec<T> = req.probs.row(i).iter().copied().collect();
                f(&row)
            })
            .collect()
    };
    let out = match acq {
        Acquisition::Random => {
            return Err(Error::InvalidParameter("random acquisition has no scores".into()));
        }
        Acquisition::Bald => bald_scores(req),
        Acquisition::MaxEntLatent => (0..n).map(|i| post.variances().row(i).sum()).collect(),
        Acquisition::Entropy => rows(&|p| entropy(p)),
        Acquisition::LeastConfidence => rows(&|p| T::one() - p.iter().fold(T::zero(), |m, &v| m.max(v))),
        Acquisition::Margin => rows(&|p| {
            let (a, b) = top_two(p);
            b - a
        }),
        Acquisition::UncertaintyL => (0..n)
            .map(|i| {
                if post.is_binary() {
                    u_l_bin(post.mean(i, 0), post.variance(i, 0), req.link)
                } else {
                    u_l_multi(&post.point_means(i), &post.point_variances(i))
                }
            })
            .collect::<Result<Vec<_>>>()?,
        Acquisition::Necessity => (0..n)
            .map(|i| {
                if post.is_binary() {
                    Ok(-nec_bin(post.mean(i, 0), post.variance(i, 0)))
                } else {
                    nec_multi(&post.point_means(i), &post.point_variances(i)).map(|m| -m.value)
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    if let Some(i) = out.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteObjective { at: i as f64 });
    }
    Ok(out)
}

/// Index chosen by `acq`; ties go to the lowest index.
///
/// On two-class pools entropy, least confidence and margin are all strictly
/// decreasing in the top probability, so they select by that key directly.
/// Rounding in the entropy and margin formulas could otherwise split exact
/// ties differently across the three.
pub fn select<T: Real>(acq: Acquisition, req: &AcquisitionRequest<'_, T>) -> Result<usize> {
    if req.is_empty() {
        return Err(Error::EmptyPool);
    }
    match acq {
        Acquisition::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(req.rng_seed);
            Ok(rng.random_range(0..req.len()))
        }
        Acquisition::Entropy | Acquisition::LeastConfidence | Acquisition::Margin if req.probs.ncols() == 2 => {
            let keys: Vec<T> = req.probs.row_iter().map(|r| -r[0].max(r[1])).collect();
            Ok(argmax(&keys))
        }
        _ => Ok(argmax(&scores(acq, req)?)),
    }
}

/// First index of the maximum.
pub fn argmax<T: Real>(scores: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn top_two<T: Real>(p: &[T]) -> (T, T) {
    let mut first = T::neg_infinity();
    let mut second = T::neg_infinity();
    for &v in p {
        if v > first {
            second = first;
            first = v;
        } else if v > second {
            second = v;
        }
    }
    (first, second)
}

/// Mutual information between label and latent. Both terms come from the
/// same quadrature nodes or the same Monte Carlo draws.
fn bald_scores<T: Real>(req: &AcquisitionRequest<'_, T>) -> Vec<T> {
    let post = req.posterior;
    let n = req.len();
    if post.is_binary() {
        let gh = gauss_hermite_32();
        let link = req.link;
        return (0..n)
            .map(|i| {
                let (m, v) = (post.mean(i, 0), post.variance(i, 0));
                let p = gh.expect(m, v, |g| link.prob(g));
                let expected_h = gh.expect(m, v, |g| {
                    let q = link.prob(g);
                    entropy(&[q, T::one() - q])
                });
                entropy(&[p, T::one() - p]) - expected_h
            })
            .collect();
    }
    let k = post.n_latent();
    let mut rng = ChaCha8Rng::seed_from_u64(req.rng_seed);
    let scale = T::one() / T::from_usize(MC_LATENT_DRAWS).unwrap();
    let mut draw = vec![T::zero(); k];
    (0..n)
        .map(|i| {
            let sd: Vec<T> = post.point_variances(i).into_iter().map(|v| v.sqrt()).collect();
            let mut mean_p = vec![T::zero(); k];
            let mut mean_h = T::zero();
            for _ in 0..MC_LATENT_DRAWS {
                for c in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    draw[c] = post.mean(i, c) + sd[c] * T::lit(z);
                }
                let p = softmax(&draw);
                mean_h += entropy(&p) * scale;
                for c in 0..k {
                    mean_p[c] += p[c] * scale;
                }
            }
            entropy(&mean_p) - mean_h
        })
        .collect()
}
