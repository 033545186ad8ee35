//! Possibilistic Gaussian processes: kernel, regression posterior and
//! Laplace-approximated classification posteriors.
//!
//! Inputs are always `n x d` matrices with one point per row.

mod binary;
mod hyper;
mod kernel;
mod link;
mod multiclass;
mod posterior;
mod regression;

pub use binary::BinaryClassifierModel;
pub use hyper::{select_lengthscale, LengthscaleSearch};
pub use kernel::RbfKernel;
pub use link::{predict_prob_averaged, predict_prob_mode, Link, MC_LATENT_DRAWS};
pub use multiclass::{softmax_neg_hessian, stacked_softmax, MulticlassClassifierModel};
pub use posterior::LatentPosterior;
pub use regression::RegressionModel;

/// Newton iteration controls for the Laplace fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Stop once both `|grad log p - K^-1 g|` and `|g - K grad log p|`
    /// (sup-norms) drop to this value, clamped to what the scalar type
    /// resolves.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Step halvings attempted when a full step decreases the objective.
    pub max_halvings: usize,
}

impl NewtonOptions {
    pub const fn binary() -> Self {
        Self { grad_tol: 1e-8, max_iter: 100, max_halvings: 10 }
    }

    pub const fn multiclass() -> Self {
        Self { grad_tol: 1e-6, max_iter: 200, max_halvings: 10 }
    }
}

/// Relative jitter added to kernel diagonals before factorization.
pub const JITTER: f64 = 1e-8;
