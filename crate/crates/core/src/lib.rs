//! Possibility-theoretic uncertainty calculus, possibilistic Gaussian
//! processes and active-learning acquisition functions.
//!
//! All numerics are generic over [`scalar::Real`]; the aliases below fix the
//! scalar to `f64`, which is what the experiment harness uses.

// `!(x > 0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod error;
pub mod linalg;
pub mod pgp;
pub mod possibility;
pub mod scalar;
pub mod special;
pub mod uncertainty;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GaussianPossibility = possibility::GaussianPossibility<f64>;
pub type GridPossibility = possibility::GridPossibility<f64>;
pub type GridAxis = possibility::GridAxis<f64>;
pub type CovarianceReport = possibility::CovarianceReport<f64>;
pub type RbfKernel = pgp::RbfKernel<f64>;
pub type RegressionModel = pgp::RegressionModel<f64>;
pub type BinaryClassifierModel = pgp::BinaryClassifierModel<f64>;
pub type MulticlassClassifierModel = pgp::MulticlassClassifierModel<f64>;
pub type LatentPosterior = pgp::LatentPosterior<f64>;

/// Single-precision aliases.
pub mod f32 {
    use crate::{pgp, possibility};

    pub type GaussianPossibility = possibility::GaussianPossibility<f32>;
    pub type GridPossibility = possibility::GridPossibility<f32>;
    pub type RbfKernel = pgp::RbfKernel<f32>;
    pub type RegressionModel = pgp::RegressionModel<f32>;
    pub type BinaryClassifierModel = pgp::BinaryClassifierModel<f32>;
    pub type LatentPosterior = pgp::LatentPosterior<f32>;
}
