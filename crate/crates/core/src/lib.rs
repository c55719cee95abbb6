//! Tail bounds for the largest singular value of sub-Gaussian random
//! matrices, and a seeded Monte Carlo harness that checks them.
//!
//! Bounds are evaluated in natural-log space ([`bounds`]); random matrices
//! come from [`ensembles`]; [`harness`] estimates empirical tails with exact
//! binomial confidence intervals and tests each bound against them.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod harness;
pub mod json;
pub mod linalg;
pub mod models;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use bounds::{
    covering_cardinality_bound, entrywise_bound, net_bound, rect_series_bound, refined_bound,
    refined_crossover, series_bound, toeplitz_bound, variance_param_hermitian, variance_param_rect,
    BoundTag, LogProbBound, VarianceParam,
};
pub use ensembles::{MatrixSeries, ToeplitzSpec};
pub use error::{Error, Result};
pub use harness::{
    estimate_tail, toeplitz_experiment, verify_domination, EnsembleSpec, TailCurve,
    VerificationReport,
};
pub use linalg::{DenseMatrix, HermitianMatrix};
pub use models::SubGaussianModel;
