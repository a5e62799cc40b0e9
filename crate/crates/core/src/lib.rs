//! DAG-Wishart priors for Gaussian DAG models with a fixed parent ordering.
//!
//! Vertices are 0-based in the API; an edge `i -> j` always has `i > j`.
//! Files and error messages use 1-based labels.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chol;
pub mod cli;
pub mod completion;
pub mod dag;
pub mod error;
pub mod estimators;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod select;
pub mod wishart;

pub use chol::{CholeskyFactor, XiPoint};
pub use completion::IncompleteMatrix;
pub use dag::Dag;
pub use error::{Error, Result};
pub use linalg::SpdMatrix;
pub use wishart::{AlphaRule, DagWishartParams, SuffStats};
