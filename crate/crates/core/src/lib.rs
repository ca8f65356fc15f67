//! Bayesian estimation of covariance and precision matrix functionals:
//! samplers, functionals, perturbation series, discriminant analysis and a
//! seeded simulation harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod discriminant;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod perturbation;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use linalg::{Dataset, SpdMatrix, SymMatrix};
pub use rng::RngStream;
