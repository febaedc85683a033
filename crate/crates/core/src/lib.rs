//! Global sensitivity analysis: pick-freeze Sobol' indices, derivative-based
//! global sensitivity measures (DGSM) and the Poincaré-constant bound
//! `Υ_j = C(μ_j)·ν_j / D` on total Sobol' indices.
//!
//! The crate is `no_std` and only needs `alloc`. Elementary functions come
//! from `libm`, randomness from a seeded ChaCha stream, so every result is a
//! pure function of its inputs and seeds.
//!
//! Layout:
//!
//! * [`distributions`]: marginal input laws, Cheeger and Poincaré constants.
//! * [`sampling`]: Monte Carlo, Latin hypercube and Sobol' designs, pick-freeze bundles.
//! * [`models`]: the [`Model`] trait, gradients, built-in test functions.
//! * [`estimators`]: variance, Sobol' indices, DGSM, the bound, a quadrature ANOVA oracle.
//! * [`analysis`]: the end-to-end sample → evaluate → estimate pipeline.
//! * [`report`]: per-input records, rankings, screening and reference-table reproduction.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod distributions;
pub mod estimators;
mod error;
pub mod matrix;
pub mod models;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod special;

pub use crate::analysis::{analyze, AnalysisOptions};
pub use crate::distributions::{ConstantPolicy, InputSpace, Marginal, PoincareConstant};
pub use crate::error::{Error, Result};
pub use crate::matrix::Matrix;
pub use crate::models::{GradientMethod, Model};
pub use crate::report::SensitivityReport;
pub use crate::sampling::Generator;
