//! Composite index construction and the statistics used to relate two
//! country-level indices: descriptives, normality, correlation, OLS with
//! diagnostics, and PCA.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod dataset;
pub mod descriptive;
pub mod distributions;
pub mod error;
pub mod index;
pub mod linalg;
pub mod pca;
pub mod regression;
pub mod report;

pub use error::{Error, Result};
