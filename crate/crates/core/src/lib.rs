//! Binned-mode photon-number distributions of boson samplers with partially
//! distinguishable photons, and validation of sampler output against them.
//!
//! Mode labels are 1-based wherever they appear in the public API and in
//! file formats; matrix indices inside computations are 0-based.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binning;
pub mod error;
pub mod haar_stats;
pub mod interference;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod validation;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
