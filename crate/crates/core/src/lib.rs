//! Weighted kernel-density sketches over LSH kernels.
//!
//! A weighted point set `{(x_j, alpha_j)}` defines the function
//! `f(q) = sum_j alpha_j * K(q, x_j)` where `K` is the collision probability of
//! an LSH family. [`sketch::RepresenterSketch`] compresses that sum into an
//! `L x R` array of floating counters that answers `f(q)` with `L` hash lookups;
//! [`distill`] learns the weighted points from teacher scores so that model
//! inference reduces to sketch queries.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, dataset parsing and
//! the command line live in the `rsketch` companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codec;
pub mod distill;
mod error;
pub mod kde;
pub mod lsh;
pub mod metrics;
pub mod projection;
pub mod sketch;

pub use error::{Error, Result};
pub use kde::{exact_root_kde, exact_weighted_kde};
pub use lsh::{KernelConfig, LshEnsemble, LshEnsembleSpec, LshFamily, LshFamilyConfig};
pub use projection::Projection;
pub use sketch::{EstimateResult, Estimator, RepresenterSketch, WeightedPoint};

/// Binary classification or regression; shared by the data, distill and metrics layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    BinaryClassification,
    Regression,
}
