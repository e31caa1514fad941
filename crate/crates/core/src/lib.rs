//! Partial-measurement prediction on grid-structured test data.
//!
//! A small fraction of a wafer map or FPGA ring-oscillator map is selected
//! for measurement by one of several sampling strategies, a Gaussian process
//! with an RBF kernel is fitted on the selected points, and the rest of the
//! map is predicted from it.
//!
//! The strategies live in [`sampling`]: uniform random, value-quantile
//! stratified, 1-D k-means, and short distance elimination (SDE) on its own
//! or combined with strata ([`sampling::Method::SSde`]) or clusters
//! ([`sampling::Method::KSde`]). SDE visits candidates in random order and
//! keeps a candidate only when it is at least `alpha` columns and `beta`
//! rows away from every point kept so far.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the
//! experiment runner and the command line tool live in the `spatial-sde`
//! crate.

#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dataset;
pub mod error;
pub mod gpr;
pub mod linalg;
pub mod metrics;
pub mod sampling;
pub mod synth;

pub use dataset::{Dataset, DatasetMeta, GridBounds, GridPoint, NormParams, SpatialSample};
pub use error::{Error, Result};
pub use gpr::{FitConfig, GprHyperparams, GprModel, Point2};
pub use metrics::{improvement_pct, rmsd};
pub use sampling::{Method, Provenance, SamplingConfig, SamplingPlan, SdeThresholds};

/// Seeded generator used everywhere randomness is needed.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Creates the crate's generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
