//! File formats, experiment runner and command-line front end for
//! [`spatial_sde_core`].

pub mod cli;
pub mod csvio;
pub mod error;
pub mod eval;
pub mod heatmap;
pub mod manifest;
pub mod output;
pub mod report;

pub use error::{Error, Result};
