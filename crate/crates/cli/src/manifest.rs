//! Run manifests: a TOML record of one command invocation with every setting
//! resolved, enough to replay it and regenerate identical outputs.
//!
//! Schema:
//!
//! ```toml
//! tool = "spatial-sde"
//! version = "0.1.0"
//! seed_source = "flag"        # or "entropy"; absent for seedless commands
//! inputs = ["wafer.csv"]
//! outputs = ["plan.csv"]
//!
//! [invocation]
//! command = "sample"          # synth-wafer, synth-fpga, sample, predict,
//!                             # sweep, compare, heatmap
//! seed = 7                    # large seeds are written as strings
//! # ... every option of the command, defaults included
//! ```
//!
//! Timing is deliberately not recorded.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cli::Invocation;
use crate::error::{Error, Result};
use crate::output::write_string;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedSource {
    Flag,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_source: Option<SeedSource>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub invocation: Invocation,
}

impl RunManifest {
    pub fn new(invocation: Invocation, seed_source: Option<SeedSource>, inputs: Vec<PathBuf>, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            seed_source,
            inputs,
            outputs,
            invocation,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Manifest(e.message().to_string()))?;
        if m.tool != TOOL {
            return Err(Error::Manifest(format!("written by `{}`, not `{TOOL}`", m.tool)));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_toml()?)
    }
}

/// Seeds up to `i64::MAX` are TOML integers; larger ones are strings, since
/// TOML integers are signed 64-bit.
pub(crate) mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match *seed {
            Some(v) if i64::try_from(v).is_ok() => s.serialize_some(&(v as i64)),
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Int(v)) => Ok(Some(v)),
            Some(Repr::Text(s)) => s.parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}
