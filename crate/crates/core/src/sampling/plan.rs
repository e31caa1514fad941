use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// How a training point entered the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Chosen by the strategy's main selection step (for SDE: accepted in phase 1).
    PrimaryPick,
    /// Added afterwards to reach a quota: SDE discard backfill or global top-up.
    Backfill,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PrimaryPick => "primary",
            Provenance::Backfill => "backfill",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primary" => Ok(Provenance::PrimaryPick),
            "backfill" => Ok(Provenance::Backfill),
            other => Err(Error::InvalidConfig(alloc::format!("unknown provenance `{other}`"))),
        }
    }
}

/// One selected training point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainPick {
    pub index: usize,
    pub provenance: Provenance,
    /// Stratum or cluster id, when the strategy groups points.
    pub group: Option<usize>,
}

/// Train/test partition of a dataset's indices.
///
/// Training picks keep selection order; test indices are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPlan {
    n: usize,
    train: Vec<TrainPick>,
    test: Vec<usize>,
}

impl SamplingPlan {
    /// Builds the plan, deriving the test set as the complement of `train`.
    pub fn new(n: usize, train: Vec<TrainPick>) -> Result<Self> {
        let mut in_train = vec![false; n];
        for pick in &train {
            if pick.index >= n {
                return Err(Error::InvalidConfig(alloc::format!(
                    "training index {} out of range for {n} samples",
                    pick.index
                )));
            }
            if core::mem::replace(&mut in_train[pick.index], true) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "training index {} selected twice",
                    pick.index
                )));
            }
        }
        let test = (0..n).filter(|&i| !in_train[i]).collect();
        Ok(Self { n, train, test })
    }

    /// Size of the dataset the plan partitions.
    pub fn dataset_len(&self) -> usize {
        self.n
    }

    pub fn train(&self) -> &[TrainPick] {
        &self.train
    }

    pub fn train_indices(&self) -> Vec<usize> {
        self.train.iter().map(|p| p.index).collect()
    }

    pub fn test_indices(&self) -> &[usize] {
        &self.test
    }

    /// Training picks made by the primary selection step.
    pub fn primary_picks(&self) -> impl Iterator<Item = &TrainPick> {
        self.train.iter().filter(|p| p.provenance == Provenance::PrimaryPick)
    }
}
