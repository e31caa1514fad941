//! Value-quantile strata.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Partition of sample indices into `S` value strata.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumSpec {
    /// Lower bound of strata `1..S` (the value of the first member by rank).
    /// Non-decreasing; equal neighbours occur only when ties straddle a quantile.
    pub boundaries: Vec<f64>,
    /// Member indices of each stratum, ascending.
    pub members: Vec<Vec<usize>>,
}

impl StratumSpec {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Stratum id of every sample.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut labels = alloc::vec![0; n];
        for (s, m) in self.members.iter().enumerate() {
            for &i in m {
                labels[i] = s;
            }
        }
        labels
    }
}

/// Splits samples into `strata` quantile bands of the values.
///
/// Samples are ranked by `(value, index)`; stratum `s` takes the next
/// `⌊N/S⌋` ranks, plus one more for the first `N mod S` strata, so sizes
/// differ by at most one even under heavy ties.
pub fn make_strata(values: &[f64], strata: usize) -> Result<StratumSpec> {
    let n = values.len();
    if strata == 0 {
        return Err(Error::InvalidConfig("strata count must be at least 1".into()));
    }
    if n < strata {
        return Err(Error::TooFewForGroups { n, groups: strata });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let (base, extra) = (n / strata, n % strata);
    let mut members = Vec::with_capacity(strata);
    let mut boundaries = Vec::with_capacity(strata - 1);
    let mut start = 0;
    for s in 0..strata {
        let size = base + usize::from(s < extra);
        let mut m = order[start..start + size].to_vec();
        if s > 0 {
            boundaries.push(values[order[start]]);
        }
        m.sort_unstable();
        members.push(m);
        start += size;
    }
    Ok(StratumSpec { boundaries, members })
}
