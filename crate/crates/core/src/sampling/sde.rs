//! Short distance elimination.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::plan::Provenance;
use crate::dataset::GridPoint;
use crate::error::{Error, Result};

/// Axis-wise minimum separation `(alpha, beta)` in grid units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SdeThresholds {
    alpha: u32,
    beta: u32,
}

impl SdeThresholds {
    pub fn new(alpha: u32, beta: u32) -> Result<Self> {
        if alpha == 0 && beta == 0 {
            return Err(Error::ZeroThresholds);
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// The `(α, β) ∈ {0..=4}²` grid without `(0, 0)`, row-major in `α`.
    pub fn sweep_grid() -> impl Iterator<Item = SdeThresholds> {
        (0..=4u32).flat_map(|a| (0..=4u32).filter_map(move |b| SdeThresholds::new(a, b).ok()))
    }
}

impl Default for SdeThresholds {
    fn default() -> Self {
        Self { alpha: 2, beta: 2 }
    }
}

impl fmt::Display for SdeThresholds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.alpha, self.beta)
    }
}

/// `true` iff `|Δx| ≥ α` and `|Δy| ≥ β`.
#[inline]
pub fn sde_predicate(a: GridPoint, b: GridPoint, t: SdeThresholds) -> bool {
    a.x.abs_diff(b.x) >= t.alpha && a.y.abs_diff(b.y) >= t.beta
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdeSelection {
    /// Selected dataset indices in selection order.
    pub selected: Vec<usize>,
    pub provenance: Vec<Provenance>,
    /// Rejected candidates in rejection order.
    pub discarded: Vec<usize>,
}

/// Runs SDE over `pool` (dataset index, coordinate) pairs.
///
/// Candidates are visited in one seeded uniform permutation of the pool.
/// The first is always kept; each later one is kept only if the predicate
/// holds against every point kept so far. Phase 1 stops as soon as
/// `target` points are kept. If it runs out of candidates first, the
/// remainder is drawn uniformly without replacement from the discards.
pub fn sde_select<R: Rng>(
    pool: &[(usize, GridPoint)],
    target: usize,
    t: SdeThresholds,
    rng: &mut R,
) -> Result<SdeSelection> {
    if target > pool.len() {
        return Err(Error::InvalidSampleSize {
            target,
            n: pool.len(),
        });
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    sde_select_in_order(pool, &order, target, t, rng)
}

/// [`sde_select`] with an explicit visiting order (positions into `pool`).
/// `rng` is only used for backfill.
pub fn sde_select_in_order<R: Rng>(
    pool: &[(usize, GridPoint)],
    order: &[usize],
    target: usize,
    t: SdeThresholds,
    rng: &mut R,
) -> Result<SdeSelection> {
    if target > order.len() {
        return Err(Error::InvalidSampleSize {
            target,
            n: order.len(),
        });
    }
    let mut selected = Vec::with_capacity(target);
    let mut kept: Vec<GridPoint> = Vec::with_capacity(target);
    let mut discarded = Vec::new();
    if target > 0 {
        for &pos in order {
            let (idx, p) = pool[pos];
            if kept.iter().all(|&q| sde_predicate(p, q, t)) {
                kept.push(p);
                selected.push(idx);
                if selected.len() == target {
                    break;
                }
            } else {
                discarded.push(idx);
            }
        }
    }
    let mut provenance: Vec<Provenance> = selected.iter().map(|_| Provenance::PrimaryPick).collect();
    let missing = target - selected.len();
    if missing > 0 {
        for i in index::sample(rng, discarded.len(), missing) {
            selected.push(discarded[i]);
            provenance.push(Provenance::Backfill);
        }
    }
    Ok(SdeSelection {
        selected,
        provenance,
        discarded,
    })
}
