//! Training-set selection strategies.
//!
//! Every strategy returns a [`SamplingPlan`] with exactly `round(p·N)`
//! training points. Grouped strategies first take `⌊p·|group|⌋` points per
//! stratum or cluster and then top up uniformly from the unselected points;
//! SDE-based ones additionally backfill each group from its own discards
//! before the global top-up.

mod kmeans;
mod plan;
mod sde;
mod strata;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use rand::Rng;

pub use kmeans::{kmeans_1d, KMeansResult};
pub use plan::{Provenance, SamplingPlan, TrainPick};
pub use sde::{sde_predicate, sde_select, sde_select_in_order, SdeSelection, SdeThresholds};
pub use strata::{make_strata, StratumSpec};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    /// Training fraction `p`.
    pub fraction: f64,
    pub seed: u64,
    pub strata_count: usize,
    pub cluster_count: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            seed: 0,
            strata_count: 7,
            cluster_count: 7,
        }
    }
}

impl SamplingConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidConfig("fraction p must lie in (0, 1)".into()));
        }
        if self.strata_count == 0 || self.cluster_count == 0 {
            return Err(Error::InvalidConfig("strata and cluster counts must be at least 1".into()));
        }
        Ok(())
    }

    /// `round(p·N)`, the exact training-set size.
    pub fn train_size(&self, n: usize) -> usize {
        libm::round(self.fraction * n as f64) as usize
    }

    /// `⌊p·n⌋` for one group. The small offset keeps products such as
    /// `0.1 · 70` from flooring one below the intended integer.
    pub fn group_quota(&self, n: usize) -> usize {
        libm::floor(self.fraction * n as f64 + 1e-9) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Random,
    Stratified,
    KMeans,
    /// SDE over the whole dataset, used by the `(α, β)` sweep.
    Sde,
    SSde,
    KSde,
}

impl Method {
    /// The five strategies compared in method-comparison experiments.
    pub const COMPARED: [Method; 5] = [
        Method::Random,
        Method::Stratified,
        Method::KMeans,
        Method::SSde,
        Method::KSde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Stratified => "stratified",
            Method::KMeans => "kmeans",
            Method::Sde => "sde",
            Method::SSde => "s-sde",
            Method::KSde => "k-sde",
        }
    }

    pub fn uses_sde(self) -> bool {
        matches!(self, Method::Sde | Method::SSde | Method::KSde)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Method::Random),
            "stratified" => Ok(Method::Stratified),
            "kmeans" | "k-means" => Ok(Method::KMeans),
            "sde" => Ok(Method::Sde),
            "s-sde" | "ssde" => Ok(Method::SSde),
            "k-sde" | "ksde" => Ok(Method::KSde),
            _ => Err(Error::UnknownMethod(s.into())),
        }
    }
}

fn checked_train_size(d: &Dataset, cfg: &SamplingConfig) -> Result<usize> {
    cfg.validate()?;
    let n = d.len();
    let target = cfg.train_size(n);
    if target == 0 || target >= n {
        return Err(Error::InvalidSampleSize { target, n });
    }
    Ok(target)
}

/// Uniform sample of `round(p·N)` indices without replacement.
pub fn random_sampling(d: &Dataset, cfg: &SamplingConfig) -> Result<SamplingPlan> {
    let target = checked_train_size(d, cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let picks = index::sample(&mut rng, d.len(), target)
        .into_iter()
        .map(|index| TrainPick {
            index,
            provenance: Provenance::PrimaryPick,
            group: None,
        })
        .collect();
    SamplingPlan::new(d.len(), picks)
}

/// SDE over the whole dataset with target `round(p·N)`.
pub fn sde_sampling(d: &Dataset, cfg: &SamplingConfig, t: SdeThresholds) -> Result<SamplingPlan> {
    let target = checked_train_size(d, cfg)?;
    let mut rng = seeded_rng(cfg.seed);
    let pool: Vec<_> = d.samples().iter().map(|s| s.point()).enumerate().collect();
    let sel = sde_select(&pool, target, t, &mut rng)?;
    let picks = sel
        .selected
        .into_iter()
        .zip(sel.provenance)
        .map(|(index, provenance)| TrainPick {
            index,
            provenance,
            group: None,
        })
        .collect();
    SamplingPlan::new(d.len(), picks)
}

/// Per-group quota selection followed by a uniform global top-up.
fn grouped_plan(
    d: &Dataset,
    cfg: &SamplingConfig,
    target: usize,
    groups: &[Vec<usize>],
    sde: Option<SdeThresholds>,
) -> Result<SamplingPlan> {
    let n = d.len();
    let mut rng = seeded_rng(cfg.seed);
    let mut labels = vec![0; n];
    let mut picks = Vec::with_capacity(target);
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            labels[i] = g;
        }
        let quota = cfg.group_quota(members.len());
        match sde {
            None => {
                for k in index::sample(&mut rng, members.len(), quota) {
                    picks.push(TrainPick {
                        index: members[k],
                        provenance: Provenance::PrimaryPick,
                        group: Some(g),
                    });
                }
            }
            Some(t) => {
                let pool: Vec<_> = members.iter().map(|&i| (i, d.samples()[i].point())).collect();
                let sel = sde_select(&pool, quota, t, &mut rng)?;
                picks.extend(sel.selected.into_iter().zip(sel.provenance).map(|(index, provenance)| TrainPick {
                    index,
                    provenance,
                    group: Some(g),
                }));
            }
        }
    }
    top_up(&mut picks, n, target, &labels, &mut rng);
    SamplingPlan::new(n, picks)
}

fn top_up<R: Rng>(picks: &mut Vec<TrainPick>, n: usize, target: usize, labels: &[usize], rng: &mut R) {
    if picks.len() >= target {
        return;
    }
    let mut taken = vec![false; n];
    for p in picks.iter() {
        taken[p.index] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
    for k in index::sample(rng, free.len(), target - picks.len()) {
        let index = free[k];
        picks.push(TrainPick {
            index,
            provenance: Provenance::Backfill,
            group: Some(labels[index]),
        });
    }
}

/// Quantile strata, `⌊p·|stratum|⌋` uniform picks each, then top-up.
pub fn stratified_sampling(d: &Dataset, cfg: &SamplingConfig) -> Result<SamplingPlan> {
    let target = checked_train_size(d, cfg)?;
    let strata = make_strata(&d.values(), cfg.strata_count)?;
    grouped_plan(d, cfg, target, &strata.members, None)
}

/// 1-D k-means clusters on raw values, `⌊p·|cluster|⌋` uniform picks each, then top-up.
pub fn kmeans_sampling(d: &Dataset, cfg: &SamplingConfig) -> Result<SamplingPlan> {
    let target = checked_train_size(d, cfg)?;
    let km = kmeans_1d(&d.values(), cfg.cluster_count, cfg.seed)?;
    grouped_plan(d, cfg, target, &km.members(), None)
}

/// Quantile strata with SDE inside each stratum.
pub fn s_sde(d: &Dataset, cfg: &SamplingConfig, t: SdeThresholds) -> Result<SamplingPlan> {
    let target = checked_train_size(d, cfg)?;
    let strata = make_strata(&d.values(), cfg.strata_count)?;
    grouped_plan(d, cfg, target, &strata.members, Some(t))
}

/// k-means clusters with SDE inside each cluster.
pub fn k_sde(d: &Dataset, cfg: &SamplingConfig, t: SdeThresholds) -> Result<SamplingPlan> {
    let target = checked_train_size(d, cfg)?;
    let km = kmeans_1d(&d.values(), cfg.cluster_count, cfg.seed)?;
    grouped_plan(d, cfg, target, &km.members(), Some(t))
}

/// Dispatches to the strategy named by `method`. `t` is ignored by the
/// non-SDE strategies.
pub fn sample(d: &Dataset, method: Method, cfg: &SamplingConfig, t: SdeThresholds) -> Result<SamplingPlan> {
    match method {
        Method::Random => random_sampling(d, cfg),
        Method::Stratified => stratified_sampling(d, cfg),
        Method::KMeans => kmeans_sampling(d, cfg),
        Method::Sde => sde_sampling(d, cfg, t),
        Method::SSde => s_sde(d, cfg, t),
        Method::KSde => k_sde(d, cfg, t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{DatasetMeta, SpatialSample};

    fn grid_dataset(w: i32, h: i32, f: impl Fn(i32, i32) -> f64) -> Dataset {
        let samples = (0..h)
            .flat_map(|y| (0..w).map(move |x| (x, y)))
            .map(|(x, y)| SpatialSample::new(x, y, f(x, y)))
            .collect();
        Dataset::new(samples, DatasetMeta::default()).unwrap()
    }

    fn check_partition(plan: &SamplingPlan, n: usize, expected_train: usize) {
        let mut all = plan.train_indices();
        assert_eq!(all.len(), expected_train);
        all.extend_from_slice(plan.test_indices());
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn random_sizes_and_determinism() {
        let d = grid_dataset(10, 10, |x, y| f64::from(x * y));
        let cfg = SamplingConfig::default().with_seed(3);
        let plan = random_sampling(&d, &cfg).unwrap();
        check_partition(&plan, 100, 10);
        assert_eq!(plan.test_indices().len(), 90);
        assert_eq!(plan, random_sampling(&d, &cfg).unwrap());
        assert_ne!(plan, random_sampling(&d, &cfg.with_seed(4)).unwrap());
    }

    #[test]
    fn tiny_dataset_rejected() {
        let d = grid_dataset(2, 2, |x, _| f64::from(x));
        assert_eq!(
            random_sampling(&d, &SamplingConfig::default()),
            Err(Error::InvalidSampleSize { target: 0, n: 4 })
        );
        let cfg = SamplingConfig {
            fraction: 0.9,
            ..SamplingConfig::default()
        };
        let d = grid_dataset(2, 1, |x, _| f64::from(x));
        assert!(matches!(random_sampling(&d, &cfg), Err(Error::InvalidSampleSize { .. })));
    }

    #[test]
    fn stratified_floor_then_top_up() {
        let d = grid_dataset(40, 25, |x, y| f64::from(x) * 0.37 + f64::from(y * y) * 0.011);
        let cfg = SamplingConfig::default().with_seed(8);
        let plan = stratified_sampling(&d, &cfg).unwrap();
        check_partition(&plan, 1000, 100);
        // 1000 = 6·143 + 142: floors are 14 each except a stratum of 142 → 14; sum 98.
        let strata = make_strata(&d.values(), 7).unwrap();
        let floor_sum: usize = strata.members.iter().map(|m| m.len() / 10).sum();
        assert_eq!(floor_sum, 98);
        assert_eq!(plan.primary_picks().count(), floor_sum);
        assert_eq!(plan.train().len() - floor_sum, 2);
        for (g, m) in strata.members.iter().enumerate() {
            let primary = plan.primary_picks().filter(|p| p.group == Some(g)).count();
            assert_eq!(primary, m.len() / 10);
            assert!(plan.primary_picks().filter(|p| p.group == Some(g)).all(|p| m.contains(&p.index)));
        }
    }

    #[test]
    fn stratified_exact_floors() {
        // 70 distinct values into 7 strata of 10: one pick each, no top-up.
        let d = grid_dataset(70, 1, |x, _| f64::from(x));
        let plan = stratified_sampling(&d, &SamplingConfig::default()).unwrap();
        assert_eq!(plan.primary_picks().count(), 7);
        assert_eq!(plan.train().len(), 7);
        let mut groups: Vec<_> = plan.train().iter().map(|p| p.group.unwrap()).collect();
        groups.sort_unstable();
        assert_eq!(groups, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn kmeans_plan_exact_size() {
        let d = grid_dataset(80, 75, |x, y| libm::sin(f64::from(x) / 9.0) * libm::cos(f64::from(y) / 7.0));
        let cfg = SamplingConfig::default().with_seed(1);
        let plan = kmeans_sampling(&d, &cfg).unwrap();
        check_partition(&plan, 6000, 600);
        assert_eq!(plan, kmeans_sampling(&d, &cfg).unwrap());
        let t = SdeThresholds::default();
        let plan = k_sde(&d, &cfg, t).unwrap();
        check_partition(&plan, 6000, 600);
        assert_eq!(plan, k_sde(&d, &cfg, t).unwrap());
    }

    #[test]
    fn s_sde_per_stratum_quota() {
        // Two strata of 50 on a 10x10 grid: low values on the top half.
        let d = grid_dataset(10, 10, |x, y| f64::from(y * 10 + x));
        let cfg = SamplingConfig {
            strata_count: 2,
            ..SamplingConfig::default()
        };
        let plan = s_sde(&d, &cfg, SdeThresholds::default()).unwrap();
        check_partition(&plan, 100, 10);
        for g in 0..2 {
            assert_eq!(plan.train().iter().filter(|p| p.group == Some(g)).count(), 5);
        }
        assert_eq!(plan, s_sde(&d, &cfg, SdeThresholds::default()).unwrap());

        let huge = SdeThresholds::new(1000, 1000).unwrap();
        let plan = s_sde(&d, &cfg, huge).unwrap();
        check_partition(&plan, 100, 10);
        assert_eq!(plan.primary_picks().count(), 2);
    }

    #[test]
    fn k_sde_with_one_cluster_is_plain_sde() {
        let d = grid_dataset(10, 10, |x, y| f64::from(x + 3 * y));
        let t = SdeThresholds::default();
        let cfg = SamplingConfig {
            cluster_count: 1,
            seed: 21,
            ..SamplingConfig::default()
        };
        let a = k_sde(&d, &cfg, t).unwrap();
        let b = sde_sampling(&d, &cfg, t).unwrap();
        let strip = |p: &SamplingPlan| -> Vec<(usize, Provenance)> {
            p.train().iter().map(|t| (t.index, t.provenance)).collect()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            Method::Random,
            Method::Stratified,
            Method::KMeans,
            Method::Sde,
            Method::SSde,
            Method::KSde,
        ] {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("bogus".parse::<Method>(), Err(Error::UnknownMethod("bogus".into())));
    }
}
