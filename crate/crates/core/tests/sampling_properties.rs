use std::collections::BTreeMap;

use proptest::prelude::*;
use spatial_sde_core::sampling::{
    self, kmeans_1d, make_strata, random_sampling, Method, Provenance, SamplingConfig, SamplingPlan, SdeThresholds,
};
use spatial_sde_core::{Dataset, DatasetMeta, SpatialSample};

fn dataset(cells: &[(i32, i32)], values: &[f64]) -> Dataset {
    let samples = cells.iter().zip(values).map(|(&(x, y), &v)| SpatialSample::new(x, y, v)).collect();
    Dataset::new(samples, DatasetMeta::default()).unwrap()
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::btree_set((0i32..40, 0i32..40), 60..400).prop_flat_map(|cells| {
        let cells: Vec<(i32, i32)> = cells.into_iter().collect();
        let n = cells.len();
        prop::collection::vec(prop_oneof![(-5.0f64..5.0), Just(1.0)], n).prop_map(move |v| dataset(&cells, &v))
    })
}

fn arb_config() -> impl Strategy<Value = SamplingConfig> {
    (0.05f64..0.4, any::<u64>(), 1usize..9, 1usize..9).prop_map(|(fraction, seed, strata_count, cluster_count)| {
        SamplingConfig {
            fraction,
            seed,
            strata_count,
            cluster_count,
        }
    })
}

fn arb_thresholds() -> impl Strategy<Value = SdeThresholds> {
    (0u32..5, 0u32..5)
        .prop_filter("not both zero", |&(a, b)| a + b > 0)
        .prop_map(|(a, b)| SdeThresholds::new(a, b).unwrap())
}

fn assert_partition(plan: &SamplingPlan, n: usize) {
    let mut all = plan.train_indices();
    all.extend_from_slice(plan.test_indices());
    all.sort_unstable();
    assert_eq!(all, (0..n).collect::<Vec<_>>());
}

/// Groups the strategy would form, in group-id order.
fn groups(d: &Dataset, method: Method, cfg: &SamplingConfig) -> Vec<Vec<usize>> {
    match method {
        Method::Stratified | Method::SSde => make_strata(&d.values(), cfg.strata_count).unwrap().members,
        Method::KMeans | Method::KSde => kmeans_1d(&d.values(), cfg.cluster_count, cfg.seed).unwrap().members(),
        _ => vec![(0..d.len()).collect()],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plans_partition_and_hit_exact_size(d in arb_dataset(), cfg in arb_config(), t in arb_thresholds()) {
        for method in [Method::Random, Method::Stratified, Method::KMeans, Method::Sde, Method::SSde, Method::KSde] {
            let plan = sampling::sample(&d, method, &cfg, t).unwrap();
            prop_assert_eq!(plan.train().len(), cfg.train_size(d.len()), "{}", method);
            assert_partition(&plan, d.len());
            prop_assert_eq!(&plan, &sampling::sample(&d, method, &cfg, t).unwrap());
        }
    }

    #[test]
    fn group_phase_takes_floor_quota(d in arb_dataset(), cfg in arb_config(), t in arb_thresholds()) {
        for method in [Method::Stratified, Method::KMeans, Method::SSde, Method::KSde] {
            let gs = groups(&d, method, &cfg);
            let plan = sampling::sample(&d, method, &cfg, t).unwrap();
            let phase: usize = gs.iter().map(|g| cfg.group_quota(g.len())).sum();
            // Group-phase picks come first, group by group.
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for p in &plan.train()[..phase] {
                *counts.entry(p.group.unwrap()).or_default() += 1;
                prop_assert!(gs[p.group.unwrap()].contains(&p.index));
            }
            for (g, members) in gs.iter().enumerate() {
                prop_assert_eq!(counts.get(&g).copied().unwrap_or(0), cfg.group_quota(members.len()));
            }
            for p in &plan.train()[phase..] {
                prop_assert_eq!(p.provenance, Provenance::Backfill);
            }
            if !method.uses_sde() {
                prop_assert!(plan.train()[..phase].iter().all(|p| p.provenance == Provenance::PrimaryPick));
            }
        }
    }

    #[test]
    fn kmeans_inertia_never_increases(values in prop::collection::vec(-100.0f64..100.0, 2..300), k in 1usize..10, seed in any::<u64>()) {
        prop_assume!(k <= values.len());
        let km = kmeans_1d(&values, k, seed).unwrap();
        for w in km.inertia_history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "{:?}", km.inertia_history);
        }
        let j: f64 = values.iter().zip(&km.labels).map(|(v, &l)| (v - km.centroids[l]).powi(2)).sum();
        prop_assert!((j - km.inertia).abs() <= 1e-9 * j.max(1.0));
        prop_assert!(km.centroids.windows(2).all(|c| c[0] <= c[1]));
        prop_assert!(km.labels.iter().all(|&l| l < km.centroids.len()));
    }

    #[test]
    fn strata_partition_by_rank(values in prop::collection::vec(prop_oneof![(-10.0f64..10.0), Just(0.0)], 1..300), s in 1usize..12) {
        prop_assume!(s <= values.len());
        let spec = make_strata(&values, s).unwrap();
        let sizes: Vec<usize> = spec.members.iter().map(Vec::len).collect();
        let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), values.len());
        // Every value in stratum k is ≤ every value in stratum k+1.
        for pair in spec.members.windows(2) {
            let max_a = pair[0].iter().map(|&i| values[i]).fold(f64::MIN, f64::max);
            let min_b = pair[1].iter().map(|&i| values[i]).fold(f64::MAX, f64::min);
            prop_assert!(max_a <= min_b);
        }
        prop_assert!(spec.boundaries.windows(2).all(|b| b[0] <= b[1]));
    }
}

#[test]
fn random_sampling_is_uniform_over_seeds() {
    let n = 3000;
    let cells: Vec<(i32, i32)> = (0..n as i32).map(|i| (i % 60, i / 60)).collect();
    let values: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let d = dataset(&cells, &values);
    let seeds = 1000;
    let mut hits = vec![0u32; n];
    for seed in 0..seeds {
        let plan = random_sampling(&d, &SamplingConfig::default().with_seed(seed)).unwrap();
        for i in plan.train_indices() {
            hits[i] += 1;
        }
    }
    let freq: Vec<f64> = hits.iter().map(|&h| f64::from(h) / seeds as f64).collect();
    let mean = freq.iter().sum::<f64>() / n as f64;
    assert!((mean - 0.1).abs() < 1e-12);
    // Each count is Binomial(1000, 0.1): sd 0.0095 in frequency.
    let sd = (freq.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let binomial_sd = (0.1f64 * 0.9 / seeds as f64).sqrt();
    assert!((sd / binomial_sd - 1.0).abs() < 0.1, "spread {sd} vs {binomial_sd}");
    let within = freq.iter().filter(|f| (*f - 0.1).abs() <= 0.02).count();
    assert!(within as f64 >= 0.95 * n as f64, "{within} of {n} within 0.1 ± 0.02");
    assert!(freq.iter().all(|f| (f - 0.1).abs() <= 0.05));
}
