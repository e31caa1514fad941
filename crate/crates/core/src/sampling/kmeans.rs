//! One-dimensional k-means on measurement values.

use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::seeded_rng;

const MAX_ITERATIONS: usize = 100;
const SHIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    /// Cluster id per value, in `0..k`. Clusters are numbered by ascending centroid.
    pub labels: Vec<usize>,
    pub centroids: Vec<f64>,
    /// Lloyd iterations performed.
    pub iterations: usize,
    /// Within-cluster sum of squares `J`.
    pub inertia: f64,
    /// `J` after each Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

impl KMeansResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Member indices of each cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.centroids.len()];
        for (i, &l) in self.labels.iter().enumerate() {
            m[l].push(i);
        }
        m
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn inertia(values: &[f64], labels: &[usize], centroids: &[f64]) -> f64 {
    values.iter().zip(labels).map(|(v, &l)| sq(v - centroids[l])).sum()
}

/// Nearest centroid; ties go to the lowest index.
fn nearest(v: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = sq(v - centroids[0]);
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        let d = sq(v - c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// k-means++ seeding: first centroid uniform, then proportional to squared
/// distance from the nearest chosen centroid.
fn init_plus_plus<R: Rng>(values: &[f64], k: usize, rng: &mut R) -> Vec<f64> {
    let n = values.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(values[rng.random_range(0..n)]);
    let mut d2: Vec<f64> = values.iter().map(|v| sq(v - centroids[0])).collect();
    while centroids.len() < k {
        let pick = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // Every value already coincides with a centroid.
            Err(_) => rng.random_range(0..n),
        };
        let c = values[pick];
        centroids.push(c);
        for (d, v) in d2.iter_mut().zip(values) {
            *d = d.min(sq(v - c));
        }
    }
    centroids
}

/// Lloyd's algorithm with k-means++ initialization.
///
/// Stops when no centroid moves by `1e-9` or more, or after 100 iterations.
/// A cluster left empty is reseeded at the value farthest from its own
/// centroid.
pub fn kmeans_1d(values: &[f64], k: usize, seed: u64) -> Result<KMeansResult> {
    let n = values.len();
    if k == 0 {
        return Err(Error::InvalidConfig("cluster count must be at least 1".into()));
    }
    if n < k {
        return Err(Error::TooFewForGroups { n, groups: k });
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { index });
    }
    let mut rng = seeded_rng(seed);
    let mut centroids = init_plus_plus(values, k, &mut rng);
    let mut labels = vec![0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        for (l, &v) in labels.iter_mut().zip(values) {
            *l = nearest(v, &centroids);
        }
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (&l, &v) in labels.iter().zip(values) {
            sums[l] += v;
            counts[l] += 1;
        }
        let mut shift = 0.0f64;
        for j in 0..k {
            let next = if counts[j] > 0 {
                sums[j] / counts[j] as f64
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq(values[a] - centroids[labels[a]])
                            .total_cmp(&sq(values[b] - centroids[labels[b]]))
                            .then(b.cmp(&a))
                    })
                    .unwrap_or(0);
                values[far]
            };
            shift = shift.max((next - centroids[j]).abs());
            centroids[j] = next;
        }
        history.push(inertia(values, &labels, &centroids));
        if shift < SHIFT_TOLERANCE {
            break;
        }
    }

    // Renumber clusters by ascending centroid.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]).then(a.cmp(&b)));
    let mut rank = vec![0; k];
    for (r, &j) in order.iter().enumerate() {
        rank[j] = r;
    }
    let centroids: Vec<f64> = order.iter().map(|&j| centroids[j]).collect();
    let labels: Vec<usize> = labels.iter().map(|&l| rank[l]).collect();
    let inertia = inertia(values, &labels, &centroids);
    Ok(KMeansResult {
        labels,
        centroids,
        iterations,
        inertia,
        inertia_history: history,
    })
}
