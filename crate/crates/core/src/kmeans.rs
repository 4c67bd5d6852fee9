//! Seeded K-means: k-means++ seeding followed by Lloyd iterations.
//!
//! The generator is ChaCha8 seeded with `seed_from_u64`, so a given seed
//! reproduces the same clustering on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 12;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;
/// Name of the generator recorded in artifact metadata.
pub const RNG_NAME: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            seed: DEFAULT_SEED,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster id of each input row.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Number of centroid updates performed.
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
    /// Inertia after each assignment step, starting with the seeding.
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn inertia(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| sq_dist(p, &centroids[c]))
        .sum()
}

/// Nearest centroid; equal distances go to the lower id.
fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.par_iter().map(|p| nearest_centroid(p, centroids)).collect()
}

/// Draws an index with probability proportional to `weights`.
fn weighted_pick(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = Some(i);
        if acc > target {
            return Some(i);
        }
    }
    last
}

/// Greedy k-means++ seeding: each new center is the best (lowest potential)
/// of `2 + ln k` candidates drawn proportionally to squared distance.
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let first = rng.random_range(0..n);
    let mut chosen = vec![first];
    let mut closest: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();

    while chosen.len() < k {
        let mut best: Option<(usize, f64, Vec<f64>)> = None;
        for _ in 0..trials {
            let Some(cand) = weighted_pick(&closest, rng) else { break };
            let updated: Vec<f64> = points
                .par_iter()
                .zip(&closest)
                .map(|(p, &c)| c.min(sq_dist(p, &points[cand])))
                .collect();
            let potential: f64 = updated.iter().sum();
            if best.as_ref().is_none_or(|(_, b, _)| potential < *b) {
                best = Some((cand, potential, updated));
            }
        }
        match best {
            Some((cand, _, updated)) => {
                chosen.push(cand);
                closest = updated;
            }
            None => {
                // Every remaining point coincides with a center.
                let next = (0..n).find(|i| !chosen.contains(i)).expect("n >= k");
                chosen.push(next);
            }
        }
    }
    chosen.iter().map(|&i| points[i].clone()).collect()
}

/// Means of the assigned points. An empty cluster seizes the point
/// farthest from its current centroid (taken from a cluster with more than
/// one member).
fn update_centroids(points: &[Vec<f64>], assignments: &mut [usize], centroids: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = centroids.len();
    let dim = centroids[0].len();
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }
    let mut anchors = centroids.to_vec();
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut far = None::<(usize, f64)>;
        for (i, p) in points.iter().enumerate() {
            let a = assignments[i];
            if counts[a] <= 1 {
                continue;
            }
            let d = sq_dist(p, &anchors[a]);
            if far.is_none_or(|(_, fd)| d > fd) {
                far = Some((i, d));
            }
        }
        if let Some((i, _)) = far {
            counts[assignments[i]] -= 1;
            assignments[i] = empty;
            counts[empty] = 1;
            anchors[empty] = points[i].clone();
        }
    }

    let mut sums = vec![vec![0.0; dim]; k];
    for (p, &a) in points.iter().zip(assignments.iter()) {
        for (s, x) in sums[a].iter_mut().zip(p) {
            *s += x;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(anchors)
        .map(|((s, c), anchor)| {
            if c == 0 {
                anchor
            } else {
                s.into_iter().map(|x| x / c as f64).collect()
            }
        })
        .collect()
}

/// Partitions `points` into `config.k` clusters.
pub fn kmeans(points: &[Vec<f64>], config: &KMeansConfig) -> Result<Clustering> {
    let n = points.len();
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if n < config.k {
        return Err(Error::TooFewPoints {
            points: n,
            clusters: config.k,
        });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
            context: "k-means input".into(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut centroids = seed_centroids(points, config.k, &mut rng);
    let mut assignments = assign(points, &centroids);
    let mut history = vec![inertia(points, &assignments, &centroids)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iter {
        let updated = update_centroids(points, &mut assignments, &centroids);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        assignments = assign(points, &centroids);
        history.push(inertia(points, &assignments, &centroids));
        iterations += 1;
        if shift < config.tol {
            converged = true;
            break;
        }
    }

    Ok(Clustering {
        inertia: *history.last().expect("non-empty history"),
        assignments,
        centroids,
        iterations,
        converged,
        seed: config.seed,
        inertia_history: history,
    })
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// Member row indices of each cluster, in row order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn recompute_inertia(&self, points: &[Vec<f64>]) -> f64 {
        inertia(points, &self.assignments, &self.centroids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_equals_n_gives_zero_inertia() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 5.0], vec![-3.0, 2.0], vec![4.0, 4.0]];
        let c = kmeans(&pts, &KMeansConfig { k: 4, ..Default::default() }).unwrap();
        assert_eq!(c.inertia, 0.0);
        let mut seen = c.assignments.clone();
        seen.sort();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn two_planted_pairs() {
        // pairs separated by 2 and 4; centroid at each midpoint
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![100.0, 0.0], vec![100.0, 4.0]];
        let c = kmeans(&pts, &KMeansConfig { k: 2, ..Default::default() }).unwrap();
        assert_eq!(c.assignments[0], c.assignments[1]);
        assert_eq!(c.assignments[2], c.assignments[3]);
        assert_ne!(c.assignments[0], c.assignments[2]);
        // 2 * 1^2 + 2 * 2^2
        assert!((c.inertia - 10.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let err = kmeans(&[vec![1.0]], &KMeansConfig { k: 2, ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("too few points"));
    }

    #[test]
    fn duplicate_points_still_seed_k_centers() {
        let pts = vec![vec![1.0, 1.0]; 5];
        let c = kmeans(&pts, &KMeansConfig { k: 3, ..Default::default() }).unwrap();
        assert_eq!(c.k(), 3);
        assert_eq!(c.inertia, 0.0);
    }

    #[test]
    fn empty_cluster_is_repaired() {
        let pts = vec![vec![0.0], vec![1.0], vec![10.0]];
        let mut assignments = vec![0, 0, 0];
        let centroids = vec![vec![0.0], vec![50.0]];
        let updated = update_centroids(&pts, &mut assignments, &centroids);
        assert_eq!(assignments, vec![0, 0, 1]);
        assert_eq!(updated, vec![vec![0.5], vec![10.0]]);
    }
}
