//! Neighbor-embedding reduction in the style of UMAP.
//!
//! Exact Euclidean kNN graph, smooth-kNN bandwidths, fuzzy union, PCA
//! initialization and single-threaded SGD with negative sampling. A fixed
//! seed reproduces the layout exactly within one build.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduce::{PcaModel, ReducedMatrix, ReductionMethod, UmapParams};

const NEGATIVE_SAMPLES: usize = 5;
const SPREAD: f64 = 1.0;
const INIT_SCALE: f64 = 10.0;
const GRAD_CLIP: f64 = 4.0;
const BANDWIDTH_ITERS: usize = 64;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `k` nearest other points of each row as (index, distance), ascending,
/// ties by index.
fn knn(vectors: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<(usize, f64)> = vectors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, v)| (j, sq_dist(&vectors[i], v).sqrt()))
                .collect();
            d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            d.truncate(k);
            d
        })
        .collect()
}

/// Membership strengths of each row's neighbors: the nearest neighbor gets
/// 1 and the total is log2(k).
fn smooth_knn(neighbors: &[(usize, f64)]) -> Vec<f64> {
    let k = neighbors.len();
    if k == 0 {
        return Vec::new();
    }
    let target = (k as f64).log2();
    let rho = neighbors.iter().map(|n| n.1).find(|&d| d > 0.0).unwrap_or(0.0);
    let total = |sigma: f64| -> f64 {
        neighbors
            .iter()
            .map(|&(_, d)| (-(d - rho).max(0.0) / sigma).exp())
            .sum()
    };
    let (mut lo, mut hi, mut sigma) = (0.0, f64::INFINITY, 1.0);
    for _ in 0..BANDWIDTH_ITERS {
        let t = total(sigma);
        if (t - target).abs() < 1e-5 {
            break;
        }
        if t > target {
            hi = sigma;
            sigma = (lo + hi) / 2.0;
        } else {
            lo = sigma;
            sigma = if hi.is_finite() { (lo + hi) / 2.0 } else { sigma * 2.0 };
        }
    }
    let sigma = sigma.max(1e-3 * mean(neighbors.iter().map(|n| n.1)).max(1e-12));
    neighbors
        .iter()
        .map(|&(_, d)| (-(d - rho).max(0.0) / sigma).exp())
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Fits the curve 1 / (1 + a d^(2b)) to the target membership for
/// `min_dist` by least squares over a grid, refined by pattern search.
pub fn fit_ab(min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (1..=300).map(|i| i as f64 * 3.0 * SPREAD / 300.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / SPREAD).exp() })
        .collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let f = 1.0 / (1.0 + a * x.powf(2.0 * b));
                (f - y) * (f - y)
            })
            .sum()
    };
    let (mut a, mut b, mut best) = (1.0, 1.0, f64::INFINITY);
    for i in 1..=60 {
        for j in 1..=60 {
            let (ca, cb) = (i as f64 * 0.05, j as f64 * 0.05);
            let e = sse(ca, cb);
            if e < best {
                (a, b, best) = (ca, cb, e);
            }
        }
    }
    let mut step = 0.025;
    while step > 1e-7 {
        let mut moved = false;
        for (da, db) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let (ca, cb) = (a + da, b + db);
            if ca > 0.0 && cb > 0.0 {
                let e = sse(ca, cb);
                if e < best {
                    (a, b, best) = (ca, cb, e);
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (a, b)
}

pub fn reduce(words: &[String], vectors: &[Vec<f64>], params: &UmapParams) -> Result<ReducedMatrix> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::EmptyInput("no vectors to reduce".into()));
    }
    if words.len() != n {
        return Err(Error::Validation(format!("{} words for {n} vectors", words.len())));
    }
    if params.n_neighbors < 2 {
        return Err(Error::Config("n_neighbors must be at least 2".into()));
    }
    if !(params.min_dist >= 0.0 && params.min_dist <= SPREAD) {
        return Err(Error::Config(format!("min_dist {} outside [0, {SPREAD}]", params.min_dist)));
    }
    let cap = n.min(vectors[0].len());
    let d = params.d.min(cap);
    if d == 0 {
        return Err(Error::Config("target dimension must be at least 1".into()));
    }

    let pca = PcaModel::fit(vectors, d)?;
    let mut coords: Vec<Vec<f64>> = vectors.iter().map(|v| pca.transform(v)).collect();
    let max_abs = coords.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if max_abs > 0.0 {
        coords.iter_mut().flatten().for_each(|x| *x *= INIT_SCALE / max_abs);
    }

    if n > 2 {
        let k = params.n_neighbors.min(n - 1);
        let graph = knn(vectors, k);
        let mut weights = std::collections::BTreeMap::<(usize, usize), f64>::new();
        for (i, nb) in graph.iter().enumerate() {
            for (&(j, _), w) in nb.iter().zip(smooth_knn(nb)) {
                weights.insert((i, j), w);
            }
        }
        // fuzzy union: w_ij + w_ji - w_ij * w_ji, one undirected edge each
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for (&(i, j), &w) in &weights {
            let back = weights.get(&(j, i)).copied().unwrap_or(0.0);
            if back > 0.0 && j < i {
                continue;
            }
            let u = w + back - w * back;
            if u > 0.0 {
                edges.push((i, j, u));
            }
        }
        optimize(&mut coords, &edges, params);
    }

    Ok(ReducedMatrix {
        words: words.to_vec(),
        coords,
        method: ReductionMethod::Umap,
        d,
        lowered_from: (d < params.d).then_some(params.d),
    })
}

fn optimize(coords: &mut [Vec<f64>], edges: &[(usize, usize, f64)], params: &UmapParams) {
    let n = coords.len();
    let (a, b) = fit_ab(params.min_dist);
    let epochs = params.epochs.max(1);
    let max_w = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let period: Vec<f64> = edges.iter().map(|e| max_w / e.2).collect();
    let mut next = period.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let d = coords[0].len();
    let mut grad = vec![0.0; d];

    for epoch in 0..epochs {
        let alpha = 1.0 - epoch as f64 / epochs as f64;
        let now = (epoch + 1) as f64;
        for (e, &(i, j, _)) in edges.iter().enumerate() {
            if next[e] > now {
                continue;
            }
            next[e] += period[e];

            let dist2 = sq_dist(&coords[i], &coords[j]);
            let coef = if dist2 > 0.0 {
                -2.0 * a * b * dist2.powf(b - 1.0) / (1.0 + a * dist2.powf(b))
            } else {
                0.0
            };
            for t in 0..d {
                grad[t] = (coef * (coords[i][t] - coords[j][t])).clamp(-GRAD_CLIP, GRAD_CLIP) * alpha;
            }
            for t in 0..d {
                coords[i][t] += grad[t];
                coords[j][t] -= grad[t];
            }

            for _ in 0..NEGATIVE_SAMPLES {
                let m = rng.random_range(0..n);
                if m == i {
                    continue;
                }
                let dist2 = sq_dist(&coords[i], &coords[m]);
                let coef = if dist2 > 0.0 {
                    2.0 * b / ((0.001 + dist2) * (1.0 + a * dist2.powf(b)))
                } else {
                    0.0
                };
                for (g, (x, y)) in grad.iter_mut().zip(coords[i].iter().zip(&coords[m])) {
                    *g = if coef > 0.0 { (coef * (x - y)).clamp(-GRAD_CLIP, GRAD_CLIP) } else { GRAD_CLIP };
                }
                for (x, g) in coords[i].iter_mut().zip(&grad) {
                    *x += g * alpha;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmeans::{kmeans, KMeansConfig};
    use rand_distr::{Distribution, StandardNormal};

    fn blobs() -> (Vec<String>, Vec<Vec<f64>>, Vec<usize>) {
        let centers = [[0.0; 8], [20.0; 8], {
            let mut c = [0.0; 8];
            c[0] = -20.0;
            c[5] = 20.0;
            c
        }];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut vecs = Vec::new();
        let mut truth = Vec::new();
        for (b, c) in centers.iter().enumerate() {
            for _ in 0..40 {
                vecs.push(c.iter().map(|x| x + { let z: f64 = StandardNormal.sample(&mut rng); z }).collect());
                truth.push(b);
            }
        }
        let words = (0..vecs.len()).map(|i| format!("w{i}")).collect();
        (words, vecs, truth)
    }

    #[test]
    fn ab_for_default_min_dist() {
        let (a, b) = fit_ab(0.1);
        assert!((a - 1.577).abs() < 0.05, "a = {a}");
        assert!((b - 0.895).abs() < 0.02, "b = {b}");
    }

    #[test]
    fn blobs_are_recovered() {
        let (words, vecs, truth) = blobs();
        let params = UmapParams { d: 2, ..UmapParams::default() };
        let r = reduce(&words, &vecs, &params).unwrap();
        let c = kmeans(&r.coords, &KMeansConfig { k: 3, ..Default::default() }).unwrap();
        // same partition up to relabeling
        for i in 0..truth.len() {
            for j in 0..truth.len() {
                assert_eq!(truth[i] == truth[j], c.assignments[i] == c.assignments[j]);
            }
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let (words, vecs, _) = blobs();
        let params = UmapParams { d: 3, epochs: 50, ..UmapParams::default() };
        assert_eq!(reduce(&words, &vecs, &params).unwrap(), reduce(&words, &vecs, &params).unwrap());
    }
}
