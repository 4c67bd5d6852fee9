//! Dimensionality reduction ahead of clustering.
//!
//! PCA is the default backend. A neighbor-embedding (UMAP) backend is
//! compiled in with the `umap` feature.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DIM: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMethod {
    Pca,
    Umap,
}

impl std::str::FromStr for ReductionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(Self::Pca),
            "umap" => Ok(Self::Umap),
            other => Err(Error::Config(format!("unknown reduction `{other}`"))),
        }
    }
}

/// Reduced coordinates, one row per word.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub words: Vec<String>,
    pub coords: Vec<Vec<f64>>,
    pub method: ReductionMethod,
    pub d: usize,
    /// Requested dimension when it had to be lowered to min(N, D).
    pub lowered_from: Option<usize>,
}

/// Description of a reduction written into artifact metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionInfo {
    pub method: ReductionMethod,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requested_d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_neighbors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_dist: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ReducedMatrix {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn info(&self) -> ReductionInfo {
        ReductionInfo {
            method: self.method,
            d: self.d,
            requested_d: self.lowered_from,
            n_neighbors: None,
            min_dist: None,
            seed: None,
        }
    }
}

/// A fitted principal-component projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `d` orthonormal rows of length D, by descending eigenvalue. Each
    /// row's largest-magnitude coordinate is positive.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component.
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn fit(vectors: &[Vec<f64>], d: usize) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::EmptyInput("PCA input has no rows".into()));
        }
        if d == 0 {
            return Err(Error::Config("target dimension must be at least 1".into()));
        }
        let dim = vectors[0].len();
        if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
                context: "PCA input".into(),
            });
        }
        let d = d.min(dim);

        let mut mean = vec![0.0; dim];
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let centered = DMatrix::from_fn(n, dim, |i, j| vectors[i][j] - mean[j]);
        let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
        let cov = (centered.transpose() * &centered) / denom;
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

        let mut components = Vec::with_capacity(d);
        let mut explained_variance = Vec::with_capacity(d);
        for &col in order.iter().take(d) {
            let mut c: Vec<f64> = eig.eigenvectors.column(col).iter().copied().collect();
            let mut pivot = 0;
            for (i, x) in c.iter().enumerate() {
                if x.abs() > c[pivot].abs() {
                    pivot = i;
                }
            }
            if c[pivot] < 0.0 {
                c.iter_mut().for_each(|x| *x = -*x);
            }
            components.push(c);
            explained_variance.push(eig.eigenvalues[col].max(0.0));
        }
        Ok(Self {
            mean,
            components,
            explained_variance,
        })
    }

    pub fn transform(&self, v: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(v).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }

    pub fn inverse_transform(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &zi) in self.components.iter().zip(z) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += zi * ci;
            }
        }
        out
    }
}

/// Projects mean-centered vectors onto their top `d` principal components.
/// If `d` exceeds min(N, D) it is lowered and the request recorded.
pub fn reduce_pca(words: &[String], vectors: &[Vec<f64>], d: usize) -> Result<ReducedMatrix> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput("no vectors to reduce".into()));
    }
    if words.len() != vectors.len() {
        return Err(Error::Validation(format!(
            "{} words for {} vectors",
            words.len(),
            vectors.len()
        )));
    }
    let cap = vectors.len().min(vectors[0].len());
    let effective = d.min(cap);
    let model = PcaModel::fit(vectors, effective)?;
    Ok(ReducedMatrix {
        words: words.to_vec(),
        coords: vectors.iter().map(|v| model.transform(v)).collect(),
        method: ReductionMethod::Pca,
        d: effective,
        lowered_from: (effective < d).then_some(d),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmapParams {
    pub d: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub seed: u64,
    pub epochs: usize,
}

impl Default for UmapParams {
    fn default() -> Self {
        Self {
            d: DEFAULT_DIM,
            n_neighbors: 15,
            min_dist: 0.1,
            seed: 42,
            epochs: 200,
        }
    }
}

/// Neighbor-embedding reduction. Fails with [`Error::BackendUnavailable`]
/// unless built with the `umap` feature.
pub fn reduce_umap(words: &[String], vectors: &[Vec<f64>], params: &UmapParams) -> Result<ReducedMatrix> {
    #[cfg(feature = "umap")]
    {
        crate::umap::reduce(words, vectors, params)
    }
    #[cfg(not(feature = "umap"))]
    {
        let _ = (words, vectors, params);
        Err(Error::BackendUnavailable("umap".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    #[test]
    fn line_y_equals_x() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, i as f64]).collect();
        let m = PcaModel::fit(&pts, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m.components[0][0] - h).abs() < 1e-9);
        assert!((m.components[0][1] - h).abs() < 1e-9);
    }

    #[test]
    fn subspace_reconstructs_exactly() {
        // Points in the span of two fixed 4-D directions, offset by a mean.
        let u = [1.0, 2.0, 0.0, -1.0];
        let v = [0.0, 1.0, 1.0, 1.0];
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                let (a, b) = ((i as f64 * 0.37).sin() * 3.0, (i as f64 * 0.91).cos());
                (0..4).map(|j| 5.0 + a * u[j] + b * v[j]).collect()
            })
            .collect();
        let m = PcaModel::fit(&pts, 2).unwrap();
        for p in &pts {
            let back = m.inverse_transform(&m.transform(p));
            assert!(dist(p, &back) < 1e-9);
        }
    }

    #[test]
    fn full_rank_preserves_distances_and_orthonormality() {
        let pts: Vec<Vec<f64>> = (0..15)
            .map(|i| (0..5).map(|j| ((i * 7 + j * 3) as f64 * 0.618).sin()).collect())
            .collect();
        let r = reduce_pca(&words(15), &pts, 5).unwrap();
        for i in 0..15 {
            for j in 0..15 {
                assert!((dist(&pts[i], &pts[j]) - dist(&r.coords[i], &r.coords[j])).abs() < 1e-9);
            }
        }
        let m = PcaModel::fit(&pts, 5).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                let d: f64 = m.components[a].iter().zip(&m.components[b]).map(|(x, y)| x * y).sum();
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        assert!(m.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn lowers_dimension_when_too_large() {
        let pts = vec![vec![1.0, 2.0, 3.0], vec![2.0, 0.0, 1.0]];
        let r = reduce_pca(&words(2), &pts, 50).unwrap();
        assert_eq!(r.d, 2);
        assert_eq!(r.lowered_from, Some(50));
        assert!(reduce_pca(&[], &[], 2).is_err());
    }

    #[cfg(not(feature = "umap"))]
    #[test]
    fn umap_unavailable_without_feature() {
        let err = reduce_umap(&words(1), &[vec![1.0]], &UmapParams::default()).unwrap_err();
        assert!(matches!(err, Error::BackendUnavailable(_)));
        assert!(err.to_string().contains("pca"));
    }
}
