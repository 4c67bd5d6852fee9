//! Cross-lingual KNN transfer.
//!
//! Each target word takes the plurality class of its `k` nearest labeled
//! source neighbors under cosine similarity. Confidence is the product of
//! the winner's vote share and the mean similarity of the neighbors that
//! voted for it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class::NounClass;
use crate::embedding::{LabeledIndex, WordEmbedding};
use crate::error::{Error, Result};
use crate::prediction::{Method, Prediction};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_THRESHOLD: f64 = 0.60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferConfig {
    pub k: usize,
    pub threshold: f64,
    /// Skip a source record whose word equals the target word. Only useful
    /// for same-language experiments.
    pub exclude_self: bool,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            threshold: DEFAULT_THRESHOLD,
            exclude_self: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborVote {
    pub word: String,
    pub class: NounClass,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferPrediction {
    pub word: String,
    #[serde(rename = "class")]
    pub predicted_class: NounClass,
    pub confidence: f64,
    pub vote_conf: f64,
    pub sim_conf: f64,
    pub neighbors: Vec<NeighborVote>,
    pub method: Method,
}

impl TransferPrediction {
    pub fn to_prediction(&self) -> Prediction {
        Prediction::new(self.word.clone(), self.predicted_class, self.confidence, Method::Transfer)
    }
}

/// Classifies one target word.
pub fn classify_word(target: &WordEmbedding, source: &LabeledIndex, config: &TransferConfig) -> Result<TransferPrediction> {
    let exclude = config.exclude_self.then_some(target.word.as_str());
    let found = source.store().nearest_excluding(&target.vector, config.k, exclude)?;
    if found.hits.is_empty() {
        return Err(Error::EmptyInput("no eligible source neighbors".into()));
    }

    let neighbors: Vec<NeighborVote> = found
        .hits
        .iter()
        .map(|h| NeighborVote {
            word: source.store().get(h.index).word.clone(),
            class: source.label(h.index),
            similarity: h.similarity,
        })
        .collect();

    // class -> (votes, summed similarity), accumulated in neighbor order
    let mut tally: BTreeMap<NounClass, (usize, f64)> = BTreeMap::new();
    for n in &neighbors {
        let e = tally.entry(n.class).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += n.similarity;
    }
    // BTreeMap iterates ascending class id, so a strict `>` keeps the lower
    // id on a full tie.
    let mut winner = None::<(NounClass, usize, f64)>;
    for (&class, &(votes, sum)) in &tally {
        let better = match winner {
            None => true,
            Some((_, wv, ws)) => votes > wv || (votes == wv && sum > ws),
        };
        if better {
            winner = Some((class, votes, sum));
        }
    }
    let (class, votes, sum) = winner.expect("at least one neighbor");

    let vote_conf = votes as f64 / neighbors.len() as f64;
    let sim_conf = (sum / votes as f64).clamp(0.0, 1.0);
    Ok(TransferPrediction {
        word: target.word.clone(),
        predicted_class: class,
        confidence: vote_conf * sim_conf,
        vote_conf,
        sim_conf,
        neighbors,
        method: Method::Transfer,
    })
}

/// Result of classifying a whole target collection.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRun {
    /// Predictions with confidence at or above the threshold, in input order.
    pub retained: Vec<TransferPrediction>,
    /// Every successful prediction before thresholding, in input order.
    pub all: Vec<TransferPrediction>,
    /// Targets skipped because their vector was degenerate.
    pub skipped: Vec<String>,
    pub attempted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSummary {
    pub attempted: usize,
    pub classified: usize,
    pub skipped: usize,
    pub retained: usize,
    pub threshold: f64,
    pub k: usize,
    pub mean_confidence_all: Option<f64>,
    pub mean_confidence_retained: Option<f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

impl TransferRun {
    pub fn summary(&self, config: &TransferConfig) -> TransferSummary {
        TransferSummary {
            attempted: self.attempted,
            classified: self.all.len(),
            skipped: self.skipped.len(),
            retained: self.retained.len(),
            threshold: config.threshold,
            k: config.k,
            mean_confidence_all: mean(self.all.iter().map(|p| p.confidence)),
            mean_confidence_retained: mean(self.retained.iter().map(|p| p.confidence)),
        }
    }

    pub fn predictions(&self) -> Vec<Prediction> {
        self.retained.iter().map(TransferPrediction::to_prediction).collect()
    }
}

/// Classifies every target and keeps those with confidence at or above the
/// configured threshold. Runs in parallel; output order follows input order.
pub fn classify_corpus(targets: &[WordEmbedding], source: &LabeledIndex, config: &TransferConfig) -> Result<TransferRun> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::Config(format!("threshold {} outside [0, 1]", config.threshold)));
    }
    let outcomes: Vec<Result<TransferPrediction>> =
        targets.par_iter().map(|t| classify_word(t, source, config)).collect();

    let mut all = Vec::with_capacity(targets.len());
    let mut skipped = Vec::new();
    for (t, outcome) in targets.iter().zip(outcomes) {
        match outcome {
            Ok(p) => all.push(p),
            Err(Error::DegenerateVector) => skipped.push(t.word.clone()),
            Err(e) => return Err(e),
        }
    }
    let retained = all.iter().filter(|p| p.confidence >= config.threshold).cloned().collect();
    Ok(TransferRun {
        retained,
        all,
        skipped,
        attempted: targets.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddingStore;

    fn index(rows: &[(&str, &[f64], u16)]) -> LabeledIndex {
        let dim = rows[0].1.len();
        let recs = rows
            .iter()
            .map(|(w, v, c)| WordEmbedding::new(w, "src", v.to_vec()).labeled(NounClass::Class(*c)))
            .collect();
        LabeledIndex::new(EmbeddingStore::from_records("src", dim, recs).unwrap(), None).unwrap()
    }

    /// Unit vector at angle `theta` in the plane, embedded in 2-D.
    fn at(theta: f64) -> Vec<f64> {
        vec![theta.cos(), theta.sin()]
    }

    #[test]
    fn unanimous_identity() {
        let rows: Vec<(String, Vec<f64>, u16)> = (0..6)
            .map(|i| (format!("wa{i}"), at(0.01 * i as f64), 2))
            .chain(std::iter::once(("ma".to_string(), at(3.0), 6)))
            .collect();
        let borrowed: Vec<(&str, &[f64], u16)> = rows.iter().map(|(w, v, c)| (w.as_str(), v.as_slice(), *c)).collect();
        let idx = index(&borrowed);
        let target = WordEmbedding::new("wa0", "tgt", at(0.0));
        let p = classify_word(&target, &idx, &TransferConfig::default()).unwrap();
        assert_eq!(p.predicted_class, NounClass::Class(2));
        assert_eq!(p.vote_conf, 1.0);
        assert_eq!(p.neighbors[0].word, "wa0");
        assert_eq!(p.neighbors[0].similarity, 1.0);
    }

    #[test]
    fn split_vote_arithmetic() {
        // Target on the x axis; neighbor similarities are the cosines.
        let sims = [0.9_f64, 0.8, 0.7, 0.6, 0.5];
        let classes = [6u16, 6, 6, 7, 9];
        let rows: Vec<(String, Vec<f64>, u16)> = sims
            .iter()
            .zip(classes)
            .enumerate()
            .map(|(i, (&s, c))| (format!("w{i}"), at(s.acos()), c))
            .collect();
        let borrowed: Vec<(&str, &[f64], u16)> = rows.iter().map(|(w, v, c)| (w.as_str(), v.as_slice(), *c)).collect();
        let idx = index(&borrowed);
        let p = classify_word(&WordEmbedding::new("t", "tgt", vec![1.0, 0.0]), &idx, &TransferConfig::default()).unwrap();
        assert_eq!(p.predicted_class, NounClass::Class(6));
        assert!((p.vote_conf - 0.6).abs() < 1e-12);
        assert!((p.sim_conf - 0.8).abs() < 1e-12);
        assert!((p.confidence - 0.48).abs() < 1e-12);
        assert_eq!(p.confidence, p.vote_conf * p.sim_conf);
    }

    #[test]
    fn vote_tie_prefers_similarity_then_lower_class() {
        let rows: Vec<(String, Vec<f64>, u16)> = vec![
            ("a".into(), at(0.1), 9),
            ("b".into(), at(0.2), 7),
            ("c".into(), at(0.3), 7),
            ("d".into(), at(0.4), 9),
        ];
        let borrowed: Vec<(&str, &[f64], u16)> = rows.iter().map(|(w, v, c)| (w.as_str(), v.as_slice(), *c)).collect();
        let idx = index(&borrowed);
        let cfg = TransferConfig { k: 4, ..Default::default() };
        let p = classify_word(&WordEmbedding::new("t", "tgt", at(0.0)), &idx, &cfg).unwrap();
        // two votes each; class 7's summed similarity 1.935 beats class 9's 1.916
        assert_eq!(p.predicted_class, NounClass::Class(7));

        let rows: Vec<(String, Vec<f64>, u16)> = vec![("a".into(), at(0.1), 9), ("b".into(), at(-0.1), 7)];
        let borrowed: Vec<(&str, &[f64], u16)> = rows.iter().map(|(w, v, c)| (w.as_str(), v.as_slice(), *c)).collect();
        let idx = index(&borrowed);
        let cfg = TransferConfig { k: 2, ..Default::default() };
        let p = classify_word(&WordEmbedding::new("t", "tgt", at(0.0)), &idx, &cfg).unwrap();
        assert_eq!(p.predicted_class, NounClass::Class(7));
    }

    #[test]
    fn negative_similarity_clamps_to_zero() {
        let idx = index(&[("far", &[-1.0, 0.0], 3)]);
        let cfg = TransferConfig { k: 1, ..Default::default() };
        let p = classify_word(&WordEmbedding::new("t", "tgt", vec![1.0, 0.0]), &idx, &cfg).unwrap();
        assert_eq!(p.sim_conf, 0.0);
        assert_eq!(p.confidence, 0.0);
    }

    #[test]
    fn threshold_filter_and_degenerate_skip() {
        let idx = index(&[("a", &[1.0, 0.0], 1), ("b", &[0.0, 1.0], 2)]);
        let targets = vec![
            WordEmbedding::new("near", "tgt", at(0.05)),
            WordEmbedding::new("diag", "tgt", at(0.7)),
            WordEmbedding::new("zero", "tgt", vec![0.0, 0.0]),
        ];
        let cfg = TransferConfig { k: 1, threshold: 0.9, ..Default::default() };
        let run = classify_corpus(&targets, &idx, &cfg).unwrap();
        assert_eq!(run.attempted, 3);
        assert_eq!(run.skipped, vec!["zero".to_string()]);
        assert_eq!(run.all.len(), 2);
        assert_eq!(run.retained.len(), 1);
        assert_eq!(run.retained[0].word, "near");

        let cfg = TransferConfig { k: 1, threshold: 0.0, ..Default::default() };
        let run = classify_corpus(&targets, &idx, &cfg).unwrap();
        assert_eq!(run.retained.len(), 2);
        assert!(classify_corpus(&[], &idx, &cfg).unwrap().retained.is_empty());
    }

    #[test]
    fn exclude_self_skips_identical_word() {
        let idx = index(&[("watu", &[1.0, 0.0], 2), ("mtu", &[0.9, 0.1], 1)]);
        let cfg = TransferConfig { k: 1, exclude_self: true, ..Default::default() };
        let p = classify_word(&WordEmbedding::new("watu", "src", vec![1.0, 0.0]), &idx, &cfg).unwrap();
        assert_eq!(p.neighbors[0].word, "mtu");
    }
}
