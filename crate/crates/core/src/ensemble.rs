//! Weighted multi-method voting, cross-method agreement and the
//! frequency / random baselines.
//!
//! For each word, `score(c) = Σ_m weight(m) · confidence(m)` over the
//! methods that predicted class `c`. The winning score is divided by the
//! summed weight of every method that predicted the word, which puts it on
//! the [0, 1] scale the minimum-confidence gate is expressed in.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::NounClass;
use crate::error::{Error, Result};
use crate::prediction::{Method, Prediction};

pub const DEFAULT_TRANSFER_WEIGHT: f64 = 1.0;
pub const DEFAULT_CLUSTERING_WEIGHT: f64 = 0.8;
pub const DEFAULT_MIN_CONF: f64 = 0.70;

#[derive(Debug, Clone, PartialEq)]
pub struct Weights(BTreeMap<Method, f64>);

impl Weights {
    pub fn new(weights: impl IntoIterator<Item = (Method, f64)>) -> Result<Self> {
        let map: BTreeMap<Method, f64> = weights.into_iter().collect();
        for (m, w) in &map {
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::Config(format!("weight for {m} must be positive, got {w}")));
            }
        }
        Ok(Self(map))
    }

    /// Builds weights from method names; an unknown name is a
    /// configuration error.
    pub fn from_names<'a>(weights: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let parsed = weights
            .into_iter()
            .map(|(name, w)| name.parse::<Method>().map(|m| (m, w)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }

    pub fn get(&self, method: Method) -> Option<f64> {
        self.0.get(&method).copied()
    }

    pub fn as_map(&self) -> &BTreeMap<Method, f64> {
        &self.0
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|(m, w)| (*m, w * factor)))
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self(BTreeMap::from([
            (Method::Transfer, DEFAULT_TRANSFER_WEIGHT),
            (Method::Clustering, DEFAULT_CLUSTERING_WEIGHT),
        ]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub weights: Weights,
    pub min_conf: f64,
    /// Reject words predicted by only one method.
    pub require_multi: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            weights: Weights::default(),
            min_conf: DEFAULT_MIN_CONF,
            require_multi: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodVote {
    pub class: NounClass,
    pub confidence: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    BelowMinConfidence,
    SingleMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub word: String,
    #[serde(rename = "class")]
    pub final_class: NounClass,
    /// Winning score over the summed weight of participating methods.
    #[serde(rename = "confidence")]
    pub combined_confidence: f64,
    /// Unnormalized winning score.
    pub raw_score: f64,
    pub weight_sum: f64,
    pub per_method: BTreeMap<Method, MethodVote>,
    /// Every participating method chose `final_class`.
    pub agreed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<RejectReason>,
}

impl EnsembleResult {
    pub fn to_prediction(&self, method: Method) -> Prediction {
        Prediction::new(self.word.clone(), self.final_class, self.combined_confidence, method)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnsembleOutput {
    pub accepted: Vec<EnsembleResult>,
    pub rejected: Vec<EnsembleResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub words_scored: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub accepted_agreed: usize,
    pub inputs_per_method: BTreeMap<Method, usize>,
    pub rejected_by_reason: BTreeMap<String, usize>,
    pub accepted_per_class: BTreeMap<NounClass, usize>,
    pub mean_confidence_accepted: Option<f64>,
    pub mean_raw_score_accepted: Option<f64>,
    pub min_conf: f64,
    pub require_multi: bool,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

impl EnsembleOutput {
    pub fn summary(&self, config: &EnsembleConfig) -> EnsembleSummary {
        let mut inputs_per_method = BTreeMap::new();
        let mut rejected_by_reason = BTreeMap::new();
        let mut accepted_per_class = BTreeMap::new();
        for r in self.accepted.iter().chain(&self.rejected) {
            for m in r.per_method.keys() {
                *inputs_per_method.entry(*m).or_insert(0) += 1;
            }
        }
        for r in &self.rejected {
            let key = serde_json::to_value(r.reason)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            *rejected_by_reason.entry(key).or_insert(0) += 1;
        }
        for r in &self.accepted {
            *accepted_per_class.entry(r.final_class).or_insert(0) += 1;
        }
        EnsembleSummary {
            words_scored: self.accepted.len() + self.rejected.len(),
            accepted: self.accepted.len(),
            rejected: self.rejected.len(),
            accepted_agreed: self.accepted.iter().filter(|r| r.agreed).count(),
            inputs_per_method,
            rejected_by_reason,
            accepted_per_class,
            mean_confidence_accepted: mean(self.accepted.iter().map(|r| r.combined_confidence)),
            mean_raw_score_accepted: mean(self.accepted.iter().map(|r| r.raw_score)),
            min_conf: config.min_conf,
            require_multi: config.require_multi,
        }
    }
}

/// Scores every word predicted by at least one method. Predictions with
/// class `unknown` are ignored; a repeated (method, word) keeps the first.
/// Results come out sorted by word.
pub fn vote(predictions: &[Prediction], config: &EnsembleConfig) -> Result<EnsembleOutput> {
    if !(0.0..=1.0).contains(&config.min_conf) {
        return Err(Error::Config(format!("min_conf {} outside [0, 1]", config.min_conf)));
    }
    let mut by_word: BTreeMap<&str, BTreeMap<Method, MethodVote>> = BTreeMap::new();
    for p in predictions {
        let weight = config
            .weights
            .get(p.method)
            .ok_or_else(|| Error::Config(format!("no weight configured for method `{}`", p.method)))?;
        if !p.class.is_known() {
            continue;
        }
        by_word.entry(p.word.as_str()).or_default().entry(p.method).or_insert(MethodVote {
            class: p.class,
            confidence: p.confidence,
            weight,
        });
    }

    let mut out = EnsembleOutput::default();
    for (word, votes) in by_word {
        let mut scores: BTreeMap<NounClass, f64> = BTreeMap::new();
        let mut weight_sum = 0.0;
        for v in votes.values() {
            *scores.entry(v.class).or_insert(0.0) += v.weight * v.confidence;
            weight_sum += v.weight;
        }
        let mut best: Option<(NounClass, f64)> = None;
        for (&class, &score) in &scores {
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((class, score));
            }
        }
        let (final_class, raw_score) = best.expect("at least one vote");
        let combined = raw_score / weight_sum;
        let agreed = votes.values().all(|v| v.class == final_class);
        let reason = if config.require_multi && votes.len() < 2 {
            Some(RejectReason::SingleMethod)
        } else if combined < config.min_conf {
            Some(RejectReason::BelowMinConfidence)
        } else {
            None
        };
        let result = EnsembleResult {
            word: word.to_string(),
            final_class,
            combined_confidence: combined,
            raw_score,
            weight_sum,
            per_method: votes,
            agreed,
            reason,
        };
        if reason.is_some() {
            out.rejected.push(result);
        } else {
            out.accepted.push(result);
        }
    }
    Ok(out)
}

/// Transfer + clustering vote with the given configuration.
pub fn ensemble_vote(transfer: &[Prediction], clustering: &[Prediction], config: &EnsembleConfig) -> Result<EnsembleOutput> {
    let all: Vec<Prediction> = transfer.iter().chain(clustering).cloned().collect();
    vote(&all, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub shared: usize,
    pub matching: usize,
    /// Percentage of shared words on which both methods chose the same class.
    pub rate: f64,
}

/// Percentage of words predicted by both sets that received the same
/// class. `None` when no word is shared. `unknown` predictions do not count.
pub fn agreement_rate(a: &[Prediction], b: &[Prediction]) -> Option<Agreement> {
    let index = |ps: &[Prediction]| {
        let mut m: BTreeMap<String, NounClass> = BTreeMap::new();
        for p in ps.iter().filter(|p| p.class.is_known()) {
            m.entry(p.word.clone()).or_insert(p.class);
        }
        m
    };
    let (a, b) = (index(a), index(b));
    let mut shared = 0;
    let mut matching = 0;
    for (w, ca) in &a {
        if let Some(cb) = b.get(w) {
            shared += 1;
            if ca == cb {
                matching += 1;
            }
        }
    }
    (shared > 0).then(|| Agreement {
        shared,
        matching,
        rate: 100.0 * matching as f64 / shared as f64,
    })
}

/// Assigns the modal class of `distribution` to every target, with the
/// modal share as confidence. Ties go to the lowest class id.
pub fn frequency_baseline(distribution: &BTreeMap<NounClass, usize>, targets: &[String]) -> Result<Vec<Prediction>> {
    let total: usize = distribution.values().sum();
    if total == 0 {
        return Err(Error::EmptyInput("class distribution is empty".into()));
    }
    let mut modal = None::<(NounClass, usize)>;
    for (&c, &n) in distribution {
        if modal.is_none_or(|(_, m)| n > m) {
            modal = Some((c, n));
        }
    }
    let (class, count) = modal.expect("non-empty distribution");
    let conf = count as f64 / total as f64;
    Ok(targets
        .iter()
        .map(|w| Prediction::new(w.clone(), class, conf, Method::Frequency))
        .collect())
}

/// Uniform seeded class draw per target; confidence is 1 / |classes|.
pub fn random_baseline(classes: &BTreeSet<NounClass>, targets: &[String], seed: u64) -> Result<Vec<Prediction>> {
    if classes.is_empty() {
        return Err(Error::EmptyInput("class set is empty".into()));
    }
    let classes: Vec<NounClass> = classes.iter().copied().collect();
    let conf = 1.0 / classes.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(targets
        .iter()
        .map(|w| {
            let c = classes[rng.random_range(0..classes.len())];
            Prediction::new(w.clone(), c, conf, Method::Random)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(word: &str, class: u16, conf: f64) -> Prediction {
        Prediction::new(word, class, conf, Method::Transfer)
    }

    fn c(word: &str, class: u16, conf: f64) -> Prediction {
        Prediction::new(word, class, conf, Method::Clustering)
    }

    #[test]
    fn agreeing_methods_accepted() {
        let out = ensemble_vote(&[t("w", 6, 0.8)], &[c("w", 6, 0.9)], &EnsembleConfig::default()).unwrap();
        let r = &out.accepted[0];
        assert!((r.raw_score - 1.52).abs() < 1e-12);
        assert!((r.combined_confidence - 1.52 / 1.8).abs() < 1e-12);
        assert!(r.agreed);
    }

    #[test]
    fn disagreeing_methods_rejected() {
        let out = ensemble_vote(&[t("w", 6, 0.8)], &[c("w", 7, 0.9)], &EnsembleConfig::default()).unwrap();
        assert!(out.accepted.is_empty());
        let r = &out.rejected[0];
        assert_eq!(r.final_class, NounClass::Class(6));
        assert!((r.combined_confidence - 0.8 / 1.8).abs() < 1e-12);
        assert!(!r.agreed);
        assert_eq!(r.reason, Some(RejectReason::BelowMinConfidence));
    }

    #[test]
    fn single_method_word() {
        let out = ensemble_vote(&[t("w", 2, 0.95)], &[], &EnsembleConfig::default()).unwrap();
        assert!((out.accepted[0].combined_confidence - 0.95).abs() < 1e-12);

        let cfg = EnsembleConfig { require_multi: true, ..Default::default() };
        let out = ensemble_vote(&[t("w", 2, 0.95)], &[], &cfg).unwrap();
        assert_eq!(out.rejected[0].reason, Some(RejectReason::SingleMethod));
    }

    #[test]
    fn score_tie_goes_to_lower_class() {
        let w = Weights::new([(Method::Transfer, 1.0), (Method::Clustering, 1.0)]).unwrap();
        let cfg = EnsembleConfig { weights: w, min_conf: 0.0, ..Default::default() };
        let out = ensemble_vote(&[t("w", 9, 0.5)], &[c("w", 3, 0.5)], &cfg).unwrap();
        assert_eq!(out.accepted[0].final_class, NounClass::Class(3));
    }

    #[test]
    fn unknown_clusters_do_not_vote() {
        let unknown = Prediction::new("w", NounClass::Unknown, 0.99, Method::Clustering);
        let out = ensemble_vote(&[], &[unknown], &EnsembleConfig::default()).unwrap();
        assert!(out.accepted.is_empty() && out.rejected.is_empty());
    }

    #[test]
    fn unknown_weight_name_is_config_error() {
        assert!(matches!(Weights::from_names([("transfer", 1.0), ("bogus", 0.5)]), Err(Error::Config(_))));
        assert!(Weights::from_names([("transfer", 0.0)]).is_err());
        let cfg = EnsembleConfig {
            weights: Weights::from_names([("transfer", 1.0)]).unwrap(),
            ..Default::default()
        };
        assert!(matches!(ensemble_vote(&[], &[c("w", 6, 0.9)], &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn agreement_fixtures() {
        let a = vec![t("x", 1, 0.9), t("y", 2, 0.9), t("z", 3, 0.9)];
        assert_eq!(agreement_rate(&a, &a).unwrap().rate, 100.0);
        assert!(agreement_rate(&a, &[c("q", 1, 0.9)]).is_none());
        let b = vec![c("x", 1, 0.5), c("y", 6, 0.5), c("z", 7, 0.5)];
        let ag = agreement_rate(&a, &b).unwrap();
        assert_eq!((ag.shared, ag.matching), (3, 1));
        assert!((ag.rate - 33.33).abs() < 0.01);
    }

    #[test]
    fn frequency_baseline_modal_class() {
        let dist = BTreeMap::from([(NounClass::Class(6), 50), (NounClass::Class(7), 30), (NounClass::Class(2), 20)]);
        let words = vec!["a".to_string(), "b".to_string()];
        let preds = frequency_baseline(&dist, &words).unwrap();
        assert!(preds.iter().all(|p| p.class == NounClass::Class(6) && p.confidence == 0.5));

        let uniform = BTreeMap::from([(NounClass::Class(9), 5), (NounClass::Class(4), 5)]);
        assert_eq!(frequency_baseline(&uniform, &words).unwrap()[0].class, NounClass::Class(4));
        assert!(frequency_baseline(&BTreeMap::new(), &words).is_err());
    }

    #[test]
    fn random_baseline_degenerate_and_deterministic() {
        let words: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
        let one = BTreeSet::from([NounClass::Class(7)]);
        assert!(random_baseline(&one, &words, 1).unwrap().iter().all(|p| p.class == NounClass::Class(7)));
        let many: BTreeSet<NounClass> = (1..=12).map(NounClass::Class).collect();
        assert_eq!(random_baseline(&many, &words, 9).unwrap(), random_baseline(&many, &words, 9).unwrap());
        assert_ne!(random_baseline(&many, &words, 9).unwrap(), random_baseline(&many, &words, 10).unwrap());
    }
}
