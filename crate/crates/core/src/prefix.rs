//! Cluster prefix profiles, prefix→class mapping and innovation detection.
//!
//! A cluster's dominant prefix is the 1–3 character word-initial string
//! with the highest coverage among its members. The prefix is looked up in
//! a [`PrefixInventory`] to name the cluster's noun class. Highly
//! consistent clusters whose prefix the inventory does not know are
//! reported as innovations.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::class::{ClassUniverse, NounClass};
use crate::error::{Error, Result};
use crate::io::{read_jsonl, write_jsonl, Meta};
use crate::prediction::Method;

pub const MAX_PREFIX_LEN: usize = 3;
pub const DEFAULT_MIN_CONSISTENCY: f64 = 90.0;
pub const DEFAULT_MIN_SIZE: usize = 20;
pub const MAX_EXEMPLARS: usize = 10;

const DEFAULT_INVENTORY: &str = include_str!("../data/default_inventory.jsonl");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryEntry {
    pub prefix: String,
    pub classes: Vec<NounClass>,
    #[serde(default)]
    pub source: String,
}

/// Prefix strings mapped to ordered candidate classes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixInventory {
    entries: BTreeMap<String, InventoryEntry>,
    universe: ClassUniverse,
}

fn char_prefix(word: &str, len: usize) -> Option<&str> {
    match word.char_indices().nth(len) {
        Some((end, _)) => Some(&word[..end]),
        None if word.chars().count() == len => Some(word),
        None => None,
    }
}

impl PrefixInventory {
    pub fn new(entries: impl IntoIterator<Item = InventoryEntry>, universe: ClassUniverse) -> Result<Self> {
        let mut map = BTreeMap::new();
        for e in entries {
            let n = e.prefix.chars().count();
            if !(1..=MAX_PREFIX_LEN).contains(&n) {
                return Err(Error::Validation(format!(
                    "inventory prefix `{}` must be 1-{MAX_PREFIX_LEN} characters",
                    e.prefix
                )));
            }
            if e.classes.is_empty() {
                return Err(Error::Validation(format!("inventory prefix `{}` has no classes", e.prefix)));
            }
            if let Some(bad) = e.classes.iter().find(|c| !universe.contains(**c)) {
                return Err(Error::Validation(format!(
                    "inventory prefix `{}` uses class {bad} outside the class universe",
                    e.prefix
                )));
            }
            if map.contains_key(&e.prefix) {
                return Err(Error::Validation(format!("duplicate inventory prefix `{}`", e.prefix)));
            }
            map.insert(e.prefix.clone(), e);
        }
        Ok(Self { entries: map, universe })
    }

    /// The bundled inventory of common Bantu class prefixes.
    pub fn bantu_default() -> Self {
        let entries = DEFAULT_INVENTORY
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<InventoryEntry>(l).expect("bundled inventory parses"));
        Self::new(entries, ClassUniverse::bantu()).expect("bundled inventory is valid")
    }

    pub fn load(path: impl AsRef<Path>, universe: ClassUniverse) -> Result<Self> {
        let (_, entries): (_, Vec<InventoryEntry>) = read_jsonl(path)?;
        Self::new(entries, universe)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_jsonl(path, &Meta::new("inventory"), self.entries.values())
    }

    pub fn get(&self, prefix: &str) -> Option<&InventoryEntry> {
        self.entries.get(prefix)
    }

    pub fn contains(&self, prefix: &str) -> bool {
        self.entries.contains_key(prefix)
    }

    pub fn entries(&self) -> impl Iterator<Item = &InventoryEntry> {
        self.entries.values()
    }

    pub fn universe(&self) -> &ClassUniverse {
        &self.universe
    }

    /// Longest inventory entry that is a prefix of `s`.
    pub fn longest_match(&self, s: &str) -> Option<&InventoryEntry> {
        (1..=s.chars().count().min(MAX_PREFIX_LEN))
            .rev()
            .find_map(|len| char_prefix(s, len).and_then(|p| self.entries.get(p)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: usize,
    pub size: usize,
    pub dominant_prefix: String,
    /// Percentage of members starting with `dominant_prefix`.
    pub consistency: f64,
    /// `None` until [`map_cluster`] has run.
    pub mapped_class: Option<NounClass>,
    /// Inventory key that produced `mapped_class`.
    #[serde(default)]
    pub matched_prefix: Option<String>,
    #[serde(default)]
    pub ambiguous: bool,
    /// Member counts for every 1–3 character prefix.
    pub prefix_histogram: BTreeMap<String, usize>,
}

impl ClusterProfile {
    pub fn dominant_count(&self) -> usize {
        self.prefix_histogram.get(&self.dominant_prefix).copied().unwrap_or(0)
    }
}

/// Builds a cluster's prefix histogram and picks its dominant prefix:
/// highest coverage wins, then the longer prefix, then lexicographic order.
pub fn profile_cluster<S: AsRef<str>>(cluster_id: usize, members: &[S]) -> Result<ClusterProfile> {
    if members.is_empty() {
        return Err(Error::EmptyInput(format!("cluster {cluster_id} has no members")));
    }
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    for m in members {
        let w = m.as_ref();
        if w.is_empty() {
            return Err(Error::Validation(format!("cluster {cluster_id} contains an empty word")));
        }
        for len in 1..=MAX_PREFIX_LEN {
            if let Some(p) = char_prefix(w, len) {
                *histogram.entry(p.to_string()).or_insert(0) += 1;
            }
        }
    }
    let mut best: Option<(&str, usize, usize)> = None;
    for (p, &count) in &histogram {
        let len = p.chars().count();
        let better = match best {
            None => true,
            // BTreeMap order is lexicographic, so equal (count, len) keeps the first.
            Some((_, bc, bl)) => count > bc || (count == bc && len > bl),
        };
        if better {
            best = Some((p, count, len));
        }
    }
    let (dominant, count, _) = best.expect("non-empty histogram");
    let size = members.len();
    Ok(ClusterProfile {
        cluster_id,
        size,
        dominant_prefix: dominant.to_string(),
        consistency: 100.0 * count as f64 / size as f64,
        mapped_class: None,
        matched_prefix: None,
        ambiguous: false,
        prefix_histogram: histogram,
    })
}

/// Assigns the class of the longest inventory prefix contained in the
/// dominant prefix; the first listed class wins for ambiguous entries.
pub fn map_cluster(profile: &ClusterProfile, inventory: &PrefixInventory) -> ClusterProfile {
    let mut out = profile.clone();
    match inventory.longest_match(&profile.dominant_prefix) {
        Some(entry) => {
            out.mapped_class = Some(entry.classes[0]);
            out.matched_prefix = Some(entry.prefix.clone());
            out.ambiguous = entry.classes.len() > 1;
        }
        None => {
            out.mapped_class = Some(NounClass::Unknown);
            out.matched_prefix = None;
            out.ambiguous = false;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnovationCriteria {
    pub min_consistency: f64,
    pub min_size: usize,
    /// Classes a prefix is expected to map to; a mapped cluster that
    /// disagrees is also reported.
    pub expected: BTreeMap<String, NounClass>,
}

impl Default for InnovationCriteria {
    fn default() -> Self {
        Self {
            min_consistency: DEFAULT_MIN_CONSISTENCY,
            min_size: DEFAULT_MIN_SIZE,
            expected: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationReason {
    NotInInventory,
    UnexpectedClass { expected: NounClass, mapped: NounClass },
}

/// What a mapped cluster amounts to under fixed innovation thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterOutcome {
    Mapped(NounClass),
    Unknown,
    Innovation(InnovationReason),
}

pub fn cluster_outcome(profile: &ClusterProfile, criteria: &InnovationCriteria) -> ClusterOutcome {
    let mapped = profile.mapped_class.unwrap_or(NounClass::Unknown);
    let strong = profile.consistency >= criteria.min_consistency && profile.size >= criteria.min_size;
    let expectation = profile
        .matched_prefix
        .as_deref()
        .and_then(|p| criteria.expected.get(p))
        .or_else(|| criteria.expected.get(&profile.dominant_prefix));
    match (mapped, expectation) {
        (NounClass::Unknown, _) if strong => ClusterOutcome::Innovation(InnovationReason::NotInInventory),
        (NounClass::Unknown, _) => ClusterOutcome::Unknown,
        (class, Some(&expected)) if strong && expected != class => {
            ClusterOutcome::Innovation(InnovationReason::UnexpectedClass { expected, mapped: class })
        }
        (class, _) => ClusterOutcome::Mapped(class),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnovationReport {
    pub cluster_id: usize,
    pub prefix: String,
    pub size: usize,
    pub consistency: f64,
    pub reason: InnovationReason,
    pub exemplars: Vec<String>,
}

/// Clusters that look like productive patterns the inventory lacks.
///
/// `members[cluster_id]` lists each cluster's words; exemplars are the most
/// frequent members carrying the dominant prefix (lexicographic when no
/// frequencies are given).
pub fn detect_innovations<S: AsRef<str>>(
    profiles: &[ClusterProfile],
    members: &[Vec<S>],
    criteria: &InnovationCriteria,
    frequency: Option<&HashMap<String, usize>>,
) -> Vec<InnovationReport> {
    profiles
        .iter()
        .filter_map(|p| match cluster_outcome(p, criteria) {
            ClusterOutcome::Innovation(reason) => Some((p, reason)),
            _ => None,
        })
        .map(|(p, reason)| {
            let mut ex: Vec<&str> = members
                .get(p.cluster_id)
                .map(|m| m.iter().map(AsRef::as_ref).filter(|w| w.starts_with(&p.dominant_prefix)).collect())
                .unwrap_or_default();
            let freq = |w: &str| frequency.and_then(|f| f.get(w)).copied().unwrap_or(0);
            ex.sort_by(|a, b| freq(b).cmp(&freq(a)).then_with(|| a.cmp(b)));
            ex.truncate(MAX_EXEMPLARS);
            InnovationReport {
                cluster_id: p.cluster_id,
                prefix: p.dominant_prefix.clone(),
                size: p.size,
                consistency: p.consistency,
                reason,
                exemplars: ex.into_iter().map(str::to_string).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPrediction {
    pub word: String,
    pub class: NounClass,
    pub confidence: f64,
    pub method: Method,
    pub cluster: usize,
}

impl ClusterPrediction {
    pub fn to_prediction(&self) -> crate::prediction::Prediction {
        crate::prediction::Prediction::new(self.word.clone(), self.class, self.confidence, Method::Clustering)
    }
}

/// Gives every word its cluster's mapped class with confidence
/// consistency / 100. Words in `unknown` clusters keep class `unknown`;
/// the ensemble ignores them.
pub fn cluster_predictions(words: &[String], assignments: &[usize], profiles: &[ClusterProfile]) -> Result<Vec<ClusterPrediction>> {
    if words.len() != assignments.len() {
        return Err(Error::Validation(format!(
            "{} words for {} assignments",
            words.len(),
            assignments.len()
        )));
    }
    let by_id: HashMap<usize, &ClusterProfile> = profiles.iter().map(|p| (p.cluster_id, p)).collect();
    words
        .iter()
        .zip(assignments)
        .map(|(w, &c)| {
            let p = by_id
                .get(&c)
                .ok_or_else(|| Error::Validation(format!("cluster {c} has no profile")))?;
            let class = p
                .mapped_class
                .ok_or_else(|| Error::Validation(format!("cluster {c} has not been mapped")))?;
            Ok(ClusterPrediction {
                word: w.clone(),
                class,
                confidence: p.consistency / 100.0,
                method: Method::Clustering,
                cluster: c,
            })
        })
        .collect()
}

/// Profiles and maps every cluster. `members[id]` holds cluster `id`'s words.
pub fn profile_all<S: AsRef<str>>(members: &[Vec<S>], inventory: &PrefixInventory) -> Result<Vec<ClusterProfile>> {
    members
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(id, m)| profile_cluster(id, m).map(|p| map_cluster(&p, inventory)))
        .collect()
}
