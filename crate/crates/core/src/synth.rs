//! Synthetic prefix+stem language pairs with planted ground truth.
//!
//! A source lexicon and a related target lexicon are generated from
//! seeded CV-syllable stems. Target words share a configurable fraction of
//! stems with the source (cognates), and planted innovations rewrite one
//! class's prefix for a fraction of its target words (for example
//! `wa-` → `a-`). Pseudo-embeddings hash character n-grams into a fixed
//! number of dimensions, weighting word-initial grams most, so words with
//! a shared prefix land close together.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::class::{ClassUniverse, NounClass};
use crate::embedding::{write_embeddings, write_paradigms, WordEmbedding};
use crate::error::{Error, Result};
use crate::io::{write_json, Meta};
use crate::prefix::{InventoryEntry, PrefixInventory};

const CONSONANTS: &[&str] = &[
    "b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "y", "z",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
/// Short function words mixed into the generated corpus.
const FUNCTION_WORDS: &[&str] = &["na", "ya", "ni", "kwa", "za"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthClass {
    pub class: NounClass,
    pub prefix: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    pub novel_prefix: String,
    pub replaced_prefix: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub classes: Vec<SynthClass>,
    /// Lexicon size of each language.
    pub stems: usize,
    pub cognate_overlap: f64,
    pub innovations: Vec<PlantSpec>,
    pub seed: u64,
    pub embedding_dim: usize,
    pub noise: f64,
    pub source_lang: String,
    pub target_lang: String,
}

fn class(id: u16, prefix: &str, weight: f64) -> SynthClass {
    SynthClass {
        class: NounClass::Class(id),
        prefix: prefix.to_string(),
        weight,
    }
}

impl SynthSpec {
    /// Twelve equally weighted classes whose prefixes all start with
    /// different letters.
    pub fn twelve_classes() -> Vec<SynthClass> {
        [
            (1, "mu"),
            (2, "wa"),
            (3, "gi"),
            (4, "ri"),
            (5, "ji"),
            (6, "ha"),
            (7, "ki"),
            (8, "vi"),
            (9, "n"),
            (10, "zi"),
            (11, "lu"),
            (14, "bu"),
        ]
        .into_iter()
        .map(|(id, p)| class(id, p, 1.0))
        .collect()
    }

    /// Named presets: `overlap60`, `innovation`, `tiny`.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self {
            classes: Self::twelve_classes(),
            stems: 3000,
            cognate_overlap: 0.6,
            innovations: Vec::new(),
            seed: 42,
            embedding_dim: 64,
            noise: 0.02,
            source_lang: "src".into(),
            target_lang: "tgt".into(),
        };
        match name {
            "overlap60" => Ok(base),
            "innovation" => {
                // Eleven classes plus the a- variant make twelve surface groups.
                // Class 2 holds 10% of the lexicon, half of it rewritten wa- → a-.
                let mut classes = Self::twelve_classes();
                classes.retain(|c| c.class != NounClass::Class(14));
                for c in &mut classes {
                    c.weight = if c.class == NounClass::Class(2) { 10.0 / 9.0 } else { 1.0 };
                }
                Ok(Self {
                    classes,
                    innovations: vec![PlantSpec {
                        novel_prefix: "a".into(),
                        replaced_prefix: "wa".into(),
                        rate: 0.5,
                    }],
                    ..base
                })
            }
            "tiny" => Ok(Self {
                classes: vec![class(2, "wa", 1.0), class(6, "ma", 1.0), class(7, "ki", 1.0), class(14, "bu", 1.0)],
                stems: 120,
                ..base
            }),
            other => Err(Error::Config(format!(
                "unknown preset `{other}` (expected overlap60, innovation or tiny)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.classes.is_empty() {
            return bad("at least one class is required".into());
        }
        let mut prefixes = BTreeSet::new();
        let mut ids = BTreeSet::new();
        for c in &self.classes {
            if c.prefix.is_empty() || !c.prefix.chars().all(|ch| ch.is_alphabetic() || ch == '\'') {
                return bad(format!("invalid prefix `{}`", c.prefix));
            }
            if !prefixes.insert(c.prefix.as_str()) {
                return bad(format!("duplicate prefix `{}`", c.prefix));
            }
            if !c.class.is_known() || !ids.insert(c.class) {
                return bad(format!("class {} must be a unique numbered class", c.class));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return bad(format!("class {} weight must be positive", c.class));
            }
        }
        if self.stems == 0 {
            return bad("stems must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.cognate_overlap) {
            return bad("cognate_overlap must lie in [0, 1]".into());
        }
        for p in &self.innovations {
            if !(0.0..=1.0).contains(&p.rate) {
                return bad(format!("innovation rate {} outside [0, 1]", p.rate));
            }
            if !prefixes.contains(p.replaced_prefix.as_str()) {
                return bad(format!("innovation replaces unknown prefix `{}`", p.replaced_prefix));
            }
            if p.novel_prefix.is_empty() || prefixes.contains(p.novel_prefix.as_str()) {
                return bad(format!("novel prefix `{}` must be new", p.novel_prefix));
            }
        }
        if self.embedding_dim == 0 {
            return bad("embedding_dim must be positive".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad("noise must be non-negative".into());
        }
        Ok(())
    }

    /// Inventory built from the source language's class prefixes.
    pub fn source_inventory(&self) -> PrefixInventory {
        let entries = self.classes.iter().map(|c| InventoryEntry {
            prefix: c.prefix.clone(),
            classes: vec![c.class],
            source: format!("synthetic {}", self.source_lang),
        });
        let ids = self.classes.iter().filter_map(|c| c.class.id());
        PrefixInventory::new(entries, ClassUniverse::new(ids)).expect("validated spec")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedInnovation {
    pub novel_prefix: String,
    pub replaced_prefix: String,
    pub class: NounClass,
    /// Words of `class` before the rewrite.
    pub class_size: usize,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthManifest {
    pub spec: SynthSpec,
    pub source_class_counts: BTreeMap<NounClass, usize>,
    pub target_class_counts: BTreeMap<NounClass, usize>,
    /// Target words whose stem also occurs in the source lexicon.
    pub cognates: Vec<String>,
    pub innovations: Vec<PlantedInnovation>,
}

#[derive(Debug, Clone)]
pub struct SynthPair {
    pub source: Vec<WordEmbedding>,
    pub target: Vec<WordEmbedding>,
    pub gold: BTreeMap<String, NounClass>,
    pub manifest: SynthManifest,
    pub corpus: String,
}

/// Largest-remainder apportionment of `total` over `weights`.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

fn fresh_stem(rng: &mut ChaCha8Rng, taken: &mut BTreeSet<String>) -> String {
    loop {
        let syllables = rng.random_range(2..=3);
        let mut s = String::new();
        for _ in 0..syllables {
            s.push_str(CONSONANTS[rng.random_range(0..CONSONANTS.len())]);
            s.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        }
        if taken.insert(s.clone()) {
            return s;
        }
    }
}

/// FNV-1a, 64 bit.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Weights of the word-initial 1-, 2- and 3-grams.
const ANCHOR_WEIGHTS: [f64; 3] = [3.0, 1.5, 0.75];
/// Scale of the position-free n-gram features; position i is further
/// divided by (1 + i).
const FREE_WEIGHT: f64 = 0.5;

/// Deterministic hashed character n-gram embedding, L2-normalized, plus
/// Gaussian noise of scale `noise` seeded by (seed, lang, word).
pub fn pseudo_embedding(word: &str, lang: &str, dim: usize, noise: f64, seed: u64) -> Vec<f64> {
    let chars: Vec<char> = word.chars().collect();
    let mut v = vec![0.0; dim];
    let mut add = |feature: &str, weight: f64| {
        let h = fnv1a(feature.as_bytes());
        let idx = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        v[idx] += sign * weight;
    };
    for (n, w) in (1..=3).zip(ANCHOR_WEIGHTS) {
        if chars.len() >= n {
            let gram: String = chars[..n].iter().collect();
            add(&format!("^{gram}"), w);
        }
    }
    for n in 1..=3 {
        for i in 0..chars.len().saturating_sub(n - 1) {
            let gram: String = chars[i..i + n].iter().collect();
            add(&format!("{n}:{gram}"), FREE_WEIGHT / (1.0 + i as f64));
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    if noise > 0.0 {
        let mut key = Vec::with_capacity(lang.len() + word.len() + 9);
        key.extend_from_slice(&seed.to_le_bytes());
        key.extend_from_slice(lang.as_bytes());
        key.push(0);
        key.extend_from_slice(word.as_bytes());
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&key));
        for x in &mut v {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x += noise * z;
        }
    }
    v
}

/// Generates a labeled source lexicon, a target lexicon with gold labels,
/// a target corpus and the plant manifest.
pub fn generate_pair(spec: &SynthSpec) -> Result<SynthPair> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights: Vec<f64> = spec.classes.iter().map(|c| c.weight).collect();
    let mut taken = BTreeSet::new();

    // Source: stems per class by apportionment.
    let source_counts = apportion(spec.stems, &weights);
    let mut source_stems: Vec<Vec<String>> = Vec::with_capacity(spec.classes.len());
    for &n in &source_counts {
        source_stems.push((0..n).map(|_| fresh_stem(&mut rng, &mut taken)).collect());
    }

    // Target: same class shares; cognates drawn from the class's source stems.
    let target_counts = apportion(spec.stems, &weights);
    let cognate_total = (spec.cognate_overlap * spec.stems as f64).round() as usize;
    let cognate_counts = apportion(cognate_total, &weights);
    let mut target_entries: Vec<(usize, String, bool)> = Vec::new(); // (class idx, stem, cognate)
    for (ci, stems) in source_stems.iter().enumerate() {
        let k = cognate_counts[ci].min(stems.len()).min(target_counts[ci]);
        let mut pool = stems.clone();
        pool.shuffle(&mut rng);
        for stem in pool.into_iter().take(k) {
            target_entries.push((ci, stem, true));
        }
        for _ in k..target_counts[ci] {
            target_entries.push((ci, fresh_stem(&mut rng, &mut taken), false));
        }
    }

    let mut target_prefix: Vec<String> = target_entries
        .iter()
        .map(|(ci, _, _)| spec.classes[*ci].prefix.clone())
        .collect();
    let mut planted = Vec::new();
    for plant in &spec.innovations {
        let ci = spec
            .classes
            .iter()
            .position(|c| c.prefix == plant.replaced_prefix)
            .expect("validated");
        let mut idx: Vec<usize> = (0..target_entries.len())
            .filter(|&i| target_entries[i].0 == ci && target_prefix[i] == plant.replaced_prefix)
            .collect();
        let class_size = idx.len();
        let n = (plant.rate * class_size as f64).round() as usize;
        idx.shuffle(&mut rng);
        let mut chosen: Vec<usize> = idx.into_iter().take(n).collect();
        chosen.sort_unstable();
        for &i in &chosen {
            target_prefix[i] = plant.novel_prefix.clone();
        }
        let mut words: Vec<String> = chosen.iter().map(|&i| format!("{}{}", target_prefix[i], target_entries[i].1)).collect();
        words.sort();
        planted.push(PlantedInnovation {
            novel_prefix: plant.novel_prefix.clone(),
            replaced_prefix: plant.replaced_prefix.clone(),
            class: spec.classes[ci].class,
            class_size,
            words,
        });
    }

    let dim = spec.embedding_dim;
    let embed = |word: &str, lang: &str| pseudo_embedding(word, lang, dim, spec.noise, spec.seed);

    let mut source = Vec::with_capacity(spec.stems);
    let mut source_class_counts = BTreeMap::new();
    for (ci, stems) in source_stems.iter().enumerate() {
        let c = &spec.classes[ci];
        for stem in stems {
            let word = format!("{}{stem}", c.prefix);
            source.push(WordEmbedding::new(&word, &spec.source_lang, embed(&word, &spec.source_lang)).labeled(c.class));
        }
        source_class_counts.insert(c.class, stems.len());
    }

    let mut target = Vec::with_capacity(target_entries.len());
    let mut gold = BTreeMap::new();
    let mut cognates = Vec::new();
    let mut target_class_counts = BTreeMap::new();
    for ((ci, stem, cognate), prefix) in target_entries.iter().zip(&target_prefix) {
        let word = format!("{prefix}{stem}");
        let class = spec.classes[*ci].class;
        if gold.insert(word.clone(), class).is_some() {
            return Err(Error::Validation(format!("generated word `{word}` twice; choose distinct prefixes")));
        }
        if *cognate {
            cognates.push(word.clone());
        }
        *target_class_counts.entry(class).or_insert(0) += 1;
        target.push(WordEmbedding::new(&word, &spec.target_lang, embed(&word, &spec.target_lang)));
    }
    cognates.sort();

    let corpus = generate_corpus(&target, &mut rng);
    Ok(SynthPair {
        source,
        target,
        gold,
        manifest: SynthManifest {
            spec: spec.clone(),
            source_class_counts,
            target_class_counts,
            cognates,
            innovations: planted,
        },
        corpus,
    })
}

/// Sentences of 6-12 tokens in which every target word occurs at least twice.
fn generate_corpus(target: &[WordEmbedding], rng: &mut ChaCha8Rng) -> String {
    let mut tokens: Vec<&str> = Vec::new();
    for t in target {
        let reps = 2 + rng.random_range(0..4);
        tokens.extend(std::iter::repeat_n(t.word.as_str(), reps));
    }
    for f in FUNCTION_WORDS {
        tokens.extend(std::iter::repeat_n(*f, target.len() / 10 + 1));
    }
    tokens.shuffle(rng);
    let mut out = String::new();
    let mut rest = tokens.as_slice();
    while !rest.is_empty() {
        let n = rng.random_range(6..=12).min(rest.len());
        let (sentence, tail) = rest.split_at(n);
        rest = tail;
        for (i, w) in sentence.iter().enumerate() {
            if i == 0 {
                let mut cs = w.chars();
                if let Some(first) = cs.next() {
                    out.extend(first.to_uppercase());
                    out.push_str(cs.as_str());
                }
            } else {
                out.push(' ');
                out.push_str(w);
            }
        }
        out.push_str(".\n");
    }
    out
}

/// File names written by [`SynthPair::write_to_dir`].
pub mod files {
    pub const SOURCE: &str = "source.embjsonl";
    pub const SOURCE_PARADIGMS: &str = "source_paradigms.jsonl";
    pub const TARGET: &str = "target.embjsonl";
    pub const TARGET_GOLD: &str = "target_gold.jsonl";
    pub const CORPUS: &str = "corpus.txt";
    pub const MANIFEST: &str = "manifest.json";
    pub const INVENTORY: &str = "inventory.jsonl";
}

impl SynthPair {
    pub fn source_paradigms(&self) -> Vec<(String, NounClass)> {
        self.source
            .iter()
            .map(|e| (e.word.clone(), e.label.expect("source is labeled")))
            .collect()
    }

    /// Writes dumps, paradigm and gold files, the corpus, the source
    /// inventory and the manifest into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let spec = &self.manifest.spec;
        let meta = Meta::new("synth")
            .seed(spec.seed)
            .flag("stems", spec.stems)
            .flag("cognate_overlap", spec.cognate_overlap)
            .flag("noise", spec.noise);
        write_embeddings(dir.join(files::SOURCE), &spec.source_lang, spec.embedding_dim, &self.source, Some(&meta))?;
        write_embeddings(dir.join(files::TARGET), &spec.target_lang, spec.embedding_dim, &self.target, Some(&meta))?;
        write_paradigms(dir.join(files::SOURCE_PARADIGMS), &spec.source_lang, &self.source_paradigms())?;
        let gold: Vec<(String, NounClass)> = self.gold.iter().map(|(w, c)| (w.clone(), *c)).collect();
        write_paradigms(dir.join(files::TARGET_GOLD), &spec.target_lang, &gold)?;
        let corpus = dir.join(files::CORPUS);
        std::fs::write(&corpus, &self.corpus).map_err(|e| Error::io(&corpus, e))?;
        spec.source_inventory().write(dir.join(files::INVENTORY))?;
        write_json(dir.join(files::MANIFEST), &self.manifest)
    }
}
