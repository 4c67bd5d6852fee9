//! Embedding dumps, labeled paradigm files and exact cosine KNN.
//!
//! An embedding dump (`.embjsonl`) is a header line
//! `{"dim": D, "lang": code, "count": N}` followed by one
//! `{"word", "vector", "label"?}` object per line. Words are NFC-normalized
//! and lowercased at ingest; the apostrophe is an ordinary word character.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::class::NounClass;
use crate::error::{Error, Result};
use crate::io::{format_real, open_reader, JsonlWriter, Meta};

/// NFC-normalizes and lowercases a surface form. Typographic apostrophes
/// (U+2019, U+02BC) are folded onto U+0027.
pub fn normalize_word(raw: &str) -> String {
    let folded: String = raw
        .trim()
        .chars()
        .map(|c| match c {
            '\u{2019}' | '\u{02BC}' => '\'',
            c => c,
        })
        .collect();
    let lowered = folded.nfc().collect::<String>().to_lowercase();
    lowered.nfc().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbedding {
    pub word: String,
    pub lang: String,
    pub vector: Vec<f64>,
    pub label: Option<NounClass>,
}

impl WordEmbedding {
    pub fn new(word: &str, lang: &str, vector: Vec<f64>) -> Self {
        Self {
            word: normalize_word(word),
            lang: lang.to_string(),
            vector,
            label: None,
        }
    }

    pub fn labeled(mut self, label: NounClass) -> Self {
        self.label = Some(label);
        self
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn cosine_with_norms(a: &[f64], b: &[f64], na: f64, nb: f64) -> f64 {
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
            context: "cosine".into(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok(cosine_with_norms(a, b, na, nb))
}

/// Non-fatal problems found while loading a dump.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadWarnings {
    pub duplicates: usize,
    pub non_finite: usize,
    pub empty_words: usize,
    /// Header `count` disagreed with the number of records read.
    pub count_mismatch: Option<(usize, usize)>,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.duplicates + self.non_finite + self.empty_words + usize::from(self.count_mismatch.is_some())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DumpHeader {
    dim: usize,
    lang: String,
    #[serde(default)]
    count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Meta>,
}

#[derive(Deserialize)]
struct DumpRecord {
    word: String,
    vector: Vec<Option<f64>>,
    #[serde(default)]
    label: Option<NounClass>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    pub hits: Vec<Neighbor>,
    /// Fewer than `k` eligible vectors were available.
    pub short: bool,
}

/// Immutable, validated collection of embeddings for one language.
#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    lang: String,
    dim: usize,
    records: Vec<WordEmbedding>,
    norms: Vec<f64>,
    by_word: HashMap<String, usize>,
    warnings: LoadWarnings,
}

impl EmbeddingStore {
    /// Validates and indexes in-memory records. Words are normalized,
    /// duplicates keep the first occurrence, records with non-finite
    /// components are dropped. A record whose length differs from `dim`
    /// rejects the whole collection.
    pub fn from_records(lang: &str, dim: usize, records: Vec<WordEmbedding>) -> Result<Self> {
        let mut warnings = LoadWarnings::default();
        let mut kept = Vec::with_capacity(records.len());
        let mut by_word = HashMap::with_capacity(records.len());
        for (i, mut rec) in records.into_iter().enumerate() {
            if rec.vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rec.vector.len(),
                    context: format!("record {}", i + 1),
                });
            }
            if rec.vector.iter().any(|x| !x.is_finite()) {
                warnings.non_finite += 1;
                continue;
            }
            rec.word = normalize_word(&rec.word);
            if rec.word.is_empty() {
                warnings.empty_words += 1;
                continue;
            }
            if by_word.contains_key(&rec.word) {
                warnings.duplicates += 1;
                continue;
            }
            by_word.insert(rec.word.clone(), kept.len());
            kept.push(rec);
        }
        let norms = kept.iter().map(|r| norm(&r.vector)).collect();
        Ok(Self {
            lang: lang.to_string(),
            dim,
            records: kept,
            norms,
            by_word,
            warnings,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read_from(open_reader(path)?, path)
    }

    /// Parses a dump from any buffered reader; `path` is only used for
    /// error messages.
    pub fn read_from(reader: impl BufRead, path: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let header: DumpHeader = loop {
            match lines.next() {
                None => return Err(Error::EmptyInput(format!("{}: missing header", path.display()))),
                Some((i, line)) => {
                    let line = line.map_err(|e| Error::io(path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    break serde_json::from_str(&line).map_err(|e| parse_err(i + 1, format!("header: {e}")))?;
                }
            }
        };
        if header.dim == 0 {
            return Err(parse_err(1, "header dim must be positive".into()));
        }

        let mut records = Vec::new();
        let mut non_finite = 0;
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let rec = match serde_json::from_str::<DumpRecord>(line) {
                Ok(rec) => rec,
                Err(first) => {
                    // NaN / Infinity tokens are not JSON; retry with them
                    // nulled so the record can be dropped instead of failing.
                    let patched = line
                        .replace("-Infinity", "null")
                        .replace("Infinity", "null")
                        .replace("NaN", "null");
                    match serde_json::from_str::<DumpRecord>(&patched) {
                        Ok(rec) if rec.vector.iter().any(Option::is_none) => rec,
                        _ => return Err(parse_err(i + 1, first.to_string())),
                    }
                }
            };
            if rec.vector.len() != header.dim {
                return Err(Error::DimensionMismatch {
                    expected: header.dim,
                    found: rec.vector.len(),
                    context: format!("{}:{}", path.display(), i + 1),
                });
            }
            match rec.vector.into_iter().collect::<Option<Vec<f64>>>() {
                Some(vector) => records.push(WordEmbedding {
                    word: rec.word,
                    lang: header.lang.clone(),
                    vector,
                    label: rec.label,
                }),
                None => non_finite += 1,
            }
        }
        let read = records.len() + non_finite;
        let mut store = Self::from_records(&header.lang, header.dim, records)?;
        store.warnings.non_finite += non_finite;
        if let Some(declared) = header.count.filter(|&c| c != read) {
            store.warnings.count_mismatch = Some((declared, read));
        }
        Ok(store)
    }

    /// Writes the store in dump format. Reals carry nine significant digits.
    pub fn write(&self, path: impl AsRef<Path>, meta: Option<&Meta>) -> Result<()> {
        write_embeddings(path, &self.lang, self.dim, &self.records, meta)
    }

    pub fn lang(&self) -> &str {
        &self.lang
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn warnings(&self) -> &LoadWarnings {
        &self.warnings
    }

    pub fn records(&self) -> &[WordEmbedding] {
        &self.records
    }

    pub fn get(&self, index: usize) -> &WordEmbedding {
        &self.records[index]
    }

    pub fn norm_of(&self, index: usize) -> f64 {
        self.norms[index]
    }

    pub fn lookup(&self, word: &str) -> Option<&WordEmbedding> {
        self.by_word.get(word).map(|&i| &self.records[i])
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.by_word.get(word).copied()
    }

    /// Keeps only the words in `words` (already normalized), preserving
    /// the store's record order.
    pub fn retain_words(&self, words: &BTreeSet<String>) -> Self {
        let records: Vec<_> = self
            .records
            .iter()
            .filter(|r| words.contains(&r.word))
            .cloned()
            .collect();
        let mut out = Self::from_records(&self.lang, self.dim, records).expect("records already validated");
        out.warnings = self.warnings.clone();
        out
    }

    /// Exact top-`k` cosine neighbors of `query`, descending by similarity
    /// with ties broken by ascending word. Zero-norm records are never
    /// returned.
    pub fn nearest(&self, query: &[f64], k: usize) -> Result<Neighbors> {
        self.nearest_excluding(query, k, None)
    }

    /// As [`nearest`](Self::nearest), skipping the record whose word equals
    /// `exclude`.
    pub fn nearest_excluding(&self, query: &[f64], k: usize, exclude: Option<&str>) -> Result<Neighbors> {
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.records.is_empty() {
            return Err(Error::EmptyInput("nearest-neighbor index".into()));
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: query.len(),
                context: "query".into(),
            });
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(Error::DegenerateVector);
        }
        let mut hits: Vec<Neighbor> = self
            .records
            .iter()
            .zip(&self.norms)
            .enumerate()
            .filter(|(_, (r, &n))| n > 0.0 && exclude != Some(r.word.as_str()))
            .map(|(index, (r, &n))| Neighbor {
                index,
                similarity: cosine_with_norms(query, &r.vector, qn, n),
            })
            .collect();
        let order = |a: &Neighbor, b: &Neighbor| -> Ordering {
            b.similarity
                .total_cmp(&a.similarity)
                .then_with(|| self.records[a.index].word.cmp(&self.records[b.index].word))
        };
        let short = hits.len() < k;
        if !short && hits.len() > k {
            hits.select_nth_unstable_by(k - 1, order);
            hits.truncate(k);
        }
        hits.sort_by(order);
        Ok(Neighbors { hits, short })
    }
}

/// Writes embedding records in dump format.
pub fn write_embeddings(
    path: impl AsRef<Path>,
    lang: &str,
    dim: usize,
    records: &[WordEmbedding],
    meta: Option<&Meta>,
) -> Result<()> {
    let mut w = JsonlWriter::create(path)?;
    w.record(&DumpHeader {
        dim,
        lang: lang.to_string(),
        count: Some(records.len()),
        meta: meta.cloned(),
    })?;
    let mut line = String::new();
    for r in records {
        line.clear();
        line.push_str("{\"word\":");
        line.push_str(&serde_json::to_string(&r.word).expect("string serialization"));
        line.push_str(",\"vector\":[");
        for (i, x) in r.vector.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&format_real(*x));
        }
        line.push(']');
        if let Some(label) = r.label {
            line.push_str(",\"label\":");
            line.push_str(&serde_json::to_string(&label).expect("class serialization"));
        }
        line.push('}');
        w.raw_line(&line)?;
    }
    w.finish()
}

/// Source-language (word, class) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledParadigmSet {
    pub lang: String,
    entries: Vec<(String, NounClass)>,
    pub duplicates: usize,
}

#[derive(Serialize, Deserialize)]
struct ParadigmHeader {
    lang: String,
}

#[derive(Serialize, Deserialize)]
struct ParadigmRecord {
    word: String,
    class: NounClass,
}

impl LabeledParadigmSet {
    pub fn new(lang: &str, pairs: impl IntoIterator<Item = (String, NounClass)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        let mut duplicates = 0;
        for (word, class) in pairs {
            let word = normalize_word(&word);
            if word.is_empty() {
                continue;
            }
            if !seen.insert(word.clone()) {
                duplicates += 1;
                continue;
            }
            entries.push((word, class));
        }
        if entries.is_empty() {
            return Err(Error::EmptyInput("labeled paradigm set has no classes".into()));
        }
        Ok(Self {
            lang: lang.to_string(),
            entries,
            duplicates,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = open_reader(path)?;
        let mut lang = None;
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |e: serde_json::Error| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            };
            if lang.is_none() {
                let h: ParadigmHeader = serde_json::from_str(line).map_err(err)?;
                lang = Some(h.lang);
                continue;
            }
            let r: ParadigmRecord = serde_json::from_str(line).map_err(err)?;
            pairs.push((r.word, r.class));
        }
        let lang = lang.ok_or_else(|| Error::EmptyInput(format!("{}: missing header", path.display())))?;
        Self::new(&lang, pairs)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = JsonlWriter::create(path)?;
        w.record(&ParadigmHeader { lang: self.lang.clone() })?;
        for (word, class) in &self.entries {
            w.record(&ParadigmRecord {
                word: word.clone(),
                class: *class,
            })?;
        }
        w.finish()
    }

    pub fn entries(&self) -> &[(String, NounClass)] {
        &self.entries
    }

    pub fn class_of(&self, word: &str) -> Option<NounClass> {
        self.entries.iter().find(|(w, _)| w == word).map(|(_, c)| *c)
    }

    pub fn class_set(&self) -> BTreeSet<NounClass> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }

    pub fn class_distribution(&self) -> BTreeMap<NounClass, usize> {
        let mut dist = BTreeMap::new();
        for (_, c) in &self.entries {
            *dist.entry(*c).or_insert(0) += 1;
        }
        dist
    }
}

/// An embedding store in which every record carries a class label.
#[derive(Debug, Clone)]
pub struct LabeledIndex {
    store: EmbeddingStore,
    /// Records dropped because no label was available.
    pub unlabeled_dropped: usize,
}

impl LabeledIndex {
    /// Builds the index from a store, filling missing labels from
    /// `paradigms` when given. Records that end up unlabeled are dropped.
    pub fn new(store: EmbeddingStore, paradigms: Option<&LabeledParadigmSet>) -> Result<Self> {
        let lookup: HashMap<&str, NounClass> = paradigms
            .map(|p| p.entries().iter().map(|(w, c)| (w.as_str(), *c)).collect())
            .unwrap_or_default();
        let mut dropped = 0;
        let records: Vec<WordEmbedding> = store
            .records()
            .iter()
            .filter_map(|r| {
                let label = r.label.or_else(|| lookup.get(r.word.as_str()).copied());
                match label {
                    Some(l) if l.is_known() => Some(WordEmbedding {
                        label: Some(l),
                        ..r.clone()
                    }),
                    _ => {
                        dropped += 1;
                        None
                    }
                }
            })
            .collect();
        if records.is_empty() {
            return Err(Error::EmptyInput("source index has no labeled records".into()));
        }
        let mut labeled = EmbeddingStore::from_records(store.lang(), store.dim(), records)?;
        labeled.warnings = store.warnings.clone();
        Ok(Self {
            store: labeled,
            unlabeled_dropped: dropped,
        })
    }

    pub fn store(&self) -> &EmbeddingStore {
        &self.store
    }

    pub fn label(&self, index: usize) -> NounClass {
        self.store.get(index).label.expect("labeled index invariant")
    }

    pub fn class_distribution(&self) -> BTreeMap<NounClass, usize> {
        let mut dist = BTreeMap::new();
        for r in self.store.records() {
            *dist.entry(r.label.expect("labeled")).or_insert(0) += 1;
        }
        dist
    }
}

/// Writes a paradigm file from (word, class) pairs.
pub fn write_paradigms(path: impl AsRef<Path>, lang: &str, pairs: &[(String, NounClass)]) -> Result<()> {
    let mut w = JsonlWriter::create(path)?;
    w.record(&ParadigmHeader { lang: lang.to_string() })?;
    for (word, class) in pairs {
        w.record(&ParadigmRecord {
            word: word.clone(),
            class: *class,
        })?;
    }
    w.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(text: &str) -> Result<EmbeddingStore> {
        EmbeddingStore::read_from(Cursor::new(text.to_string()), Path::new("mem"))
    }

    #[test]
    fn loads_valid_dump() {
        let s = parse(
            "{\"dim\":4,\"lang\":\"sw\",\"count\":3}\n\
             {\"word\":\"Watu\",\"vector\":[1,0,0,0],\"label\":2}\n\
             {\"word\":\"maji\",\"vector\":[0,1,0,0],\"label\":6}\n\
             {\"word\":\"kitabu\",\"vector\":[0,0,1,0]}\n",
        )
        .unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.get(0).word, "watu");
        assert_eq!(s.get(0).label, Some(NounClass::Class(2)));
        assert_eq!(s.get(2).label, None);
        assert_eq!(s.warnings().total(), 0);
    }

    #[test]
    fn short_record_rejects_file() {
        let err = parse(
            "{\"dim\":4,\"lang\":\"sw\",\"count\":1}\n\
             {\"word\":\"watu\",\"vector\":[1,0,0]}\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
    }

    #[test]
    fn duplicate_kept_first_with_warning() {
        let s = parse(
            "{\"dim\":2,\"lang\":\"sw\",\"count\":2}\n\
             {\"word\":\"watu\",\"vector\":[1,0]}\n\
             {\"word\":\"watu\",\"vector\":[0,1]}\n",
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0).vector, vec![1.0, 0.0]);
        assert_eq!(s.warnings().duplicates, 1);
    }

    #[test]
    fn non_finite_record_is_dropped() {
        let s = parse(
            "{\"dim\":2,\"lang\":\"sw\",\"count\":2}\n\
             {\"word\":\"watu\",\"vector\":[NaN,0]}\n\
             {\"word\":\"maji\",\"vector\":[0,1]}\n",
        )
        .unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.warnings().non_finite, 1);
        assert_eq!(s.warnings().count_mismatch, None);
    }

    #[test]
    fn apostrophe_is_preserved() {
        assert_eq!(normalize_word("K'ululu"), "k'ululu");
        assert_eq!(normalize_word("k\u{2019}ululu"), "k'ululu");
        // decomposed é → composed
        assert_eq!(normalize_word("E\u{301}"), "\u{e9}");
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::DegenerateVector)));
    }

    #[test]
    fn nearest_identity_and_short_flag() {
        let recs: Vec<_> = (0..5)
            .map(|i| WordEmbedding::new(&format!("w{i}"), "x", vec![1.0, i as f64]))
            .collect();
        let s = EmbeddingStore::from_records("x", 2, recs).unwrap();
        let n = s.nearest(&[1.0, 3.0], 1).unwrap();
        assert_eq!(s.get(n.hits[0].index).word, "w3");
        assert!((n.hits[0].similarity - 1.0).abs() < 1e-12);
        assert!(!n.short);
        let n = s.nearest(&[1.0, 3.0], 7).unwrap();
        assert_eq!(n.hits.len(), 5);
        assert!(n.short);
    }

    #[test]
    fn nearest_ties_break_lexicographically() {
        let recs = vec![
            WordEmbedding::new("zeta", "x", vec![1.0, 0.0]),
            WordEmbedding::new("alpha", "x", vec![2.0, 0.0]),
            WordEmbedding::new("mid", "x", vec![0.0, 1.0]),
        ];
        let s = EmbeddingStore::from_records("x", 2, recs).unwrap();
        let n = s.nearest(&[1.0, 0.0], 2).unwrap();
        let words: Vec<_> = n.hits.iter().map(|h| s.get(h.index).word.as_str()).collect();
        assert_eq!(words, ["alpha", "zeta"]);
    }

    #[test]
    fn dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.embjsonl");
        let recs = vec![
            WordEmbedding::new("k'ululu", "nyf", vec![0.125, -3.5e-7]).labeled(NounClass::Class(15)),
            WordEmbedding::new("akimbola", "nyf", vec![1.0 / 3.0, 2.0]),
        ];
        write_embeddings(&path, "nyf", 2, &recs, Some(&Meta::new("test"))).unwrap();
        let back = EmbeddingStore::load(&path).unwrap();
        assert_eq!(back.warnings().total(), 0);
        assert_eq!(back.get(0).word, "k'ululu");
        assert_eq!(back.get(0).label, Some(NounClass::Class(15)));
        assert!((back.get(1).vector[0] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn paradigm_set_dedups_and_requires_classes() {
        let p = LabeledParadigmSet::new(
            "sw",
            vec![
                ("watu".to_string(), NounClass::Class(2)),
                ("Watu".to_string(), NounClass::Class(1)),
                ("maji".to_string(), NounClass::Class(6)),
            ],
        )
        .unwrap();
        assert_eq!(p.entries().len(), 2);
        assert_eq!(p.duplicates, 1);
        assert_eq!(p.class_of("watu"), Some(NounClass::Class(2)));
        assert!(LabeledParadigmSet::new("sw", Vec::new()).is_err());
    }
}
