//! Noun-candidate extraction from raw target-language text.
//!
//! There is no tagger for the target language, so "candidates" are word
//! types that pass frequency, length and character-class filters. The list
//! includes verbs and other word classes.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::embedding::normalize_word;

pub const DEFAULT_MIN_LEN: usize = 3;
pub const DEFAULT_MIN_FREQ: usize = 2;

pub const RULE_CHARSET: &str = "charset";
pub const RULE_MIN_LEN: &str = "min_len";
pub const RULE_STOPLIST: &str = "stoplist";
pub const RULE_MIN_FREQ: &str = "min_freq";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentences: usize,
    pub tokens: usize,
    pub types: usize,
    pub candidates: usize,
    /// Word types removed, keyed by the first rule they failed.
    pub dropped_by_rule: BTreeMap<String, usize>,
    /// Invalid UTF-8 sequences replaced while decoding.
    pub replaced_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractConfig {
    pub min_len: usize,
    pub min_freq: usize,
    pub stoplist: BTreeSet<String>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            min_len: DEFAULT_MIN_LEN,
            min_freq: DEFAULT_MIN_FREQ,
            stoplist: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub word: String,
    pub frequency: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}' || c == '\u{02BC}' || is_combining_mark(c)
}

fn is_combining_mark(c: char) -> bool {
    matches!(c as u32, 0x0300..=0x036F | 0x1AB0..=0x1AFF | 0x1DC0..=0x1DFF | 0x20D0..=0x20FF | 0xFE20..=0xFE2F)
}

/// Splits a line into raw tokens on whitespace and punctuation; apostrophes
/// stay inside tokens.
pub fn tokenize(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| !is_word_char(c)).filter(|t| !t.is_empty())
}

/// Letters plus apostrophes strictly inside the word.
fn passes_charset(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    let n = chars.len();
    chars.iter().enumerate().all(|(i, &c)| {
        if c == '\'' {
            i > 0 && i + 1 < n
        } else {
            c.is_alphabetic() || is_combining_mark(c)
        }
    })
}

/// Decodes bytes as UTF-8, replacing invalid sequences and counting them.
pub fn decode_lossy(bytes: &[u8]) -> (String, usize) {
    let mut out = String::with_capacity(bytes.len());
    let mut replaced = 0;
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            out.push(char::REPLACEMENT_CHARACTER);
            replaced += 1;
        }
    }
    (out, replaced)
}

/// Extracts candidate word types from raw corpus bytes (one sentence per
/// line). Output is sorted by descending frequency, then lexicographically.
pub fn extract_candidates(corpus: &[u8], config: &ExtractConfig) -> (Vec<Candidate>, CorpusStats) {
    let (text, replaced_bytes) = decode_lossy(corpus);
    let mut freq: HashMap<String, usize> = HashMap::new();
    let mut sentences = 0;
    let mut tokens = 0;
    for line in text.lines() {
        let mut any = false;
        for raw in tokenize(line) {
            // Edge apostrophes act as quotation marks.
            let word = normalize_word(raw);
            let word = word.trim_matches('\'');
            if word.is_empty() {
                continue;
            }
            any = true;
            tokens += 1;
            *freq.entry(word.to_string()).or_insert(0) += 1;
        }
        if any {
            sentences += 1;
        }
    }

    let stoplist: BTreeSet<String> = config.stoplist.iter().map(|w| normalize_word(w)).collect();
    let mut dropped_by_rule = BTreeMap::new();
    let mut candidates = Vec::new();
    let types = freq.len();
    for (word, frequency) in freq {
        let rule = if !passes_charset(&word) {
            Some(RULE_CHARSET)
        } else if word.chars().count() < config.min_len {
            Some(RULE_MIN_LEN)
        } else if stoplist.contains(&word) {
            Some(RULE_STOPLIST)
        } else if frequency < config.min_freq {
            Some(RULE_MIN_FREQ)
        } else {
            None
        };
        match rule {
            Some(r) => *dropped_by_rule.entry(r.to_string()).or_insert(0) += 1,
            None => candidates.push(Candidate { word, frequency }),
        }
    }
    candidates.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.word.cmp(&b.word)));

    let stats = CorpusStats {
        sentences,
        tokens,
        types,
        candidates: candidates.len(),
        dropped_by_rule,
        replaced_bytes,
    };
    (candidates, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(c: &[Candidate]) -> Vec<&str> {
        c.iter().map(|c| c.word.as_str()).collect()
    }

    #[test]
    fn frequency_filter() {
        let (c, stats) = extract_candidates("Watu watu wazuri.".as_bytes(), &ExtractConfig::default());
        assert_eq!(words(&c), ["watu"]);
        assert_eq!(c[0].frequency, 2);
        assert_eq!(stats.tokens, 3);
        assert_eq!(stats.types, 2);
        assert_eq!(stats.dropped_by_rule.get(RULE_MIN_FREQ), Some(&1));
    }

    #[test]
    fn internal_apostrophe_kept() {
        let cfg = ExtractConfig { min_freq: 1, ..Default::default() };
        let (c, _) = extract_candidates("K'adzamuhala, 'watu'.".as_bytes(), &cfg);
        assert_eq!(words(&c), ["k'adzamuhala", "watu"]);
    }

    #[test]
    fn short_tokens_dropped_by_min_len() {
        let cfg = ExtractConfig { min_freq: 1, ..Default::default() };
        let (c, stats) = extract_candidates(b"ab ab kitabu", &cfg);
        assert_eq!(words(&c), ["kitabu"]);
        assert_eq!(stats.dropped_by_rule.get(RULE_MIN_LEN), Some(&1));
    }

    #[test]
    fn digits_fail_charset_and_stoplist_applies() {
        let mut cfg = ExtractConfig { min_freq: 1, ..Default::default() };
        cfg.stoplist.insert("Na".into());
        cfg.stoplist.insert("kwa".into());
        let (c, stats) = extract_candidates(b"abc123 kwa kitabu na", &cfg);
        assert_eq!(words(&c), ["kitabu"]);
        assert_eq!(stats.dropped_by_rule.get(RULE_CHARSET), Some(&1));
        assert_eq!(stats.dropped_by_rule.get(RULE_STOPLIST), Some(&1));
        // "na" is two characters and fails min_len before the stoplist
        assert_eq!(stats.dropped_by_rule.get(RULE_MIN_LEN), Some(&1));
    }

    #[test]
    fn invalid_bytes_replaced_and_counted() {
        let cfg = ExtractConfig { min_freq: 1, ..Default::default() };
        let (c, stats) = extract_candidates(b"kitabu ma\xffji\n", &cfg);
        assert_eq!(stats.replaced_bytes, 1);
        assert_eq!(words(&c), ["kitabu"]);
    }

    #[test]
    fn empty_corpus() {
        let (c, stats) = extract_candidates(b"", &ExtractConfig::default());
        assert!(c.is_empty());
        assert_eq!(stats.sentences, 0);
    }

    #[test]
    fn ordering_by_frequency_then_word() {
        let cfg = ExtractConfig { min_freq: 1, ..Default::default() };
        let (c, _) = extract_candidates("zeta alpha\nbeta zeta\nalpha zeta".as_bytes(), &cfg);
        assert_eq!(words(&c), ["zeta", "alpha", "beta"]);
        assert_eq!(c[0].frequency, 3);
    }
}
