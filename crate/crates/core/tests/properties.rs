use std::collections::BTreeMap;

use proptest::prelude::*;

use nounclass::corpus::{extract_candidates, ExtractConfig};
use nounclass::ensemble::{agreement_rate, ensemble_vote, EnsembleConfig};
use nounclass::prefix::{cluster_outcome, map_cluster, profile_cluster, ClusterOutcome, InnovationCriteria, PrefixInventory};
use nounclass::synth::{generate_pair, SynthSpec};
use nounclass::transfer::{classify_word, TransferConfig};
use nounclass::{cosine, EmbeddingStore, LabeledIndex, Method, NounClass, Prediction, WordEmbedding};

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, dim).prop_filter("non-zero", |v| v.iter().any(|x| x.abs() > 1e-3))
}

fn labeled_source(n: usize, dim: usize) -> impl Strategy<Value = Vec<(Vec<f64>, u16)>> {
    prop::collection::vec((vector(dim), 1u16..=6), 1..n)
}

fn index_of(rows: &[(Vec<f64>, u16)]) -> LabeledIndex {
    let records = rows
        .iter()
        .enumerate()
        .map(|(i, (v, c))| WordEmbedding::new(&format!("s{i:03}"), "src", v.clone()).labeled(NounClass::Class(*c)))
        .collect();
    LabeledIndex::new(EmbeddingStore::from_records("src", rows[0].0.len(), records).unwrap(), None).unwrap()
}

proptest! {
    #[test]
    fn cosine_is_symmetric_and_bounded(a in vector(8), b in vector(8)) {
        let ab = cosine(&a, &b).unwrap();
        prop_assert_eq!(ab, cosine(&b, &a).unwrap());
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((cosine(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_matches_brute_force(rows in labeled_source(40, 5), q in vector(5), k in 1usize..8) {
        let index = index_of(&rows);
        let got = index.store().nearest(&q, k).unwrap();
        let mut all: Vec<(f64, String)> = index
            .store()
            .records()
            .iter()
            .map(|r| (cosine(&q, &r.vector).unwrap(), r.word.clone()))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        let got: Vec<(f64, String)> = got
            .hits
            .iter()
            .map(|h| (h.similarity, index.store().get(h.index).word.clone()))
            .collect();
        prop_assert_eq!(got, all);
    }

    #[test]
    fn transfer_ignores_vector_scale(rows in labeled_source(30, 4), q in vector(4), scale in 0.01f64..100.0) {
        let index = index_of(&rows);
        let cfg = TransferConfig::default();
        let a = classify_word(&WordEmbedding::new("t", "tgt", q.clone()), &index, &cfg).unwrap();
        let scaled: Vec<f64> = q.iter().map(|x| x * scale).collect();
        let b = classify_word(&WordEmbedding::new("t", "tgt", scaled), &index, &cfg).unwrap();
        prop_assert_eq!(a.predicted_class, b.predicted_class);
        prop_assert!((a.confidence - b.confidence).abs() < 1e-9);
    }

    #[test]
    fn transfer_ignores_source_order(rows in labeled_source(30, 4), q in vector(4), shift in 0usize..30) {
        let mut rotated = rows.clone();
        rotated.rotate_left(shift % rows.len());
        // same words in a different order
        let records = |rs: &[(Vec<f64>, u16)], names: &[usize]| -> LabeledIndex {
            let recs = rs
                .iter()
                .zip(names)
                .map(|((v, c), i)| WordEmbedding::new(&format!("s{i:03}"), "src", v.clone()).labeled(NounClass::Class(*c)))
                .collect();
            LabeledIndex::new(EmbeddingStore::from_records("src", 4, recs).unwrap(), None).unwrap()
        };
        let mut names: Vec<usize> = (0..rows.len()).collect();
        let a = records(&rows, &names);
        names.rotate_left(shift % rows.len());
        let b = records(&rotated, &names);
        let t = WordEmbedding::new("t", "tgt", q);
        let cfg = TransferConfig::default();
        prop_assert_eq!(classify_word(&t, &a, &cfg).unwrap(), classify_word(&t, &b, &cfg).unwrap());
    }

    #[test]
    fn k1_takes_nearest_class(rows in labeled_source(30, 4), q in vector(4)) {
        let index = index_of(&rows);
        let cfg = TransferConfig { k: 1, ..TransferConfig::default() };
        let p = classify_word(&WordEmbedding::new("t", "tgt", q.clone()), &index, &cfg).unwrap();
        let top = index.store().nearest(&q, 1).unwrap().hits[0];
        prop_assert_eq!(p.predicted_class, index.label(top.index));
        prop_assert_eq!(p.vote_conf, 1.0);
    }

    #[test]
    fn dominant_prefix_ignores_member_order(words in prop::collection::vec("[a-e]{1,5}", 1..30), shift in 0usize..30) {
        let a = profile_cluster(0, &words).unwrap();
        let mut w2 = words.clone();
        w2.rotate_left(shift % words.len());
        w2.reverse();
        prop_assert_eq!(a, profile_cluster(0, &w2).unwrap());
    }

    #[test]
    fn cluster_outcomes_partition(words in prop::collection::vec("[a-z]{1,4}", 1..40), min_size in 1usize..40) {
        let inventory = PrefixInventory::bantu_default();
        let p = map_cluster(&profile_cluster(0, &words).unwrap(), &inventory);
        let criteria = InnovationCriteria { min_size, ..InnovationCriteria::default() };
        let strong = p.consistency >= criteria.min_consistency && p.size >= min_size;
        match cluster_outcome(&p, &criteria) {
            ClusterOutcome::Mapped(c) => prop_assert!(c.is_known()),
            ClusterOutcome::Unknown => prop_assert!(!strong && p.mapped_class == Some(NounClass::Unknown)),
            ClusterOutcome::Innovation(_) => prop_assert!(strong && p.mapped_class == Some(NounClass::Unknown)),
        }
    }

    #[test]
    fn ensemble_partitions_words(
        t in prop::collection::vec((0usize..20, 1u16..=4, 0.0f64..=1.0), 0..20),
        c in prop::collection::vec((0usize..20, 1u16..=4, 0.0f64..=1.0), 0..20),
        min_conf in 0.0f64..=1.0,
    ) {
        let dedup = |v: &[(usize, u16, f64)], m: Method| -> Vec<Prediction> {
            let mut seen = BTreeMap::new();
            for &(w, k, conf) in v {
                seen.entry(w).or_insert(Prediction::new(format!("w{w}"), k, conf, m));
            }
            seen.into_values().collect()
        };
        let (t, c) = (dedup(&t, Method::Transfer), dedup(&c, Method::Clustering));
        let cfg = EnsembleConfig { min_conf, ..EnsembleConfig::default() };
        let out = ensemble_vote(&t, &c, &cfg).unwrap();
        let mut words: Vec<String> = t.iter().chain(&c).map(|p| p.word.clone()).collect();
        words.sort();
        words.dedup();
        let mut seen: Vec<String> = out.accepted.iter().chain(&out.rejected).map(|r| r.word.clone()).collect();
        seen.sort();
        prop_assert_eq!(seen, words);
        prop_assert!(out.accepted.iter().all(|r| r.combined_confidence >= min_conf));
        prop_assert!(out.rejected.iter().all(|r| r.combined_confidence < min_conf || r.reason.is_some()));
        prop_assert!(out.accepted.iter().chain(&out.rejected).all(|r| (0.0..=1.0 + 1e-12).contains(&r.combined_confidence)));
    }

    #[test]
    fn agreement_rises_with_matching_words(classes in prop::collection::vec(1u16..=4, 2..30), flip in 0usize..30) {
        let a: Vec<Prediction> = classes.iter().enumerate().map(|(i, &k)| Prediction::new(format!("w{i}"), k, 1.0, Method::Transfer)).collect();
        let mut b = a.clone();
        let i = flip % b.len();
        b[i].class = NounClass::Class(if classes[i] == 4 { 1 } else { classes[i] + 1 });
        let before = agreement_rate(&a, &b).unwrap().rate;
        b[i].class = a[i].class;
        let after = agreement_rate(&a, &b).unwrap().rate;
        prop_assert!(after > before);
        prop_assert_eq!(after, 100.0);
    }

    #[test]
    fn corpus_line_order_is_irrelevant(lines in prop::collection::vec("[a-z' ]{0,30}", 0..20), shift in 0usize..20) {
        let cfg = ExtractConfig { min_freq: 1, ..ExtractConfig::default() };
        let a = extract_candidates(lines.join("\n").as_bytes(), &cfg);
        let mut l2 = lines.clone();
        if !l2.is_empty() {
            let n = l2.len();
            l2.rotate_left(shift % n);
        }
        let b = extract_candidates(l2.join("\n").as_bytes(), &cfg);
        let mut wa: Vec<_> = a.0.iter().map(|c| (c.word.clone(), c.frequency)).collect();
        let mut wb: Vec<_> = b.0.iter().map(|c| (c.word.clone(), c.frequency)).collect();
        wa.sort();
        wb.sort();
        prop_assert_eq!(wa, wb);
        prop_assert_eq!(a.1.types, b.1.types);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn synth_is_byte_identical(seed in 0u64..1000) {
        let spec = SynthSpec { seed, ..SynthSpec::preset("tiny").unwrap() };
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        generate_pair(&spec).unwrap().write_to_dir(d1.path()).unwrap();
        generate_pair(&spec).unwrap().write_to_dir(d2.path()).unwrap();
        let mut names: Vec<_> = std::fs::read_dir(d1.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        prop_assert!(!names.is_empty());
        for n in names {
            prop_assert_eq!(std::fs::read(d1.path().join(&n)).unwrap(), std::fs::read(d2.path().join(&n)).unwrap());
        }
    }

    #[test]
    fn noiseless_cognates_find_their_class(seed in 0u64..1000) {
        let spec = SynthSpec { seed, cognate_overlap: 1.0, noise: 0.0, ..SynthSpec::preset("tiny").unwrap() };
        let pair = generate_pair(&spec).unwrap();
        let index = LabeledIndex::new(EmbeddingStore::from_records("src", spec.embedding_dim, pair.source.clone()).unwrap(), None).unwrap();
        for t in &pair.target {
            let top = index.store().nearest(&t.vector, 1).unwrap().hits[0];
            prop_assert_eq!(index.label(top.index), pair.gold[&t.word]);
        }
    }

    #[test]
    fn embjsonl_round_trip(rows in labeled_source(20, 6)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.embjsonl");
        let records: Vec<WordEmbedding> = rows
            .iter()
            .enumerate()
            .map(|(i, (v, _))| WordEmbedding::new(&format!("w{i}"), "xx", v.clone()))
            .collect();
        let store = EmbeddingStore::from_records("xx", 6, records).unwrap();
        store.write(&path, None).unwrap();
        let back = EmbeddingStore::load(&path).unwrap();
        prop_assert_eq!(back.lang(), "xx");
        prop_assert_eq!(back.len(), store.len());
        for (a, b) in store.records().iter().zip(back.records()) {
            prop_assert_eq!(&a.word, &b.word);
            // nine significant digits on disk
            for (x, y) in a.vector.iter().zip(&b.vector) {
                prop_assert!((x - y).abs() <= 5e-9 * x.abs().max(1e-300));
            }
        }
        let again = dir.path().join("y.embjsonl");
        back.write(&again, None).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }
}
