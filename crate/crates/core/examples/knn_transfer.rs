// KNN transfer on a hand-built source index: the {6,6,6,7,9} vote and a
// threshold filter.

use nounclass::transfer::{classify_corpus, classify_word, TransferConfig};
use nounclass::{EmbeddingStore, LabeledIndex, NounClass, WordEmbedding};

/// Unit vector at `deg` degrees in the plane.
fn at(deg: f64) -> Vec<f64> {
    let r = deg.to_radians();
    vec![r.cos(), r.sin()]
}

fn main() -> nounclass::Result<()> {
    let sims: [(&str, f64, u16); 5] = [
        ("maembe", 0.9, 6),
        ("matunda", 0.8, 6),
        ("magari", 0.7, 6),
        ("kitabu", 0.85, 7),
        ("nyumba", 0.75, 9),
    ];
    let records = sims
        .iter()
        .map(|&(w, s, c)| WordEmbedding::new(w, "sw", at(s.acos().to_degrees())).labeled(NounClass::Class(c)))
        .collect();
    let index = LabeledIndex::new(EmbeddingStore::from_records("sw", 2, records)?, None)?;

    let target = WordEmbedding::new("mavembe", "gi", at(0.0));
    let p = classify_word(&target, &index, &TransferConfig::default())?;
    println!(
        "{} -> class {} vote_conf {:.2} sim_conf {:.2} confidence {:.2}",
        p.word, p.predicted_class, p.vote_conf, p.sim_conf, p.confidence
    );
    for n in &p.neighbors {
        println!("  {:<8} class {:<2} sim {:.2}", n.word, n.class, n.similarity);
    }

    let run = classify_corpus(&[target, WordEmbedding::new("zz", "gi", at(10.0))], &index, &TransferConfig::default())?;
    let s = run.summary(&TransferConfig::default());
    println!("attempted {} retained {} at threshold {:.2}", s.attempted, s.retained, s.threshold);
    Ok(())
}
