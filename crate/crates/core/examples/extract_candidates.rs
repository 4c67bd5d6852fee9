// Candidate extraction from a small raw corpus.

use nounclass::corpus::{extract_candidates, ExtractConfig};

const CORPUS: &str = "Watu watu wazuri.\n\
K'adzamuhala k'adzamuhala ab ab.\n\
Akimbola na watoto, akimbola!\n";

fn main() {
    let (candidates, stats) = extract_candidates(CORPUS.as_bytes(), &ExtractConfig::default());
    for c in &candidates {
        println!("{:<14} {}", c.word, c.frequency);
    }
    println!(
        "{} sentences, {} tokens, {} types, {} candidates",
        stats.sentences, stats.tokens, stats.types, stats.candidates
    );
    for (rule, n) in &stats.dropped_by_rule {
        println!("  dropped by {rule}: {n}");
    }
}
