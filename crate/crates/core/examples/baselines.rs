// Frequency and random baselines.

use std::collections::BTreeMap;

use nounclass::ensemble::{frequency_baseline, random_baseline};
use nounclass::NounClass;

fn main() -> nounclass::Result<()> {
    let distribution = BTreeMap::from([(NounClass::Class(6), 50), (NounClass::Class(7), 30), (NounClass::Class(2), 20)]);
    let targets: Vec<String> = (0..12_000).map(|i| format!("w{i}")).collect();

    let freq = frequency_baseline(&distribution, &targets[..3])?;
    for p in &freq {
        println!("{} -> class {} ({:.2})", p.word, p.class, p.confidence);
    }

    let classes = (1..=12).map(NounClass::Class).collect();
    let random = random_baseline(&classes, &targets, 42)?;
    let mut counts: BTreeMap<NounClass, usize> = BTreeMap::new();
    for p in &random {
        *counts.entry(p.class).or_insert(0) += 1;
    }
    println!("random draw over 12 classes: {counts:?}");
    Ok(())
}
