// Generates the innovation preset and writes every file the pipeline
// consumes into a scratch directory.

use nounclass::synth::{files, generate_pair, SynthSpec};

fn main() -> nounclass::Result<()> {
    let spec = SynthSpec::preset("innovation")?;
    let pair = generate_pair(&spec)?;
    let plant = &pair.manifest.innovations[0];
    println!(
        "{} source words, {} target words, {} cognates",
        pair.source.len(),
        pair.target.len(),
        pair.manifest.cognates.len()
    );
    println!(
        "plant {}- -> {}-: {} of {} class {} words, e.g. {}",
        plant.replaced_prefix,
        plant.novel_prefix,
        plant.words.len(),
        plant.class_size,
        plant.class,
        plant.words[0]
    );

    let dir = std::env::temp_dir().join("nounclass-example-synth");
    pair.write_to_dir(&dir)?;
    for name in [files::SOURCE, files::TARGET, files::CORPUS, files::MANIFEST, files::INVENTORY] {
        let bytes = std::fs::metadata(dir.join(name)).map(|m| m.len()).unwrap_or(0);
        println!("  {name:<24} {bytes:>9} bytes");
    }
    Ok(())
}
