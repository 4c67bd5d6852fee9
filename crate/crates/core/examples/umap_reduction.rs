// Neighbor-embedding reduction; needs `--features umap`.

use nounclass::kmeans::{kmeans, KMeansConfig};
use nounclass::reduce::{reduce_umap, UmapParams};
use nounclass::synth::{generate_pair, SynthSpec};

fn main() -> nounclass::Result<()> {
    let pair = generate_pair(&SynthSpec::preset("tiny")?)?;
    let words: Vec<String> = pair.target.iter().map(|e| e.word.clone()).collect();
    let vectors: Vec<Vec<f64>> = pair.target.iter().map(|e| e.vector.clone()).collect();
    let reduced = reduce_umap(&words, &vectors, &UmapParams { d: 2, ..UmapParams::default() })?;
    let c = kmeans(&reduced.coords, &KMeansConfig { k: 4, ..Default::default() })?;
    for (id, m) in c.members().iter().enumerate() {
        let sample: Vec<&str> = m.iter().take(4).map(|&i| words[i].as_str()).collect();
        println!("cluster {id}: {} words, e.g. {}", m.len(), sample.join(" "));
    }
    Ok(())
}
