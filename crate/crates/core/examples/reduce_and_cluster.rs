// PCA to 50 dimensions and seeded K-means over a synthetic lexicon.

use nounclass::kmeans::{kmeans, KMeansConfig};
use nounclass::reduce::reduce_pca;
use nounclass::synth::{generate_pair, SynthSpec};

fn main() -> nounclass::Result<()> {
    let pair = generate_pair(&SynthSpec::preset("overlap60")?)?;
    let words: Vec<String> = pair.target.iter().map(|e| e.word.clone()).collect();
    let vectors: Vec<Vec<f64>> = pair.target.iter().map(|e| e.vector.clone()).collect();

    let reduced = reduce_pca(&words, &vectors, 50)?;
    let c = kmeans(&reduced.coords, &KMeansConfig::default())?;
    println!("{} points in {} dims, k = {}", reduced.len(), reduced.d, c.k());
    println!("inertia {:.4} after {} iterations (converged: {})", c.inertia, c.iterations, c.converged);
    println!("inertia per step: {:?}", c.inertia_history.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>());
    for (id, members) in c.members().iter().enumerate() {
        let sample: Vec<&str> = members.iter().take(3).map(|&i| words[i].as_str()).collect();
        println!("  cluster {id:>2}: {:>4} words, e.g. {}", members.len(), sample.join(" "));
    }
    Ok(())
}
