// Loads an embedding dump with a duplicate and a non-finite record, then
// runs exact cosine queries.

use nounclass::{cosine, EmbeddingStore};

const DUMP: &str = r#"{"dim": 3, "lang": "sw", "count": 5}
{"word": "Watu", "vector": [1.0, 0.0, 0.0], "label": 2}
{"word": "watoto", "vector": [0.9, 0.1, 0.0], "label": 2}
{"word": "watu", "vector": [0.0, 1.0, 0.0], "label": 2}
{"word": "kitabu", "vector": [0.0, 0.2, 0.9], "label": 7}
{"word": "vitabu", "vector": [NaN, 0.0, 1.0], "label": 8}
"#;

fn main() -> nounclass::Result<()> {
    let path = std::env::temp_dir().join("nounclass-example.embjsonl");
    std::fs::write(&path, DUMP).expect("write scratch dump");
    let store = EmbeddingStore::load(&path)?;
    let w = store.warnings();
    println!("{} records, dim {}, {} duplicate, {} non-finite", store.len(), store.dim(), w.duplicates, w.non_finite);

    println!("cos((1,1),(1,0)) = {:.6}", cosine(&[1.0, 1.0], &[1.0, 0.0])?);
    let found = store.nearest(&[1.0, 0.05, 0.0], 5)?;
    for hit in &found.hits {
        println!("  {:<8} {:.4}", store.get(hit.index).word, hit.similarity);
    }
    println!("short result: {}", found.short);
    Ok(())
}
