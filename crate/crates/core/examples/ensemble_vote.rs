// Weighted voting on the three reference cases, plus the agreement rate.

use nounclass::ensemble::{agreement_rate, ensemble_vote, EnsembleConfig};
use nounclass::{Method, Prediction};

fn main() -> nounclass::Result<()> {
    let transfer = vec![
        Prediction::new("maembe", 6, 0.8, Method::Transfer),
        Prediction::new("kitabu", 6, 0.8, Method::Transfer),
        Prediction::new("watu", 2, 0.95, Method::Transfer),
    ];
    let clustering = vec![
        Prediction::new("maembe", 6, 0.9, Method::Clustering),
        Prediction::new("kitabu", 7, 0.9, Method::Clustering),
    ];
    let out = ensemble_vote(&transfer, &clustering, &EnsembleConfig::default())?;
    for r in out.accepted.iter().chain(&out.rejected) {
        println!(
            "{:<7} class {} raw {:.2} combined {:.4} agreed {:<5} {}",
            r.word,
            r.final_class,
            r.raw_score,
            r.combined_confidence,
            r.agreed,
            r.reason.map_or("accepted".to_string(), |why| format!("rejected ({why:?})"))
        );
    }
    if let Some(a) = agreement_rate(&transfer, &clustering) {
        println!("agreement {:.2}% over {} shared words", a.rate, a.shared);
    }
    Ok(())
}
