// Label accuracy, form consistency and variant share.

use std::collections::BTreeMap;

use nounclass::report::{internal_consistency, label_accuracy, variant_share, ReferenceValues};
use nounclass::{Method, NounClass, Prediction};

fn main() {
    let preds = vec![
        Prediction::new("watu", 2, 0.9, Method::Transfer),
        Prediction::new("akimbola", 2, 0.9, Method::Transfer),
        Prediction::new("kitabu", 6, 0.8, Method::Transfer),
        Prediction::new("maji", 6, 0.8, Method::Transfer),
    ];
    let gold: BTreeMap<String, NounClass> = [("watu", 2), ("akimbola", 2), ("kitabu", 7), ("maji", 6)]
        .into_iter()
        .map(|(w, c)| (w.to_string(), NounClass::Class(c)))
        .collect();
    if let Some(acc) = label_accuracy(&preds, &gold) {
        println!("accuracy {:.1}% ({}/{})", acc.accuracy, acc.correct, acc.compared);
        for cell in &acc.confusion {
            println!("  gold {:<2} predicted {:<2} x{}", cell.gold, cell.predicted, cell.count);
        }
    }

    let forms: BTreeMap<String, String> = [("watu", "watu"), ("akimbola", "akimbila"), ("kitabu", "chitabu")]
        .into_iter()
        .map(|(w, f)| (w.to_string(), f.to_string()))
        .collect();
    let c = internal_consistency(&preds, &forms);
    println!("form consistency {:?} ({} of {}, {} without form)", c.percent, c.matched, c.compared, c.missing_form);

    println!("a- share of class 2: {:?}", variant_share(150, 300));
    let reference = ReferenceValues::bundled();
    println!("reference agreement (non-normative): {:?}", reference.get("agreement"));
}
