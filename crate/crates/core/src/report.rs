//! Summary statistics, evaluation metrics and the human-readable report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::class::NounClass;
use crate::ensemble::{Agreement, EnsembleOutput};
use crate::prediction::{Method, Prediction};
use crate::prefix::{ClusterProfile, InnovationReason, InnovationReport};
use crate::transfer::TransferSummary;

const REFERENCE_VALUES: &str = include_str!("../data/reference_values.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub key: String,
    pub description: String,
    pub value: f64,
    pub unit: String,
}

/// Full-scale reference figures for side-by-side display. Not targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValues {
    pub non_normative: bool,
    pub note: String,
    pub values: Vec<ReferenceValue>,
}

impl ReferenceValues {
    pub fn bundled() -> Self {
        serde_json::from_str(REFERENCE_VALUES).expect("bundled reference values parse")
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.iter().find(|v| v.key == key).map(|v| v.value)
    }
}

fn percent(part: usize, whole: usize) -> Option<f64> {
    (whole > 0).then(|| 100.0 * part as f64 / whole as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub class: NounClass,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRow {
    pub cluster_id: usize,
    pub size: usize,
    pub prefix: String,
    pub consistency: f64,
    pub class: NounClass,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscoverySummary {
    pub words_scored: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub accepted_agreed: usize,
    /// Predictions each method fed into the ensemble.
    pub inputs_per_method: BTreeMap<Method, usize>,
    /// Accepted words each method voted on.
    pub accepted_per_method: BTreeMap<Method, usize>,
    /// Accepted words per final class; shares are of `accepted`.
    pub class_distribution: Vec<ClassShare>,
    pub clusters: Vec<ClusterRow>,
    pub innovations: Vec<InnovationReport>,
}

/// Counts per method, the accepted class distribution, the cluster table
/// and the innovation list. Empty input gives a zeroed summary.
pub fn discovery_summary(
    output: &EnsembleOutput,
    profiles: &[ClusterProfile],
    innovations: &[InnovationReport],
) -> DiscoverySummary {
    let mut inputs_per_method = BTreeMap::new();
    let mut accepted_per_method = BTreeMap::new();
    let mut per_class: BTreeMap<NounClass, usize> = BTreeMap::new();
    for r in output.accepted.iter().chain(&output.rejected) {
        for m in r.per_method.keys() {
            *inputs_per_method.entry(*m).or_insert(0) += 1;
        }
    }
    for r in &output.accepted {
        for m in r.per_method.keys() {
            *accepted_per_method.entry(*m).or_insert(0) += 1;
        }
        *per_class.entry(r.final_class).or_insert(0) += 1;
    }
    let accepted = output.accepted.len();
    let class_distribution = per_class
        .into_iter()
        .map(|(class, count)| ClassShare {
            class,
            count,
            percent: percent(count, accepted).unwrap_or(0.0),
        })
        .collect();
    let mut clusters: Vec<ClusterRow> = profiles
        .iter()
        .map(|p| ClusterRow {
            cluster_id: p.cluster_id,
            size: p.size,
            prefix: p.dominant_prefix.clone(),
            consistency: p.consistency,
            class: p.mapped_class.unwrap_or(NounClass::Unknown),
        })
        .collect();
    clusters.sort_by_key(|c| c.cluster_id);
    DiscoverySummary {
        words_scored: accepted + output.rejected.len(),
        accepted,
        rejected: output.rejected.len(),
        accepted_agreed: output.accepted.iter().filter(|r| r.agreed).count(),
        inputs_per_method,
        accepted_per_method,
        class_distribution,
        clusters,
        innovations: innovations.to_vec(),
    }
}

/// Share of a class's words carried by one prefix variant, e.g. a- words
/// out of all class 2 words.
pub fn variant_share(variant_words: usize, class_words: usize) -> Option<f64> {
    percent(variant_words, class_words)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub compared: usize,
    pub matched: usize,
    /// Predicted words with no generated form.
    pub missing_form: usize,
    pub percent: Option<f64>,
}

/// Percentage of predicted words whose generated surface form equals the
/// word itself.
pub fn internal_consistency(predictions: &[Prediction], generated: &BTreeMap<String, String>) -> ConsistencyResult {
    let mut compared = 0;
    let mut matched = 0;
    let mut missing_form = 0;
    for p in predictions {
        match generated.get(&p.word) {
            Some(form) => {
                compared += 1;
                if *form == p.word {
                    matched += 1;
                }
            }
            None => missing_form += 1,
        }
    }
    ConsistencyResult {
        compared,
        matched,
        missing_form,
        percent: percent(matched, compared),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionCell {
    pub gold: NounClass,
    pub predicted: NounClass,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelAccuracy {
    pub compared: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Non-zero (gold, predicted) counts, ordered by gold then predicted.
    pub confusion: Vec<ConfusionCell>,
}

/// Exact-match accuracy over words present in both inputs. `None` when the
/// two share no word.
pub fn label_accuracy(predictions: &[Prediction], gold: &BTreeMap<String, NounClass>) -> Option<LabelAccuracy> {
    let mut seen = std::collections::BTreeSet::new();
    let mut cells: BTreeMap<(NounClass, NounClass), usize> = BTreeMap::new();
    for p in predictions {
        if let Some(&g) = gold.get(&p.word) {
            if seen.insert(p.word.as_str()) {
                *cells.entry((g, p.class)).or_insert(0) += 1;
            }
        }
    }
    let compared = seen.len();
    let correct = cells.iter().filter(|((g, p), _)| g == p).map(|(_, n)| n).sum();
    Some(LabelAccuracy {
        compared,
        correct,
        accuracy: percent(correct, compared)?,
        confusion: cells
            .into_iter()
            .map(|((gold, predicted), count)| ConfusionCell { gold, predicted, count })
            .collect(),
    })
}

/// Everything the `report` stage writes to `summary.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub discovery: DiscoverySummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferSummary>,
    /// `None` when the methods share no word.
    pub agreement: Option<Agreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<LabelAccuracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub internal_consistency: Option<ConsistencyResult>,
}

fn opt_pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}%"))
}

impl Report {
    /// Plain-text report with a reference column for comparable figures.
    pub fn render_text(&self, reference: &ReferenceValues) -> String {
        let d = &self.discovery;
        let mut s = String::new();
        let refv = |key: &str| {
            reference
                .get(key)
                .map_or_else(String::new, |v| format!("   (reference: {v})"))
        };
        let _ = writeln!(s, "noun class discovery report");
        let _ = writeln!(s, "===========================");
        let _ = writeln!(s);
        let _ = writeln!(s, "words scored      {}", d.words_scored);
        let _ = writeln!(s, "accepted          {}{}", d.accepted, refv("discovered_labels"));
        let _ = writeln!(s, "rejected          {}", d.rejected);
        let _ = writeln!(s, "accepted, agreed  {}", d.accepted_agreed);
        for (m, n) in &d.inputs_per_method {
            let acc = d.accepted_per_method.get(m).copied().unwrap_or(0);
            let _ = writeln!(s, "  from {:<12} {n} predictions, {acc} in accepted words", m.as_str());
        }
        if let Some(t) = &self.transfer {
            let _ = writeln!(
                s,
                "transfer          {} attempted, {} retained at threshold {:.2}, mean confidence {}",
                t.attempted,
                t.retained,
                t.threshold,
                t.mean_confidence_retained.map_or("n/a".into(), |c| format!("{c:.3}"))
            );
        }
        let _ = writeln!(
            s,
            "agreement         {}{}",
            opt_pct(self.agreement.map(|a| a.rate)),
            refv("agreement")
        );
        if let Some(a) = &self.accuracy {
            let _ = writeln!(s, "label accuracy    {:.1}% ({}/{})", a.accuracy, a.correct, a.compared);
        }
        if let Some(c) = &self.internal_consistency {
            let _ = writeln!(
                s,
                "form consistency  {} ({}/{}, {} without form){}",
                opt_pct(c.percent),
                c.matched,
                c.compared,
                c.missing_form,
                refv("internal_consistency")
            );
        }

        let _ = writeln!(s);
        let _ = writeln!(s, "class distribution (accepted)");
        for c in &d.class_distribution {
            let _ = writeln!(s, "  class {:<8} {:>6}  {:>5.1}%", c.class.to_string(), c.count, c.percent);
        }

        let _ = writeln!(s);
        let _ = writeln!(s, "clusters");
        let _ = writeln!(s, "  {:>3}  {:>6}  {:<6} {:>7}  class", "id", "size", "prefix", "consist");
        for c in &d.clusters {
            let _ = writeln!(
                s,
                "  {:>3}  {:>6}  {:<6} {:>6.1}%  {}",
                c.cluster_id, c.size, c.prefix, c.consistency, c.class
            );
        }

        let _ = writeln!(s);
        if d.innovations.is_empty() {
            let _ = writeln!(s, "innovations: none");
        } else {
            let _ = writeln!(s, "innovations");
            for i in &d.innovations {
                let why = match i.reason {
                    InnovationReason::NotInInventory => "prefix not in inventory".to_string(),
                    InnovationReason::UnexpectedClass { expected, mapped } => {
                        format!("maps to class {mapped}, expected {expected}")
                    }
                };
                let _ = writeln!(
                    s,
                    "  cluster {} prefix {}- size {} consistency {:.1}%: {why}",
                    i.cluster_id, i.prefix, i.size, i.consistency
                );
                let _ = writeln!(s, "    e.g. {}", i.exemplars.join(", "));
            }
        }

        let _ = writeln!(s);
        let _ = writeln!(s, "reference figures (non-normative)");
        let _ = writeln!(s, "  {}", reference.note);
        for v in &reference.values {
            let _ = writeln!(s, "  {:<28} {:>8} {}", v.key, v.value, v.unit);
        }
        s
    }
}

const PALETTE: &[&str] = &[
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939",
];

/// Static SVG scatter of 2-D points colored by cluster, with a legend of
/// `labels[cluster]`.
pub fn scatter_svg(points: &[[f64; 2]], assignments: &[usize], labels: &[String]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 24.0;
    const LEGEND: f64 = 160.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let (sx, sy) = ((W - 2.0 * PAD) / span(x0, x1), (H - 2.0 * PAD) / span(y0, y1));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{H}" viewBox="0 0 {} {H}">"#,
        W + LEGEND,
        W + LEGEND
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, &c) in points.iter().zip(assignments) {
        let cx = PAD + (p[0] - x0) * sx;
        let cy = H - PAD - (p[1] - y0) * sy;
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="2" fill="{}" fill-opacity="0.7"/>"#,
            PALETTE[c % PALETTE.len()]
        );
    }
    for (c, label) in labels.iter().enumerate() {
        let y = PAD + 16.0 * c as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="11">{}</text>"#,
            W + 4.0,
            y,
            PALETTE[c % PALETTE.len()],
            W + 20.0,
            y + 9.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
