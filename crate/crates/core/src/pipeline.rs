//! File-based stages over a workspace directory.
//!
//! Each stage reads its inputs from files and writes its artifacts into the
//! workspace, so any stage can be rerun alone. [`run_pipeline`] chains
//! extract, transfer, cluster, map, ensemble and report. Output bytes
//! depend only on inputs and configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::class::{ClassUniverse, NounClass};
use crate::corpus::{extract_candidates, CorpusStats, ExtractConfig};
use crate::embedding::{EmbeddingStore, LabeledIndex, LabeledParadigmSet};
use crate::ensemble::{
    agreement_rate, ensemble_vote, frequency_baseline, random_baseline, EnsembleConfig, EnsembleOutput,
    EnsembleResult, EnsembleSummary,
};
use crate::error::{Error, Result};
use crate::io::{read_json, read_jsonl, read_word_list, write_json, write_jsonl, write_word_list, Meta};
use crate::kmeans::{kmeans, KMeansConfig, RNG_NAME};
use crate::prediction::{Method, Prediction};
use crate::prefix::{
    cluster_predictions, detect_innovations, profile_all, ClusterPrediction, ClusterProfile, InnovationCriteria,
    InnovationReport, PrefixInventory,
};
use crate::reduce::{reduce_pca, reduce_umap, ReductionInfo, ReductionMethod, UmapParams, DEFAULT_DIM};
use crate::report::{
    discovery_summary, internal_consistency, label_accuracy, scatter_svg, Report, ReferenceValues,
};
use crate::transfer::{classify_corpus, TransferConfig, TransferPrediction, TransferSummary};

/// Artifact names inside a workspace.
pub mod files {
    pub const CANDIDATES: &str = "candidates.txt";
    pub const CORPUS_STATS: &str = "corpus_stats.json";
    pub const TRANSFER: &str = "transfer.jsonl";
    pub const TRANSFER_SUMMARY: &str = "transfer_summary.json";
    pub const CLUSTERS: &str = "clusters.jsonl";
    pub const PROFILES: &str = "profiles.jsonl";
    pub const INNOVATIONS: &str = "innovations.jsonl";
    pub const CLUSTER_PREDICTIONS: &str = "cluster_predictions.jsonl";
    pub const ENSEMBLE_ACCEPTED: &str = "ensemble_accepted.jsonl";
    pub const ENSEMBLE_REJECTED: &str = "ensemble_rejected.jsonl";
    pub const ENSEMBLE_SUMMARY: &str = "ensemble_summary.json";
    pub const REPORT: &str = "report.txt";
    pub const SUMMARY: &str = "summary.json";
    pub const PLOT: &str = "clusters.svg";
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workspace {
    root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// How a path is recorded in metadata: relative when it lies inside
    /// the workspace, so identical runs in different directories match.
    pub fn label(&self, p: &Path) -> String {
        p.strip_prefix(&self.root).unwrap_or(p).display().to_string()
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Writes `candidates.txt` (most frequent first) and `corpus_stats.json`.
pub fn stage_extract(corpus: &Path, config: &ExtractConfig, ws: &Workspace) -> Result<CorpusStats> {
    let bytes = std::fs::read(corpus).map_err(|e| Error::io(corpus, e))?;
    let (candidates, stats) = extract_candidates(&bytes, config);
    let meta = Meta::new("extract")
        .flag("corpus", ws.label(corpus))
        .flag("min_len", config.min_len)
        .flag("min_freq", config.min_freq)
        .flag("stoplist_size", config.stoplist.len())
        .info("candidates", stats.candidates);
    let words: Vec<String> = candidates.into_iter().map(|c| c.word).collect();
    write_word_list(ws.path(files::CANDIDATES), &meta, &words)?;
    write_json(ws.path(files::CORPUS_STATS), &stats)?;
    Ok(stats)
}

/// Loads a labeled source index. Labels come from the dump itself, the
/// paradigm file, or both.
pub fn load_source(source: &Path, paradigms: Option<&Path>) -> Result<LabeledIndex> {
    let store = EmbeddingStore::load(source)?;
    let set = paradigms.map(LabeledParadigmSet::load).transpose()?;
    LabeledIndex::new(store, set.as_ref())
}

/// Classifies every target record; writes retained predictions to
/// `transfer.jsonl` and counts to `transfer_summary.json`.
pub fn stage_transfer(
    source: &Path,
    paradigms: Option<&Path>,
    target: &Path,
    config: &TransferConfig,
    ws: &Workspace,
) -> Result<TransferSummary> {
    let index = load_source(source, paradigms)?;
    let targets = EmbeddingStore::load(target)?;
    if index.store().dim() != targets.dim() {
        return Err(Error::DimensionMismatch {
            expected: index.store().dim(),
            found: targets.dim(),
            context: format!("target dump {}", ws.label(target)),
        });
    }
    let run = classify_corpus(targets.records(), &index, config)?;
    let summary = run.summary(config);
    let meta = Meta::new("transfer")
        .flag("source", ws.label(source))
        .flag("paradigms", paradigms.map(|p| ws.label(p)))
        .flag("target", ws.label(target))
        .flag("k", config.k)
        .flag("threshold", config.threshold)
        .flag("exclude_self", config.exclude_self)
        .info("attempted", summary.attempted)
        .info("retained", summary.retained)
        .info("skipped", &run.skipped);
    write_jsonl(ws.path(files::TRANSFER), &meta, &run.retained)?;
    write_json(ws.path(files::TRANSFER_SUMMARY), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterConfig {
    pub reduction: ReductionMethod,
    pub dim: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub kmeans: KMeansConfig,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let umap = UmapParams::default();
        Self {
            reduction: ReductionMethod::Pca,
            dim: DEFAULT_DIM,
            n_neighbors: umap.n_neighbors,
            min_dist: umap.min_dist,
            kmeans: KMeansConfig::default(),
        }
    }
}

/// One row of `clusters.jsonl`. `x` and `y` are the first two reduced
/// coordinates, kept for plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub word: String,
    pub cluster: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRunInfo {
    pub k: usize,
    pub seed: u64,
    pub rng: String,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    pub points: usize,
    pub reduction: ReductionInfo,
}

/// Reduces and clusters the target words listed in `candidates` (every
/// target word when `None`). Words without an embedding are skipped.
pub fn stage_cluster(
    target: &Path,
    candidates: Option<&Path>,
    config: &ClusterConfig,
    ws: &Workspace,
) -> Result<ClusterRunInfo> {
    let mut store = EmbeddingStore::load(target)?;
    if let Some(path) = candidates {
        let wanted: BTreeSet<String> = read_word_list(path)?.into_iter().collect();
        store = store.retain_words(&wanted);
    }
    if store.is_empty() {
        return Err(Error::EmptyInput("no candidate word has an embedding".into()));
    }
    let words: Vec<String> = store.records().iter().map(|r| r.word.clone()).collect();
    let vectors: Vec<Vec<f64>> = store.records().iter().map(|r| r.vector.clone()).collect();
    let (reduced, info) = match config.reduction {
        ReductionMethod::Pca => {
            let r = reduce_pca(&words, &vectors, config.dim)?;
            let info = r.info();
            (r, info)
        }
        ReductionMethod::Umap => {
            let params = UmapParams {
                d: config.dim,
                n_neighbors: config.n_neighbors,
                min_dist: config.min_dist,
                seed: config.kmeans.seed,
                ..UmapParams::default()
            };
            let r = reduce_umap(&words, &vectors, &params)?;
            let info = ReductionInfo {
                n_neighbors: Some(params.n_neighbors),
                min_dist: Some(params.min_dist),
                seed: Some(params.seed),
                ..r.info()
            };
            (r, info)
        }
    };
    let clustering = kmeans(&reduced.coords, &config.kmeans)?;
    let run = ClusterRunInfo {
        k: clustering.k(),
        seed: clustering.seed,
        rng: RNG_NAME.to_string(),
        inertia: clustering.inertia,
        iterations: clustering.iterations,
        converged: clustering.converged,
        points: words.len(),
        reduction: info,
    };
    let meta = Meta::new("cluster")
        .seed(config.kmeans.seed)
        .flag("target", ws.label(target))
        .flag("candidates", candidates.map(|p| ws.label(p)))
        .flag("reduction", config.reduction)
        .flag("dim", config.dim)
        .flag("k", config.kmeans.k)
        .flag("max_iter", config.kmeans.max_iter)
        .flag("tol", config.kmeans.tol)
        .info("k", run.k)
        .info("seed", run.seed)
        .info("rng", &run.rng)
        .info("inertia", run.inertia)
        .info("iterations", run.iterations)
        .info("converged", run.converged)
        .info("reduction", &run.reduction);
    let records: Vec<ClusterRecord> = words
        .iter()
        .zip(&clustering.assignments)
        .zip(&reduced.coords)
        .map(|((w, &c), xy)| ClusterRecord {
            word: w.clone(),
            cluster: c,
            x: xy.first().copied().unwrap_or(0.0),
            y: xy.get(1).copied().unwrap_or(0.0),
        })
        .collect();
    write_jsonl(ws.path(files::CLUSTERS), &meta, &records)?;
    Ok(run)
}

/// Loads a clusters artifact and groups words by cluster id.
pub fn read_clusters(path: &Path) -> Result<(Vec<ClusterRecord>, Vec<Vec<String>>)> {
    let (meta, records): (_, Vec<ClusterRecord>) = read_jsonl(path)?;
    let k_meta = meta
        .and_then(|m| m.info.get("k").and_then(|v| v.as_u64()))
        .map(|k| k as usize);
    let k = records.iter().map(|r| r.cluster + 1).max().unwrap_or(0).max(k_meta.unwrap_or(0));
    let mut members = vec![Vec::new(); k];
    for r in &records {
        members[r.cluster].push(r.word.clone());
    }
    Ok((records, members))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSummary {
    pub clusters: usize,
    pub mapped: usize,
    pub unknown: usize,
    pub innovations: usize,
}

/// Profiles and maps every cluster, detects innovations and writes
/// per-word cluster predictions. Exemplars are ranked by position in
/// `candidates` (most frequent first) when given.
pub fn stage_map(
    clusters: &Path,
    inventory: &PrefixInventory,
    criteria: &InnovationCriteria,
    candidates: Option<&Path>,
    ws: &Workspace,
) -> Result<MapSummary> {
    let (records, members) = read_clusters(clusters)?;
    let profiles = profile_all(&members, inventory)?;
    let frequency: Option<HashMap<String, usize>> = candidates
        .map(|p| {
            read_word_list(p).map(|ws| {
                let n = ws.len();
                ws.into_iter().enumerate().map(|(i, w)| (w, n - i)).collect()
            })
        })
        .transpose()?;
    let innovations = detect_innovations(&profiles, &members, criteria, frequency.as_ref());
    let words: Vec<String> = records.iter().map(|r| r.word.clone()).collect();
    let assignments: Vec<usize> = records.iter().map(|r| r.cluster).collect();
    let predictions = cluster_predictions(&words, &assignments, &profiles)?;

    let meta = Meta::new("map")
        .flag("clusters", ws.label(clusters))
        .flag("inventory_size", inventory.entries().count())
        .flag("min_consistency", criteria.min_consistency)
        .flag("min_size", criteria.min_size)
        .flag("expected", &criteria.expected);
    write_jsonl(ws.path(files::PROFILES), &meta, &profiles)?;
    write_jsonl(ws.path(files::INNOVATIONS), &meta, &innovations)?;
    write_jsonl(ws.path(files::CLUSTER_PREDICTIONS), &meta, &predictions)?;
    let unknown = profiles
        .iter()
        .filter(|p| p.mapped_class == Some(NounClass::Unknown))
        .count();
    Ok(MapSummary {
        clusters: profiles.len(),
        mapped: profiles.len() - unknown,
        unknown,
        innovations: innovations.len(),
    })
}

/// Reads any prediction-shaped artifact (transfer, cluster or baseline
/// output) as plain predictions.
pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    Ok(read_jsonl(path)?.1)
}

pub fn stage_ensemble(
    transfer: &Path,
    clustering: &Path,
    config: &EnsembleConfig,
    ws: &Workspace,
) -> Result<EnsembleSummary> {
    let t = read_predictions(transfer)?;
    let c = read_predictions(clustering)?;
    let out = ensemble_vote(&t, &c, config)?;
    let summary = out.summary(config);
    let meta = Meta::new("ensemble")
        .flag("transfer", ws.label(transfer))
        .flag("clustering", ws.label(clustering))
        .flag("weights", config.weights.as_map())
        .flag("min_conf", config.min_conf)
        .flag("require_multi", config.require_multi)
        .info("accepted", summary.accepted)
        .info("rejected", summary.rejected);
    write_jsonl(ws.path(files::ENSEMBLE_ACCEPTED), &meta, &out.accepted)?;
    write_jsonl(ws.path(files::ENSEMBLE_REJECTED), &meta, &out.rejected)?;
    write_json(ws.path(files::ENSEMBLE_SUMMARY), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportInputs {
    /// Gold labels in paradigm format.
    pub gold: Option<PathBuf>,
    /// Generated surface forms, lines `{"word", "form"}`.
    pub generated_forms: Option<PathBuf>,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedForm {
    pub word: String,
    pub form: String,
}

fn optional<T>(path: PathBuf, load: impl FnOnce(&Path) -> Result<T>) -> Result<Option<T>> {
    if path.exists() {
        load(&path).map(Some)
    } else {
        Ok(None)
    }
}

/// Builds the report from whatever stage artifacts the workspace holds and
/// writes `report.txt`, `summary.json` and optionally `clusters.svg`.
pub fn stage_report(ws: &Workspace, inputs: &ReportInputs) -> Result<Report> {
    let accepted: Vec<EnsembleResult> =
        optional(ws.path(files::ENSEMBLE_ACCEPTED), |p| Ok(read_jsonl(p)?.1))?.unwrap_or_default();
    let rejected: Vec<EnsembleResult> =
        optional(ws.path(files::ENSEMBLE_REJECTED), |p| Ok(read_jsonl(p)?.1))?.unwrap_or_default();
    let profiles: Vec<ClusterProfile> =
        optional(ws.path(files::PROFILES), |p| Ok(read_jsonl(p)?.1))?.unwrap_or_default();
    let innovations: Vec<InnovationReport> =
        optional(ws.path(files::INNOVATIONS), |p| Ok(read_jsonl(p)?.1))?.unwrap_or_default();
    let transfer_preds = optional(ws.path(files::TRANSFER), read_predictions)?.unwrap_or_default();
    let cluster_preds = optional(ws.path(files::CLUSTER_PREDICTIONS), read_predictions)?.unwrap_or_default();
    let transfer: Option<TransferSummary> = optional(ws.path(files::TRANSFER_SUMMARY), |p| read_json(p))?;

    let output = EnsembleOutput { accepted, rejected };
    let final_preds: Vec<Prediction> = output
        .accepted
        .iter()
        .map(|r| Prediction::new(r.word.clone(), r.final_class, r.combined_confidence, Method::Transfer))
        .collect();
    let accuracy = match &inputs.gold {
        Some(path) => {
            let gold: BTreeMap<String, NounClass> = LabeledParadigmSet::load(path)?.entries().iter().cloned().collect();
            label_accuracy(&final_preds, &gold)
        }
        None => None,
    };
    let consistency = match &inputs.generated_forms {
        Some(path) => {
            let forms: Vec<GeneratedForm> = read_jsonl(path)?.1;
            let forms: BTreeMap<String, String> = forms.into_iter().map(|f| (f.word, f.form)).collect();
            Some(internal_consistency(&final_preds, &forms))
        }
        None => None,
    };
    let report = Report {
        discovery: discovery_summary(&output, &profiles, &innovations),
        transfer,
        agreement: agreement_rate(&transfer_preds, &cluster_preds),
        accuracy,
        internal_consistency: consistency,
    };
    let text = report.render_text(&ReferenceValues::bundled());
    let path = ws.path(files::REPORT);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    write_json(ws.path(files::SUMMARY), &report)?;

    if inputs.plot {
        let clusters = ws.path(files::CLUSTERS);
        if clusters.exists() {
            let (records, members) = read_clusters(&clusters)?;
            let by_id: HashMap<usize, &ClusterProfile> = profiles.iter().map(|p| (p.cluster_id, p)).collect();
            let labels: Vec<String> = (0..members.len())
                .map(|c| match by_id.get(&c) {
                    Some(p) => format!(
                        "{c}: {}- class {} ({:.0}%)",
                        p.dominant_prefix,
                        p.mapped_class.unwrap_or(NounClass::Unknown),
                        p.consistency
                    ),
                    None => format!("{c}: empty"),
                })
                .collect();
            let points: Vec<[f64; 2]> = records.iter().map(|r| [r.x, r.y]).collect();
            let assignments: Vec<usize> = records.iter().map(|r| r.cluster).collect();
            let svg = scatter_svg(&points, &assignments, &labels);
            let path = ws.path(files::PLOT);
            std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Frequency,
    Random,
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency" => Ok(Self::Frequency),
            "random" => Ok(Self::Random),
            other => Err(Error::Config(format!("unknown baseline `{other}`"))),
        }
    }
}

/// Baseline predictions for every word in `targets`, using the source
/// label distribution. Written to `out`.
pub fn stage_baseline(
    kind: BaselineKind,
    source: &Path,
    paradigms: Option<&Path>,
    targets: &[String],
    seed: u64,
    out: &Path,
) -> Result<Vec<Prediction>> {
    let index = load_source(source, paradigms)?;
    let distribution = index.class_distribution();
    let predictions = match kind {
        BaselineKind::Frequency => frequency_baseline(&distribution, targets)?,
        BaselineKind::Random => random_baseline(&distribution.keys().copied().collect(), targets, seed)?,
    };
    let mut meta = Meta::new("baseline")
        .flag("kind", kind)
        .flag("source", display(source))
        .flag("paradigms", paradigms.map(display));
    if kind == BaselineKind::Random {
        meta = meta.seed(seed);
    }
    write_jsonl(out, &meta, &predictions)?;
    Ok(predictions)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineInputs {
    pub source: PathBuf,
    pub source_paradigms: Option<PathBuf>,
    pub target: PathBuf,
    /// Without a corpus every target word is clustered.
    pub corpus: Option<PathBuf>,
    /// Bundled Bantu inventory when `None`.
    pub inventory: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub extract: ExtractConfig,
    pub transfer: TransferConfig,
    pub cluster: ClusterConfig,
    pub innovation: InnovationCriteria,
    pub ensemble: EnsembleConfig,
    pub report: ReportInputs,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            extract: ExtractConfig::default(),
            transfer: TransferConfig::default(),
            cluster: ClusterConfig::default(),
            innovation: InnovationCriteria::default(),
            ensemble: EnsembleConfig::default(),
            report: ReportInputs {
                plot: true,
                ..ReportInputs::default()
            },
        }
    }
}

/// Loads an inventory file, or the bundled Bantu inventory.
pub fn load_inventory(path: Option<&Path>) -> Result<PrefixInventory> {
    match path {
        Some(p) => PrefixInventory::load(p, ClassUniverse::bantu()),
        None => Ok(PrefixInventory::bantu_default()),
    }
}

/// Runs every stage in order and returns the final report.
pub fn run_pipeline(inputs: &PipelineInputs, config: &PipelineConfig, ws: &Workspace) -> Result<Report> {
    let candidates = match &inputs.corpus {
        Some(corpus) => {
            stage_extract(corpus, &config.extract, ws)?;
            Some(ws.path(files::CANDIDATES))
        }
        None => None,
    };
    stage_transfer(
        &inputs.source,
        inputs.source_paradigms.as_deref(),
        &inputs.target,
        &config.transfer,
        ws,
    )?;
    stage_cluster(&inputs.target, candidates.as_deref(), &config.cluster, ws)?;
    let inventory = load_inventory(inputs.inventory.as_deref())?;
    stage_map(
        &ws.path(files::CLUSTERS),
        &inventory,
        &config.innovation,
        candidates.as_deref(),
        ws,
    )?;
    stage_ensemble(
        &ws.path(files::TRANSFER),
        &ws.path(files::CLUSTER_PREDICTIONS),
        &config.ensemble,
        ws,
    )?;
    stage_report(ws, &config.report)
}

/// Transfer predictions as written by [`stage_transfer`].
pub fn read_transfer(path: &Path) -> Result<Vec<TransferPrediction>> {
    Ok(read_jsonl(path)?.1)
}

/// Cluster predictions as written by [`stage_map`].
pub fn read_cluster_predictions(path: &Path) -> Result<Vec<ClusterPrediction>> {
    Ok(read_jsonl(path)?.1)
}
