//! Command-line front end. Every subcommand reads and writes files in a
//! workspace directory; settings resolve as flag, then config file, then
//! built-in default.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use nounclass::corpus::ExtractConfig;
use nounclass::ensemble::{agreement_rate, EnsembleConfig, Weights, DEFAULT_MIN_CONF};
use nounclass::ensemble::{DEFAULT_CLUSTERING_WEIGHT, DEFAULT_TRANSFER_WEIGHT};
use nounclass::io::read_word_list;
use nounclass::kmeans::KMeansConfig;
use nounclass::pipeline::{self, files, BaselineKind, ClusterConfig, PipelineConfig, PipelineInputs, ReportInputs, Workspace};
use nounclass::prefix::InnovationCriteria;
use nounclass::reduce::ReductionMethod;
use nounclass::synth::{generate_pair, SynthSpec};
use nounclass::transfer::TransferConfig;
use nounclass::{Error, Method, NounClass, Result};

#[derive(Parser)]
#[command(name = "nounclass", version, about = "Noun-class discovery over precomputed word embeddings")]
struct Cli {
    /// Workspace directory holding stage artifacts.
    #[arg(long, short = 'w', global = true, env = "NOUNCLASS_WORKSPACE", default_value = ".")]
    workspace: PathBuf,
    /// TOML file with defaults for any flag (same names, kebab-case).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Extract candidate word types from a raw corpus.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        opts: ExtractOpts,
    },
    /// Classify target words by KNN over labeled source embeddings.
    Transfer {
        #[command(flatten)]
        io: TransferIo,
        #[command(flatten)]
        opts: TransferOpts,
    },
    /// Reduce target embeddings and run K-means.
    Cluster {
        #[arg(long)]
        target: PathBuf,
        /// Word list restricting which targets are clustered.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[command(flatten)]
        opts: ClusterOpts,
    },
    /// Profile clusters, map prefixes to classes and report innovations.
    Map {
        /// Clusters artifact [default: <workspace>/clusters.jsonl]
        #[arg(long)]
        clusters: Option<PathBuf>,
        /// Candidate list used to rank exemplars by frequency.
        #[arg(long)]
        candidates: Option<PathBuf>,
        #[command(flatten)]
        opts: MapOpts,
    },
    /// Combine transfer and cluster predictions by weighted vote.
    Ensemble {
        /// [default: <workspace>/transfer.jsonl]
        #[arg(long)]
        transfer: Option<PathBuf>,
        /// [default: <workspace>/cluster_predictions.jsonl]
        #[arg(long)]
        clustering: Option<PathBuf>,
        #[command(flatten)]
        opts: EnsembleOpts,
    },
    /// Frequency or random baseline predictions.
    Baseline {
        #[arg(long, value_parser = ["frequency", "random"])]
        kind: String,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        paradigms: Option<PathBuf>,
        /// Word list to label [default: <workspace>/candidates.txt]
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// [default: <workspace>/baseline_<kind>.jsonl]
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write report.txt and summary.json from workspace artifacts.
    Report {
        #[command(flatten)]
        opts: ReportOpts,
    },
    /// Agreement rate between two prediction files.
    Agreement {
        /// [default: <workspace>/transfer.jsonl]
        #[arg(long)]
        a: Option<PathBuf>,
        /// [default: <workspace>/cluster_predictions.jsonl]
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// Generate a synthetic language pair with planted classes.
    Synth {
        #[arg(long, default_value = "overlap60")]
        preset: String,
        /// Output directory [default: the workspace]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stems: Option<usize>,
        #[arg(long)]
        overlap: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        embedding_dim: Option<usize>,
    },
    /// Run extract, transfer, cluster, map, ensemble and report.
    Pipeline {
        #[command(flatten)]
        io: TransferIo,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        extract: ExtractOpts,
        #[command(flatten)]
        transfer: TransferOpts,
        #[command(flatten)]
        cluster: ClusterOpts,
        #[command(flatten)]
        map: MapOpts,
        #[command(flatten)]
        ensemble: EnsembleOpts,
        #[command(flatten)]
        report: ReportOpts,
    },
}

#[derive(Args)]
struct TransferIo {
    /// Labeled source embeddings (.embjsonl).
    #[arg(long)]
    source: PathBuf,
    /// Source paradigm file supplying labels.
    #[arg(long)]
    paradigms: Option<PathBuf>,
    /// Target embeddings (.embjsonl).
    #[arg(long)]
    target: PathBuf,
}

#[derive(Args)]
struct ExtractOpts {
    #[arg(long)]
    min_len: Option<usize>,
    #[arg(long)]
    min_freq: Option<usize>,
    /// File with one stopword per line.
    #[arg(long)]
    stoplist: Option<PathBuf>,
}

#[derive(Args)]
struct TransferOpts {
    /// Nearest neighbors per target word [default: 5]
    #[arg(long)]
    k: Option<usize>,
    /// Minimum confidence to retain [default: 0.60]
    #[arg(long)]
    threshold: Option<f64>,
    /// Ignore a source record with the same word as the target.
    #[arg(long)]
    exclude_self: bool,
}

#[derive(Args)]
struct ClusterOpts {
    /// pca or umap [default: pca]
    #[arg(long)]
    reduction: Option<String>,
    /// Reduced dimension [default: 50]
    #[arg(long)]
    dim: Option<usize>,
    /// Number of clusters [default: 12]
    #[arg(long)]
    clusters: Option<usize>,
    /// [default: 42]
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// UMAP neighbors [default: 15]
    #[arg(long)]
    n_neighbors: Option<usize>,
    /// UMAP minimum distance [default: 0.1]
    #[arg(long)]
    min_dist: Option<f64>,
}

#[derive(Args)]
struct MapOpts {
    /// Prefix inventory file [default: bundled Bantu inventory]
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// [default: 90]
    #[arg(long)]
    min_consistency: Option<f64>,
    /// [default: 20]
    #[arg(long)]
    min_size: Option<usize>,
    /// Expected class for a prefix, as PREFIX=CLASS; repeatable.
    #[arg(long = "expect")]
    expect: Vec<String>,
}

#[derive(Args)]
struct EnsembleOpts {
    /// [default: 1.0]
    #[arg(long)]
    w_transfer: Option<f64>,
    /// [default: 0.8]
    #[arg(long)]
    w_cluster: Option<f64>,
    /// [default: 0.70]
    #[arg(long)]
    min_conf: Option<f64>,
    /// Reject words predicted by a single method.
    #[arg(long)]
    require_multi: bool,
}

#[derive(Args)]
struct ReportOpts {
    /// Gold labels (paradigm format) for accuracy.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Generated surface forms, lines {"word", "form"}.
    #[arg(long)]
    generated_forms: Option<PathBuf>,
    /// Skip clusters.svg.
    #[arg(long)]
    no_plot: bool,
}

/// Config file keys; each mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    min_len: Option<usize>,
    min_freq: Option<usize>,
    stoplist: Option<PathBuf>,
    k: Option<usize>,
    threshold: Option<f64>,
    exclude_self: Option<bool>,
    reduction: Option<String>,
    dim: Option<usize>,
    clusters: Option<usize>,
    seed: Option<u64>,
    max_iter: Option<usize>,
    tol: Option<f64>,
    n_neighbors: Option<usize>,
    min_dist: Option<f64>,
    inventory: Option<PathBuf>,
    min_consistency: Option<f64>,
    min_size: Option<usize>,
    expect: Option<Vec<String>>,
    w_transfer: Option<f64>,
    w_cluster: Option<f64>,
    min_conf: Option<f64>,
    require_multi: Option<bool>,
    gold: Option<PathBuf>,
    generated_forms: Option<PathBuf>,
    no_plot: Option<bool>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

impl ExtractOpts {
    fn resolve(&self, cfg: &FileConfig) -> Result<ExtractConfig> {
        let d = ExtractConfig::default();
        let stoplist = match self.stoplist.as_ref().or(cfg.stoplist.as_ref()) {
            Some(p) => read_word_list(p)?.into_iter().map(|w| nounclass::embedding::normalize_word(&w)).collect(),
            None => BTreeSet::new(),
        };
        Ok(ExtractConfig {
            min_len: self.min_len.or(cfg.min_len).unwrap_or(d.min_len),
            min_freq: self.min_freq.or(cfg.min_freq).unwrap_or(d.min_freq),
            stoplist,
        })
    }
}

impl TransferOpts {
    fn resolve(&self, cfg: &FileConfig) -> TransferConfig {
        let d = TransferConfig::default();
        TransferConfig {
            k: self.k.or(cfg.k).unwrap_or(d.k),
            threshold: self.threshold.or(cfg.threshold).unwrap_or(d.threshold),
            exclude_self: self.exclude_self || cfg.exclude_self.unwrap_or(d.exclude_self),
        }
    }
}

impl ClusterOpts {
    fn resolve(&self, cfg: &FileConfig) -> Result<ClusterConfig> {
        let d = ClusterConfig::default();
        let reduction = match self.reduction.as_ref().or(cfg.reduction.as_ref()) {
            Some(r) => r.parse::<ReductionMethod>()?,
            None => d.reduction,
        };
        Ok(ClusterConfig {
            reduction,
            dim: self.dim.or(cfg.dim).unwrap_or(d.dim),
            n_neighbors: self.n_neighbors.or(cfg.n_neighbors).unwrap_or(d.n_neighbors),
            min_dist: self.min_dist.or(cfg.min_dist).unwrap_or(d.min_dist),
            kmeans: KMeansConfig {
                k: self.clusters.or(cfg.clusters).unwrap_or(d.kmeans.k),
                seed: self.seed.or(cfg.seed).unwrap_or(d.kmeans.seed),
                max_iter: self.max_iter.or(cfg.max_iter).unwrap_or(d.kmeans.max_iter),
                tol: self.tol.or(cfg.tol).unwrap_or(d.kmeans.tol),
            },
        })
    }
}

impl MapOpts {
    fn resolve(&self, cfg: &FileConfig) -> Result<(Option<PathBuf>, InnovationCriteria)> {
        let d = InnovationCriteria::default();
        let pairs = if self.expect.is_empty() {
            cfg.expect.clone().unwrap_or_default()
        } else {
            self.expect.clone()
        };
        let mut expected = BTreeMap::new();
        for pair in pairs {
            let (prefix, class) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--expect takes PREFIX=CLASS, got `{pair}`")))?;
            let class: NounClass = class.parse()?;
            expected.insert(nounclass::embedding::normalize_word(prefix), class);
        }
        let criteria = InnovationCriteria {
            min_consistency: self.min_consistency.or(cfg.min_consistency).unwrap_or(d.min_consistency),
            min_size: self.min_size.or(cfg.min_size).unwrap_or(d.min_size),
            expected,
        };
        Ok((self.inventory.clone().or_else(|| cfg.inventory.clone()), criteria))
    }
}

impl EnsembleOpts {
    fn resolve(&self, cfg: &FileConfig) -> Result<EnsembleConfig> {
        let weights = Weights::new([
            (
                Method::Transfer,
                self.w_transfer.or(cfg.w_transfer).unwrap_or(DEFAULT_TRANSFER_WEIGHT),
            ),
            (
                Method::Clustering,
                self.w_cluster.or(cfg.w_cluster).unwrap_or(DEFAULT_CLUSTERING_WEIGHT),
            ),
        ])?;
        let min_conf = self.min_conf.or(cfg.min_conf).unwrap_or(DEFAULT_MIN_CONF);
        if !(0.0..=1.0).contains(&min_conf) {
            return Err(Error::Config(format!("min-conf {min_conf} outside [0, 1]")));
        }
        Ok(EnsembleConfig {
            weights,
            min_conf,
            require_multi: self.require_multi || cfg.require_multi.unwrap_or(false),
        })
    }
}

impl ReportOpts {
    fn resolve(&self, cfg: &FileConfig) -> ReportInputs {
        ReportInputs {
            gold: self.gold.clone().or_else(|| cfg.gold.clone()),
            generated_forms: self.generated_forms.clone().or_else(|| cfg.generated_forms.clone()),
            plot: !(self.no_plot || cfg.no_plot.unwrap_or(false)),
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn print_report(ws: &Workspace) -> Result<()> {
    let path = ws.path(files::REPORT);
    print!("{}", std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let ws = Workspace::new(&cli.workspace)?;
    let or_ws = |p: Option<PathBuf>, name: &str| p.unwrap_or_else(|| ws.path(name));

    match cli.command {
        Command::Extract { corpus, opts } => {
            print_json(&pipeline::stage_extract(&corpus, &opts.resolve(&cfg)?, &ws)?);
        }
        Command::Transfer { io, opts } => {
            let summary = pipeline::stage_transfer(&io.source, io.paradigms.as_deref(), &io.target, &opts.resolve(&cfg), &ws)?;
            print_json(&summary);
        }
        Command::Cluster { target, candidates, opts } => {
            print_json(&pipeline::stage_cluster(&target, candidates.as_deref(), &opts.resolve(&cfg)?, &ws)?);
        }
        Command::Map { clusters, candidates, opts } => {
            let (inventory, criteria) = opts.resolve(&cfg)?;
            let inventory = pipeline::load_inventory(inventory.as_deref())?;
            let clusters = or_ws(clusters, files::CLUSTERS);
            print_json(&pipeline::stage_map(&clusters, &inventory, &criteria, candidates.as_deref(), &ws)?);
        }
        Command::Ensemble { transfer, clustering, opts } => {
            let t = or_ws(transfer, files::TRANSFER);
            let c = or_ws(clustering, files::CLUSTER_PREDICTIONS);
            print_json(&pipeline::stage_ensemble(&t, &c, &opts.resolve(&cfg)?, &ws)?);
        }
        Command::Baseline { kind, source, paradigms, targets, seed, out } => {
            let kind: BaselineKind = kind.parse()?;
            let targets = read_word_list(or_ws(targets, files::CANDIDATES))?;
            let name = match kind {
                BaselineKind::Frequency => "baseline_frequency.jsonl",
                BaselineKind::Random => "baseline_random.jsonl",
            };
            let out = or_ws(out, name);
            let seed = seed.or(cfg.seed).unwrap_or(nounclass::kmeans::DEFAULT_SEED);
            let preds = pipeline::stage_baseline(kind, &source, paradigms.as_deref(), &targets, seed, &out)?;
            println!("{} predictions written to {}", preds.len(), out.display());
        }
        Command::Report { opts } => {
            pipeline::stage_report(&ws, &opts.resolve(&cfg))?;
            print_report(&ws)?;
        }
        Command::Agreement { a, b } => {
            let a = pipeline::read_predictions(&or_ws(a, files::TRANSFER))?;
            let b = pipeline::read_predictions(&or_ws(b, files::CLUSTER_PREDICTIONS))?;
            match agreement_rate(&a, &b) {
                Some(agreement) => print_json(&agreement),
                None => println!("null"),
            }
        }
        Command::Synth { preset, out, seed, stems, overlap, noise, embedding_dim } => {
            let mut spec = SynthSpec::preset(&preset)?;
            spec.seed = seed.unwrap_or(spec.seed);
            spec.stems = stems.unwrap_or(spec.stems);
            spec.cognate_overlap = overlap.unwrap_or(spec.cognate_overlap);
            spec.noise = noise.unwrap_or(spec.noise);
            spec.embedding_dim = embedding_dim.unwrap_or(spec.embedding_dim);
            let out = out.unwrap_or_else(|| ws.root().to_path_buf());
            let pair = generate_pair(&spec)?;
            pair.write_to_dir(&out)?;
            println!(
                "{} source and {} target words ({} cognates) written to {}",
                pair.source.len(),
                pair.target.len(),
                pair.manifest.cognates.len(),
                out.display()
            );
        }
        Command::Pipeline { io, corpus, extract, transfer, cluster, map, ensemble, report } => {
            let (inventory, innovation) = map.resolve(&cfg)?;
            let inputs = PipelineInputs {
                source: io.source,
                source_paradigms: io.paradigms,
                target: io.target,
                corpus,
                inventory,
            };
            let config = PipelineConfig {
                extract: extract.resolve(&cfg)?,
                transfer: transfer.resolve(&cfg),
                cluster: cluster.resolve(&cfg)?,
                innovation,
                ensemble: ensemble.resolve(&cfg)?,
                report: report.resolve(&cfg),
            };
            pipeline::run_pipeline(&inputs, &config, &ws)?;
            print_report(&ws)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
