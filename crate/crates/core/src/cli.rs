//! Command-line interface.
//!
//! Exit codes: 0 on success, 1 on a domain or configuration error (one
//! diagnostic line on stderr), 2 on a usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    self, dedupe_and_filter, generate_synthetic, parse_corpus, CorpusFormat, Document, Field, SynthSpec, SynthTarget,
};
use crate::error::{Error, Result};
use crate::eval::{
    audit_task, run_experiment, train_pipeline, Averaging, EvalConfig, ExperimentConfig, Task, TrainedPipeline,
    VocabularyScope,
};
use crate::features::{FeatureMode, NgramRange};
use crate::labels::{cut_dendrogram, extract_label, label_vectors, ward_cluster, LabelSetup, ThresholdMode};
use crate::masking::{default_variants, parse_variant_map};
use crate::svm::{Loss, SvmConfig};

#[derive(Debug, Parser)]
#[command(name = "verdict", version, about = "Court-ruling text classification experiments")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct GlobalArgs {
    /// JSON configuration file; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// law-area, ruling-first, ruling-multi, temporal-7 or temporal-14
    #[arg(long, global = true, value_parser = parse_via::<Task>)]
    task: Option<Task>,
    /// Largest n-gram order (1 or 2)
    #[arg(long, global = true)]
    ngrams: Option<usize>,
    /// bow, ttr or bow+ttr
    #[arg(long, global = true, value_parser = parse_via::<FeatureMode>)]
    features: Option<FeatureMode>,
    /// Minimum number of instances for a class to be kept
    #[arg(long, global = true)]
    min_support: Option<usize>,
    /// Number of cross-validation folds
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// SVM regularization constant
    #[arg(long = "c", global = true)]
    c: Option<f64>,
    /// Master seed; fold, baseline, solver and generator seeds derive from it
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for fold and class parallelism
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn parse_via<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus file (JSON lines or XML)
    #[arg(long, value_name = "PATH")]
    corpus: Option<PathBuf>,
    /// jsonl or xml; guessed from the extension when omitted
    #[arg(long, value_parser = parse_via::<CorpusFormat>)]
    format: Option<CorpusFormat>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, deduplicate and filter a corpus; write stats.json and clean.jsonl
    Ingest {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Comma-separated fields a document must have
        #[arg(long, value_delimiter = ',', value_parser = parse_via::<Field>)]
        require: Vec<Field>,
    },
    /// Ward clustering of ruling labels; write dendrogram.json/.newick and clusters.json
    ClusterLabels {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Number of clusters to cut the dendrogram into
        #[arg(long, default_value_t = 7)]
        k: usize,
        /// Minimum occurrences for a ruling label to be clustered
        #[arg(long, default_value_t = 1)]
        label_min_support: usize,
    },
    /// ANOVA-ranked audit of masked features; write audit.json
    MaskAudit {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[command(flatten)]
        mask: MaskArgs,
    },
    /// Stratified cross-validation of SVM and baseline; write report.json and report.txt
    Cv {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        mask: MaskArgs,
        /// Learn the vocabulary on training folds only
        #[arg(long)]
        per_fold_vocab: bool,
    },
    /// Train on the whole task dataset; write model.json
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        mask: MaskArgs,
    },
    /// Score a corpus with a trained model; write predictions.jsonl
    Predict {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Generate a synthetic corpus; write corpus.jsonl
    Synth {
        /// JSON synthetic corpus specification
        #[arg(long, value_name = "PATH")]
        spec: Option<PathBuf>,
        #[arg(long)]
        classes: Option<usize>,
        #[arg(long)]
        docs_per_class: Option<usize>,
        /// law_area, ruling or decade
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        signal_ratio: Option<f64>,
        #[arg(long)]
        leak: bool,
    },
}

#[derive(Debug, Args)]
struct MaskArgs {
    /// Skip label masking and digit stripping
    #[arg(long)]
    no_mask: bool,
    /// JSON mapping label word -> [variants], replacing the built-in list
    #[arg(long, value_name = "PATH")]
    lexicon: Option<PathBuf>,
}

/// Effective run configuration: defaults, then the config file, then flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub format: Option<CorpusFormat>,
    pub task: Task,
    pub min_support: usize,
    pub threshold_mode: ThresholdMode,
    pub ngrams: usize,
    pub features: FeatureMode,
    pub masking: bool,
    pub lexicon: Option<PathBuf>,
    pub vocabulary_scope: VocabularyScope,
    pub folds: usize,
    pub averaging: Averaging,
    pub c: f64,
    pub tolerance: f64,
    pub max_epochs: usize,
    pub use_bias: bool,
    pub loss: Loss,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let svm = SvmConfig::default();
        RunConfig {
            corpus: None,
            format: None,
            task: Task::LawArea,
            min_support: 200,
            threshold_mode: ThresholdMode::Inclusive,
            ngrams: 1,
            features: FeatureMode::BowOnly,
            masking: true,
            lexicon: None,
            vocabulary_scope: VocabularyScope::FullCorpus,
            folds: 10,
            averaging: Averaging::Both,
            c: svm.c,
            tolerance: svm.tolerance,
            max_epochs: svm.max_epochs,
            use_bias: svm.use_bias,
            loss: svm.loss,
            seed: 0,
            jobs: 1,
            out: PathBuf::from("out"),
        }
    }
}

/// Seeds of the independently seeded components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubSeeds {
    pub fold: u64,
    pub dummy: u64,
    pub svm: u64,
    pub synth: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a named sub-seed from the global seed.
pub fn derive_seed(global: u64, name: &str) -> u64 {
    let fnv = name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    splitmix64(global ^ fnv)
}

impl RunConfig {
    pub fn sub_seeds(&self) -> SubSeeds {
        SubSeeds {
            fold: derive_seed(self.seed, "fold"),
            dummy: derive_seed(self.seed, "dummy"),
            svm: derive_seed(self.seed, "svm"),
            synth: derive_seed(self.seed, "synth"),
        }
    }

    fn apply(&mut self, g: &GlobalArgs) {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = g.$field.clone() { self.$field = v; } )* };
        }
        set!(task, ngrams, features, min_support, folds, c, seed, jobs, out);
    }

    fn apply_corpus(&mut self, a: &CorpusArgs) {
        if let Some(p) = &a.corpus {
            self.corpus = Some(p.clone());
        }
        if let Some(f) = a.format {
            self.format = Some(f);
        }
    }

    fn apply_mask(&mut self, m: &MaskArgs) {
        if m.no_mask {
            self.masking = false;
        }
        if let Some(p) = &m.lexicon {
            self.lexicon = Some(p.clone());
        }
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let seeds = self.sub_seeds();
        let variants = match &self.lexicon {
            Some(p) => parse_variant_map(&read_to_string(p)?)?,
            None => default_variants(),
        };
        let cfg = ExperimentConfig {
            task: self.task,
            min_support: self.min_support,
            threshold_mode: self.threshold_mode,
            ngram_range: NgramRange::up_to(self.ngrams)?,
            features: self.features,
            masking: self.masking,
            variants,
            vocabulary_scope: self.vocabulary_scope,
            svm: SvmConfig {
                c: self.c,
                tolerance: self.tolerance,
                max_epochs: self.max_epochs,
                seed: seeds.svm,
                use_bias: self.use_bias,
                loss: self.loss,
            },
            eval: EvalConfig { folds: self.folds, seed: seeds.fold, averaging: self.averaging },
            dummy_seed: seeds.dummy,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn corpus_path(&self) -> Result<&Path> {
        let p = self.corpus.as_deref().ok_or_else(|| Error::config("no corpus given (--corpus)"))?;
        if !p.exists() {
            return Err(Error::config(format!("corpus {} does not exist", p.display())));
        }
        Ok(p)
    }

    fn load_corpus(&self) -> Result<Vec<Document>> {
        let path = self.corpus_path()?;
        let format = self.format.unwrap_or_else(|| CorpusFormat::from_path(path));
        let file = File::open(path).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        parse_corpus(std::io::BufReader::new(file), format)
    }

    fn write_echo(&self, extra: serde_json::Value) -> Result<()> {
        let echo = serde_json::json!({
            "run": self,
            "sub_seeds": self.sub_seeds(),
            "effective": extra,
        });
        write_file(&self.out.join("config.json"), &serde_json::to_string_pretty(&echo)?)
    }
}

fn read_to_string(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::config(format!("{}: {e}", p.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(contents.as_bytes())?;
    if !contents.ends_with('\n') {
        f.write_all(b"\n")?;
    }
    f.flush()?;
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.global.config {
        Some(p) => {
            serde_json::from_str(&read_to_string(p)?).map_err(|e| Error::config(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    cfg.apply(&cli.global);
    if cfg.jobs == 0 {
        return Err(Error::config("--jobs must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| run_command(cli.command, cfg))
}

fn run_command(command: Command, mut cfg: RunConfig) -> Result<()> {
    match command {
        Command::Ingest { corpus, require } => {
            cfg.apply_corpus(&corpus);
            let required: BTreeSet<Field> =
                if require.is_empty() { [Field::Description].into() } else { require.into_iter().collect() };
            let docs = cfg.load_corpus()?;
            let (kept, stats) = dedupe_and_filter(docs, &required);
            write_file(&cfg.out.join("stats.json"), &serde_json::to_string_pretty(&stats)?)?;
            let mut buf = Vec::new();
            corpus::write_jsonl(&mut buf, &kept)?;
            write_file(&cfg.out.join("clean.jsonl"), std::str::from_utf8(&buf).expect("utf-8"))?;
            cfg.write_echo(serde_json::json!({ "required_fields": required }))?;
            println!(
                "{} documents kept ({} duplicates, {} incomplete removed)",
                stats.total_docs, stats.duplicates_removed, stats.incomplete_removed
            );
        }
        Command::ClusterLabels { corpus, k, label_min_support } => {
            cfg.apply_corpus(&corpus);
            let docs = cfg.load_corpus()?;
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for d in &docs {
                if let Some(l) = d.ruling_raw.as_deref().and_then(|r| extract_label(r, LabelSetup::MultiWord).ok()) {
                    *counts.entry(l).or_default() += 1;
                }
            }
            let labels: Vec<String> =
                counts.iter().filter(|(_, &n)| n >= label_min_support).map(|(l, _)| l.clone()).collect();
            if labels.len() < 2 {
                return Err(Error::domain(format!("only {} ruling label(s) to cluster", labels.len())));
            }
            let (_, vectors) = label_vectors(&labels);
            let dendrogram = ward_cluster(&vectors, labels)?;
            let clusters = cut_dendrogram(&dendrogram, k)?;
            write_file(&cfg.out.join("dendrogram.json"), &serde_json::to_string_pretty(&dendrogram.to_json())?)?;
            write_file(&cfg.out.join("dendrogram.newick"), &dendrogram.to_newick())?;
            write_file(&cfg.out.join("clusters.json"), &serde_json::to_string_pretty(&clusters)?)?;
            cfg.write_echo(serde_json::json!({ "k": k, "label_min_support": label_min_support }))?;
            println!("{} labels clustered into {k} groups", dendrogram.n_leaves());
        }
        Command::MaskAudit { corpus, top, mask } => {
            cfg.apply_corpus(&corpus);
            cfg.apply_mask(&mask);
            let exp = cfg.experiment()?;
            let docs = relevant_docs(cfg.load_corpus()?, exp.task);
            let report = audit_task(&docs, &exp, top)?;
            write_file(&cfg.out.join("audit.json"), &serde_json::to_string_pretty(&report)?)?;
            cfg.write_echo(serde_json::to_value(&exp)?)?;
            println!("{} violations among the top {top} features", report.violations.len());
        }
        Command::Cv { corpus, mask, per_fold_vocab } => {
            cfg.apply_corpus(&corpus);
            cfg.apply_mask(&mask);
            if per_fold_vocab {
                cfg.vocabulary_scope = VocabularyScope::PerFold;
            }
            let exp = cfg.experiment()?;
            let docs = relevant_docs(cfg.load_corpus()?, exp.task);
            let report = run_experiment(&docs, &exp)?;
            write_file(&cfg.out.join("report.json"), &report.to_json()?)?;
            let table = report.to_table();
            write_file(&cfg.out.join("report.txt"), &table)?;
            cfg.write_echo(serde_json::to_value(&exp)?)?;
            print!("{table}");
        }
        Command::Train { corpus, mask } => {
            cfg.apply_corpus(&corpus);
            cfg.apply_mask(&mask);
            let exp = cfg.experiment()?;
            let docs = relevant_docs(cfg.load_corpus()?, exp.task);
            let pipeline = train_pipeline(&docs, &exp)?;
            write_file(&cfg.out.join("model.json"), &pipeline.to_json()?)?;
            cfg.write_echo(serde_json::to_value(&exp)?)?;
            println!(
                "trained {} classes over {} features",
                pipeline.model.class_order.len(),
                pipeline.model.feature_dim
            );
        }
        Command::Predict { model, corpus } => {
            cfg.apply_corpus(&corpus);
            let pipeline = TrainedPipeline::from_json(&read_to_string(&model)?)?;
            let docs = cfg.load_corpus()?;
            let texts: Vec<&str> = docs.iter().map(|d| d.description.as_str()).collect();
            let labels = pipeline.predict_texts(&texts)?;
            let mut out = String::new();
            for (d, l) in docs.iter().zip(&labels) {
                out.push_str(&serde_json::json!({ "id": d.id, "label": l }).to_string());
                out.push('\n');
            }
            write_file(&cfg.out.join("predictions.jsonl"), &out)?;
            println!("{} predictions written", labels.len());
        }
        Command::Synth { spec, classes, docs_per_class, target, signal_ratio, leak } => {
            let target = match target.as_deref() {
                None => None,
                Some(t) => Some(
                    serde_json::from_value::<SynthTarget>(serde_json::Value::String(t.to_owned()))
                        .map_err(|_| Error::config(format!("unknown synthetic target {t:?}")))?,
                ),
            };
            let mut s: SynthSpec = match &spec {
                Some(p) => serde_json::from_str(&read_to_string(p)?)
                    .map_err(|e| Error::config(format!("{}: {e}", p.display())))?,
                None => SynthSpec::with_classes(target.unwrap_or_default(), classes.unwrap_or(2)),
            };
            if spec.is_some() {
                if let Some(n) = classes {
                    s.classes = SynthSpec::with_classes(target.unwrap_or(s.target), n).classes;
                }
                if let Some(t) = target {
                    s.target = t;
                }
            }
            if let Some(n) = docs_per_class {
                s.docs_per_class = n;
            }
            if let Some(r) = signal_ratio {
                s.signal_ratio = r;
            }
            s.leak |= leak;
            let docs = generate_synthetic(&s, cfg.sub_seeds().synth)?;
            let mut buf = Vec::new();
            corpus::write_jsonl(&mut buf, &docs)?;
            write_file(&cfg.out.join("corpus.jsonl"), std::str::from_utf8(&buf).expect("utf-8"))?;
            cfg.write_echo(serde_json::to_value(&s)?)?;
            println!("{} documents written", docs.len());
        }
    }
    Ok(())
}

/// Cleans the corpus for a task: documents lacking the task's fields are
/// dropped, then duplicates.
fn relevant_docs(docs: Vec<Document>, task: Task) -> Vec<Document> {
    dedupe_and_filter(docs, &task.required_fields()).0
}
