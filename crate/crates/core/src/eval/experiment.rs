//! End-to-end protocol: label extraction, support filtering, task-specific
//! masking, features, stratified cross-validation of the SVM against the
//! stratified dummy baseline.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kfold::stratified_kfold;
use super::metrics::{confusion_matrix, expected_dummy_accuracy};
use super::report::{render_table, EvalReport};
use super::{EvalConfig, Task};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::{
    assemble_features, build_vocabulary, type_token_ratio, vectorize, FeatureMode, NgramRange, SparseMatrix, Vocabulary,
};
use crate::labels::{
    bin_temporal, extract_label, filter_by_support, LabelConfig, LabelSetup, TemporalScheme, ThresholdMode,
};
use crate::masking::{
    apply_mask, audit_masking, build_mask_lexicon, default_variants, MaskAuditReport, MaskLexicon, VariantMap,
};
use crate::svm::{dummy_fit, dummy_predict, predict, train_ovr, SvmConfig, SvmModel};
use crate::textnorm::{normalize_tokens, strip_digits, TokenSeq};

/// Where the n-gram vocabulary is learned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabularyScope {
    /// Once, on every instance that survives label filtering.
    #[default]
    FullCorpus,
    /// On the training folds only.
    PerFold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub min_support: usize,
    pub threshold_mode: ThresholdMode,
    pub ngram_range: NgramRange,
    pub features: FeatureMode,
    pub masking: bool,
    /// Extra surface forms masked for ruling tasks.
    pub variants: VariantMap,
    pub vocabulary_scope: VocabularyScope,
    pub svm: SvmConfig,
    pub eval: EvalConfig,
    pub dummy_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            task: Task::LawArea,
            min_support: 200,
            threshold_mode: ThresholdMode::Inclusive,
            ngram_range: NgramRange::UNIGRAMS,
            features: FeatureMode::BowOnly,
            masking: true,
            variants: default_variants(),
            vocabulary_scope: VocabularyScope::FullCorpus,
            svm: SvmConfig::default(),
            eval: EvalConfig::default(),
            dummy_seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.label_config().validate()?;
        self.svm.validate()?;
        self.eval.validate()
    }

    fn label_config(&self) -> LabelConfig {
        let setup = match self.task {
            Task::RulingFirstWord => LabelSetup::FirstWord,
            _ => LabelSetup::MultiWord,
        };
        LabelConfig { min_support: self.min_support, setup, threshold_mode: self.threshold_mode }
    }
}

/// Instances of one task, labelled, filtered and masked.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub task: Task,
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub tokens: Vec<TokenSeq>,
    pub lexicon: Option<MaskLexicon>,
    pub strip_digits: bool,
    pub warnings: Vec<String>,
}

impl TaskDataset {
    pub fn class_counts(&self) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        for l in &self.labels {
            *m.entry(l.clone()).or_default() += 1;
        }
        m
    }
}

fn raw_label(doc: &Document, task: Task, setup: LabelSetup, clamped: &mut usize) -> Option<String> {
    match task {
        Task::LawArea => doc.law_area.as_deref().and_then(|s| extract_label(s, setup).ok()),
        Task::RulingFirstWord | Task::RulingMultiWord => {
            doc.ruling_raw.as_deref().and_then(|s| extract_label(s, setup).ok())
        }
        Task::Temporal7 | Task::Temporal14 => {
            let scheme =
                if task == Task::Temporal7 { TemporalScheme::seven_class() } else { TemporalScheme::fourteen_class() };
            doc.decision_year.map(|y| {
                let bin = bin_temporal(y, &scheme);
                *clamped += usize::from(bin.clamped);
                bin.label
            })
        }
    }
}

/// Extracts labels, drops unsupported classes and masks descriptions.
///
/// Support filtering applies to law-area and ruling tasks; temporal tasks
/// keep every bin.
pub fn prepare_task(docs: &[Document], config: &ExperimentConfig) -> Result<TaskDataset> {
    config.validate()?;
    let task = config.task;
    let label_cfg = config.label_config();
    let mut warnings = Vec::new();
    let mut clamped = 0;
    let mut missing = 0;
    let mut instances: Vec<(usize, String)> = Vec::with_capacity(docs.len());
    for (i, doc) in docs.iter().enumerate() {
        match raw_label(doc, task, label_cfg.setup, &mut clamped) {
            Some(l) if !doc.description.trim().is_empty() => instances.push((i, l)),
            _ => missing += 1,
        }
    }
    if missing > 0 {
        warnings.push(format!("{missing} documents lack a {task} label or a description"));
    }
    if clamped > 0 {
        warnings.push(format!("{clamped} decision years precede the scheme floor and were clamped"));
    }
    let (kept, instances) = if task.is_temporal() {
        let kept = instances.iter().map(|(_, l)| l.clone()).collect();
        (kept, instances)
    } else {
        filter_by_support(&instances, &label_cfg)
    };
    if kept.len() < 2 {
        return Err(Error::domain(format!(
            "task {task}: {} class(es) survive filtering ({:?}); at least 2 are needed",
            kept.len(),
            kept
        )));
    }

    let lexicon = (config.masking && !task.is_temporal()).then(|| {
        let variants = if task == Task::LawArea { VariantMap::new() } else { config.variants.clone() };
        let (lex, w) = build_mask_lexicon(kept.iter().map(String::as_str), &variants);
        warnings.extend(w);
        lex
    });
    let strip = config.masking && task.is_temporal();

    let mut ids = Vec::with_capacity(instances.len());
    let mut labels = Vec::with_capacity(instances.len());
    let mut tokens = Vec::with_capacity(instances.len());
    for (i, label) in instances {
        ids.push(docs[i].id.clone());
        labels.push(label);
        tokens.push(mask_tokens(normalize_tokens(&docs[i].description), lexicon.as_ref(), strip));
    }
    Ok(TaskDataset { task, ids, labels, tokens, lexicon, strip_digits: strip, warnings })
}

fn mask_tokens(tokens: TokenSeq, lexicon: Option<&MaskLexicon>, strip: bool) -> TokenSeq {
    let tokens = match lexicon {
        Some(lex) => apply_mask(tokens, lex),
        None => tokens,
    };
    if strip {
        strip_digits(tokens)
    } else {
        tokens
    }
}

/// Count features (and/or type-token ratio) for `rows` of `tokens`.
pub(crate) fn featurize(tokens: &[&TokenSeq], vocab: &Vocabulary, mode: FeatureMode) -> Result<SparseMatrix> {
    let bow = if mode.uses_bow() {
        let rows: Vec<_> = tokens.iter().map(|t| vectorize(t, vocab)).collect();
        SparseMatrix::from_rows(&rows, vocab.len())?
    } else {
        SparseMatrix::zeros(tokens.len(), 0)
    };
    let ttr: Vec<f64> = tokens.iter().map(|t| type_token_ratio(t)).collect();
    assemble_features(bow, Some(&ttr), mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub task: Task,
    pub instances: usize,
    pub class_counts: BTreeMap<String, u64>,
    /// Sum of squared class proportions.
    pub expected_dummy_accuracy: f64,
    pub vocabulary_size: usize,
    pub fold_sizes: Vec<usize>,
    pub svm: EvalReport,
    pub baseline: EvalReport,
    pub warnings: Vec<String>,
    pub config: ExperimentConfig,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "task: {} ({} classes, {} instances, {} folds)\n\n",
            self.task,
            self.class_counts.len(),
            self.instances,
            self.fold_sizes.len()
        );
        out.push_str(&render_table(&[&self.svm, &self.baseline], self.config.eval.averaging));
        out.push_str(&format!("\nexpected baseline accuracy: {:.1}%\n", 100.0 * self.expected_dummy_accuracy));
        out
    }
}

struct FoldOutcome {
    svm: Vec<Vec<u64>>,
    dummy: Vec<Vec<u64>>,
}

/// Runs stratified k-fold cross-validation of the SVM and the dummy baseline.
pub fn run_experiment(docs: &[Document], config: &ExperimentConfig) -> Result<ExperimentReport> {
    let data = prepare_task(docs, config)?;
    let class_counts = data.class_counts();
    let class_order: Vec<String> = class_counts.keys().cloned().collect();
    let folds = stratified_kfold(&data.labels, config.eval.folds, config.eval.seed)?;
    let mut warnings = data.warnings.clone();
    warnings.extend(folds.warnings.iter().cloned());

    let full_vocab = (config.vocabulary_scope == VocabularyScope::FullCorpus)
        .then(|| build_vocabulary(&data.tokens, config.ngram_range));
    let full_x = match &full_vocab {
        Some(v) => Some(featurize(&data.tokens.iter().collect::<Vec<_>>(), v, config.features)?),
        None => None,
    };

    let outcomes = (0..folds.k)
        .into_par_iter()
        .map(|f| -> Result<FoldOutcome> {
            let (train, test) = folds.split(f);
            let (x_train, x_test) = match &full_x {
                Some(x) => (x.select_rows(&train), x.select_rows(&test)),
                None => {
                    let pick = |rows: &[usize]| rows.iter().map(|&i| &data.tokens[i]).collect::<Vec<_>>();
                    let train_tokens: Vec<TokenSeq> = train.iter().map(|&i| data.tokens[i].clone()).collect();
                    let vocab = build_vocabulary(&train_tokens, config.ngram_range);
                    (
                        featurize(&pick(&train), &vocab, config.features)?,
                        featurize(&pick(&test), &vocab, config.features)?,
                    )
                }
            };
            let y_train: Vec<String> = train.iter().map(|&i| data.labels[i].clone()).collect();
            let y_test: Vec<&str> = test.iter().map(|&i| data.labels[i].as_str()).collect();

            let model =
                train_ovr(&x_train, &y_train, &config.svm).map_err(|e| Error::domain(format!("fold {f}: {e}")))?;
            let svm_pred = predict(&model, &x_test)?;
            let svm_pred: Vec<&str> = svm_pred.iter().map(String::as_str).collect();

            let dummy = dummy_fit(&y_train, config.dummy_seed.wrapping_add(f as u64))?;
            let dummy_pred = dummy_predict(&dummy, test.len());
            let dummy_pred: Vec<&str> = dummy_pred.iter().map(String::as_str).collect();

            Ok(FoldOutcome {
                svm: confusion_matrix(&y_test, &svm_pred, &class_order)?,
                dummy: confusion_matrix(&y_test, &dummy_pred, &class_order)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (svm_folds, dummy_folds): (Vec<_>, Vec<_>) = outcomes.into_iter().map(|o| (o.svm, o.dummy)).unzip();
    let svm = EvalReport::from_folds("SVM", class_order.clone(), svm_folds);
    let baseline = EvalReport::from_folds("baseline", class_order, dummy_folds);
    warnings.extend(svm.warnings.iter().map(|w| format!("SVM: {w}")));
    warnings.extend(baseline.warnings.iter().map(|w| format!("baseline: {w}")));

    Ok(ExperimentReport {
        task: config.task,
        instances: data.labels.len(),
        expected_dummy_accuracy: expected_dummy_accuracy(class_counts.values().copied()),
        class_counts,
        vocabulary_size: full_vocab.as_ref().map_or(0, Vocabulary::len),
        fold_sizes: folds.fold_sizes(),
        svm,
        baseline,
        warnings,
        config: config.clone(),
    })
}

/// Ranks the task's n-gram features by ANOVA F and flags the top `k` that
/// touch a label word. The lexicon is the one masking would use, so an
/// unmasked run shows what masking is meant to remove.
pub fn audit_task(docs: &[Document], config: &ExperimentConfig, k: usize) -> Result<MaskAuditReport> {
    let data = prepare_task(docs, config)?;
    let vocab = build_vocabulary(&data.tokens, config.ngram_range);
    let rows: Vec<_> = data.tokens.iter().map(|t| vectorize(t, &vocab)).collect();
    let x = SparseMatrix::from_rows(&rows, vocab.len())?;
    let lexicon = match data.lexicon {
        Some(lex) => lex,
        None if config.task.is_temporal() => MaskLexicon::default(),
        None => prepare_task(docs, &ExperimentConfig { masking: true, ..config.clone() })?.lexicon.unwrap_or_default(),
    };
    audit_masking(&x, &data.labels, &vocab, &lexicon, k)
}

pub const PIPELINE_FORMAT_VERSION: u32 = 1;

/// A model trained on a whole task dataset, with everything needed to score
/// raw descriptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub format_version: u32,
    pub task: Task,
    pub ngram_range: NgramRange,
    pub features: FeatureMode,
    pub lexicon: Option<MaskLexicon>,
    pub strip_digits: bool,
    pub vocabulary: Vec<String>,
    pub model: SvmModel,
}

pub fn train_pipeline(docs: &[Document], config: &ExperimentConfig) -> Result<TrainedPipeline> {
    let data = prepare_task(docs, config)?;
    let vocab = build_vocabulary(&data.tokens, config.ngram_range);
    let x = featurize(&data.tokens.iter().collect::<Vec<_>>(), &vocab, config.features)?;
    let model = train_ovr(&x, &data.labels, &config.svm)?;
    Ok(TrainedPipeline {
        format_version: PIPELINE_FORMAT_VERSION,
        task: config.task,
        ngram_range: config.ngram_range,
        features: config.features,
        lexicon: data.lexicon,
        strip_digits: data.strip_digits,
        vocabulary: vocab.terms().to_vec(),
        model,
    })
}

impl TrainedPipeline {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: TrainedPipeline = serde_json::from_str(s)?;
        if p.format_version != PIPELINE_FORMAT_VERSION {
            return Err(Error::config(format!("unsupported model format version {}", p.format_version)));
        }
        // validates the embedded model
        SvmModel::from_json(&serde_json::to_string(&p.model)?)?;
        Ok(p)
    }

    pub fn predict_texts<S: AsRef<str>>(&self, texts: &[S]) -> Result<Vec<String>> {
        let vocab = Vocabulary::from_terms(self.vocabulary.iter().cloned(), self.ngram_range);
        let tokens: Vec<TokenSeq> = texts
            .iter()
            .map(|t| mask_tokens(normalize_tokens(t.as_ref()), self.lexicon.as_ref(), self.strip_digits))
            .collect();
        let x = featurize(&tokens.iter().collect::<Vec<_>>(), &vocab, self.features)?;
        predict(&self.model, &x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, SynthSpec, SynthTarget};

    fn small_config(task: Task) -> ExperimentConfig {
        ExperimentConfig {
            task,
            min_support: 1,
            eval: EvalConfig { folds: 3, ..Default::default() },
            ..Default::default()
        }
    }

    #[test]
    fn one_surviving_class_is_an_error_naming_it() {
        let spec = SynthSpec { docs_per_class: 5, ..SynthSpec::with_classes(SynthTarget::Ruling, 2) };
        let mut docs = generate_synthetic(&spec, 0).unwrap();
        for d in &mut docs {
            d.law_area = Some("CHAMBRE_MIXTE".into());
        }
        let err = run_experiment(&docs, &small_config(Task::LawArea)).unwrap_err().to_string();
        assert!(err.contains("law-area"), "{err}");
        assert!(err.contains("chambre mixte"), "{err}");
    }

    #[test]
    fn ruling_masking_removes_labels_and_variants() {
        let spec = SynthSpec {
            classes: vec!["cassation".into(), "rejet".into()],
            docs_per_class: 6,
            leak: true,
            leak_variants: [("cassation".to_string(), vec!["casse".to_string()])].into(),
            ..SynthSpec::default()
        };
        let docs = generate_synthetic(&spec, 1).unwrap();
        let data = prepare_task(&docs, &small_config(Task::RulingFirstWord)).unwrap();
        let lex = data.lexicon.as_ref().unwrap();
        for t in &data.tokens {
            assert!(t.iter().all(|w| !lex.is_forbidden(w)));
            assert!(!t.iter().any(|w| w == "casse" || w == "cassation" || w == "rejet"));
        }
    }

    #[test]
    fn temporal_task_strips_digits() {
        let mut docs =
            generate_synthetic(&SynthSpec { docs_per_class: 4, ..SynthSpec::with_classes(SynthTarget::Decade, 2) }, 2)
                .unwrap();
        for d in &mut docs {
            d.description.push_str(" article 455 l1234");
        }
        let data = prepare_task(&docs, &small_config(Task::Temporal7)).unwrap();
        assert!(data.lexicon.is_none());
        for t in &data.tokens {
            assert!(t.iter().all(|w| !w.chars().any(char::is_numeric)));
            assert!(t.iter().any(|w| w == "l"));
        }
        assert_eq!(data.class_counts().keys().collect::<Vec<_>>(), ["1960s", "1970s"]);
    }

    #[test]
    fn pipeline_round_trip_predicts() {
        let spec =
            SynthSpec { docs_per_class: 20, signal_ratio: 0.5, ..SynthSpec::with_classes(SynthTarget::LawArea, 3) };
        let docs = generate_synthetic(&spec, 5).unwrap();
        let cfg = small_config(Task::LawArea);
        let p = train_pipeline(&docs, &cfg).unwrap();
        let back = TrainedPipeline::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, back);
        let texts: Vec<&str> = docs.iter().map(|d| d.description.as_str()).collect();
        let pred = back.predict_texts(&texts).unwrap();
        let gold: Vec<String> = docs.iter().map(|d| crate::textnorm::normalize(d.law_area.as_ref().unwrap())).collect();
        let correct = pred.iter().zip(&gold).filter(|(a, b)| a == b).count();
        assert!(correct as f64 / gold.len() as f64 > 0.95);
    }

    #[test]
    fn per_fold_vocabulary_runs() {
        let spec = SynthSpec { docs_per_class: 15, ..SynthSpec::with_classes(SynthTarget::Ruling, 3) };
        let docs = generate_synthetic(&spec, 9).unwrap();
        let cfg =
            ExperimentConfig { vocabulary_scope: VocabularyScope::PerFold, ..small_config(Task::RulingMultiWord) };
        let report = run_experiment(&docs, &cfg).unwrap();
        assert_eq!(report.instances, 45);
        assert_eq!(report.vocabulary_size, 0);
        assert!(report.svm.weighted_f1() > 0.8);
    }
}
