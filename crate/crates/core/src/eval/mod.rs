//! Cross-validated evaluation of the classification tasks.

mod experiment;
mod kfold;
mod metrics;
mod report;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Field;
use crate::error::{Error, Result};

pub use experiment::{
    audit_task, prepare_task, run_experiment, train_pipeline, ExperimentConfig, ExperimentReport, TaskDataset,
    TrainedPipeline, VocabularyScope,
};
pub use kfold::{stratified_kfold, FoldAssignment};
pub use metrics::{
    confusion_and_metrics, confusion_matrix, expected_dummy_accuracy, metrics_from_confusion, Averages, ClassMetrics,
    Metrics,
};
pub use report::EvalReport;

/// The prediction tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    LawArea,
    #[serde(rename = "ruling-first")]
    RulingFirstWord,
    #[serde(rename = "ruling-multi")]
    RulingMultiWord,
    #[serde(rename = "temporal-7")]
    Temporal7,
    #[serde(rename = "temporal-14")]
    Temporal14,
}

impl Task {
    pub const ALL: [Task; 5] =
        [Task::LawArea, Task::RulingFirstWord, Task::RulingMultiWord, Task::Temporal7, Task::Temporal14];

    pub fn name(self) -> &'static str {
        match self {
            Task::LawArea => "law-area",
            Task::RulingFirstWord => "ruling-first",
            Task::RulingMultiWord => "ruling-multi",
            Task::Temporal7 => "temporal-7",
            Task::Temporal14 => "temporal-14",
        }
    }

    pub fn is_temporal(self) -> bool {
        matches!(self, Task::Temporal7 | Task::Temporal14)
    }

    /// Fields a document must carry to take part in this task.
    pub fn required_fields(self) -> BTreeSet<Field> {
        let label = match self {
            Task::LawArea => Field::LawArea,
            Task::RulingFirstWord | Task::RulingMultiWord => Field::RulingRaw,
            Task::Temporal7 | Task::Temporal14 => Field::DecisionYear,
        };
        [label, Field::Description].into()
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| Error::config(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    Weighted,
    Macro,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub folds: usize,
    pub seed: u64,
    pub averaging: Averaging,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { folds: 10, seed: 0, averaging: Averaging::Both }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::config(format!("need at least 2 folds, got {}", self.folds)));
        }
        Ok(())
    }
}
