//! Label spaces for each task: ruling label extraction, support filtering,
//! temporal binning and hierarchical clustering of ruling labels.

mod temporal;
mod ward;

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::normalize;

pub use temporal::{bin_temporal, BinAssignment, TemporalBin, TemporalKind, TemporalScheme};
pub use ward::{cut_dendrogram, cut_leaf_indices, ward_cluster, Dendrogram, Merge};

/// How a raw ruling string becomes a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSetup {
    #[default]
    FirstWord,
    MultiWord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// count >= min_support
    #[default]
    Inclusive,
    /// count > min_support
    Exclusive,
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inclusive" => Ok(ThresholdMode::Inclusive),
            "exclusive" => Ok(ThresholdMode::Exclusive),
            other => Err(Error::config(format!("unknown threshold mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelConfig {
    pub min_support: usize,
    pub setup: LabelSetup,
    pub threshold_mode: ThresholdMode,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig { min_support: 200, setup: LabelSetup::FirstWord, threshold_mode: ThresholdMode::Inclusive }
    }
}

impl LabelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_support == 0 {
            return Err(Error::config("min_support must be at least 1"));
        }
        Ok(())
    }

    pub fn admits(&self, count: usize) -> bool {
        match self.threshold_mode {
            ThresholdMode::Inclusive => count >= self.min_support,
            ThresholdMode::Exclusive => count > self.min_support,
        }
    }
}

/// Normalizes a raw label; the first-word setup keeps only its first token.
pub fn extract_label(raw: &str, setup: LabelSetup) -> Result<String> {
    let norm = normalize(raw);
    if norm.is_empty() {
        return Err(Error::InvalidLabel(raw.to_owned()));
    }
    Ok(match setup {
        LabelSetup::MultiWord => norm,
        LabelSetup::FirstWord => norm.split(' ').next().unwrap_or_default().to_owned(),
    })
}

/// Keeps only instances whose label meets the support threshold.
pub fn filter_by_support<I: Clone>(
    instances: &[(I, String)],
    config: &LabelConfig,
) -> (BTreeSet<String>, Vec<(I, String)>) {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, label) in instances {
        *counts.entry(label.as_str()).or_default() += 1;
    }
    let kept: BTreeSet<String> =
        counts.into_iter().filter(|&(_, n)| config.admits(n)).map(|(l, _)| l.to_owned()).collect();
    let filtered = instances.iter().filter(|(_, l)| kept.contains(l)).cloned().collect();
    (kept, filtered)
}

/// Bag-of-words occurrence vectors for a list of labels, over the sorted
/// vocabulary of label words.
pub fn label_vectors(labels: &[String]) -> (Vec<String>, Vec<Vec<f64>>) {
    let vocab: Vec<String> = labels
        .iter()
        .flat_map(|l| l.split_whitespace())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_owned)
        .collect();
    let rows = labels
        .iter()
        .map(|l| {
            let mut row = vec![0.0; vocab.len()];
            for w in l.split_whitespace() {
                let j = vocab.binary_search_by(|v| v.as_str().cmp(w)).expect("word in vocabulary");
                row[j] += 1.0;
            }
            row
        })
        .collect();
    (vocab, rows)
}
