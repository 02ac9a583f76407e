//! Removal of label surface forms from descriptions, and an ANOVA-ranked
//! audit of what survives.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::ser::SerializeTuple;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::features::{SparseMatrix, Vocabulary};
use crate::textnorm::{normalize, TokenSeq};

/// Label word -> morphological variants of that word.
pub type VariantMap = BTreeMap<String, BTreeSet<String>>;

/// Known nominal/verbal variants of the common ruling outcomes.
pub fn default_variants() -> VariantMap {
    let entries: [(&str, &[&str]); 4] = [
        ("cassation", &["casse", "cassee", "casser", "cassent"]),
        ("rejet", &["rejete", "rejetee", "rejettent", "rejeter"]),
        ("annulation", &["annule", "annulee", "annuler"]),
        ("irrecevabilite", &["irrecevable", "irrecevables"]),
    ];
    entries.into_iter().map(|(k, vs)| (k.to_owned(), vs.iter().map(|v| v.to_string()).collect())).collect()
}

/// Reads a JSON object mapping words to arrays of variants.
pub fn parse_variant_map(json: &str) -> Result<VariantMap> {
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(json)?;
    Ok(raw.into_iter().map(|(k, vs)| (k, vs.into_iter().collect())).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskLexicon {
    pub forbidden: BTreeSet<String>,
    pub variant_map: VariantMap,
}

impl MaskLexicon {
    pub fn is_forbidden(&self, token: &str) -> bool {
        self.forbidden.contains(token)
    }

    /// True when any space-separated component of `ngram` is forbidden.
    pub fn touches(&self, ngram: &str) -> bool {
        ngram.split(' ').any(|w| self.forbidden.contains(w))
    }
}

fn normalized_words(s: &str) -> impl Iterator<Item = String> {
    normalize(s).split(' ').filter(|w| !w.is_empty()).map(str::to_owned).collect::<Vec<_>>().into_iter()
}

/// Forbids every word of every label plus the configured variants of those
/// words. Returns warnings for variant keys that occur in no label.
pub fn build_mask_lexicon<'a>(
    labels: impl IntoIterator<Item = &'a str>,
    variant_map: &VariantMap,
) -> (MaskLexicon, Vec<String>) {
    let mut forbidden: BTreeSet<String> = labels.into_iter().flat_map(normalized_words).collect();
    let label_words = forbidden.clone();
    let mut normalized_map = VariantMap::new();
    let mut warnings = Vec::new();
    for (key, variants) in variant_map {
        let key_norm = normalize(key);
        if !label_words.contains(&key_norm) {
            warnings.push(format!("variant entry {key:?} matches no label word"));
        }
        let vs: BTreeSet<String> = variants.iter().flat_map(|v| normalized_words(v)).collect();
        forbidden.extend(normalized_words(key));
        forbidden.extend(vs.iter().cloned());
        normalized_map.entry(key_norm).or_default().extend(vs);
    }
    (MaskLexicon { forbidden, variant_map: normalized_map }, warnings)
}

pub fn apply_mask(tokens: TokenSeq, lexicon: &MaskLexicon) -> TokenSeq {
    tokens.retain(|t| !lexicon.is_forbidden(t))
}

/// One-way ANOVA F statistic for every column of `x` grouped by `y`.
///
/// Missing sparse entries count as zeros. A column with no between-group
/// variance scores 0; one with between-group but no within-group variance
/// scores `f64::INFINITY`.
pub fn anova_f_scores<L: Ord>(x: &SparseMatrix, y: &[L]) -> Result<Vec<f64>> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), found: y.len() });
    }
    let classes: BTreeSet<&L> = y.iter().collect();
    let k = classes.len();
    let n = y.len();
    if k < 2 {
        return Err(Error::domain("ANOVA needs at least 2 classes"));
    }
    if n <= k {
        return Err(Error::domain(format!("ANOVA needs more instances ({n}) than classes ({k})")));
    }
    let class_of: Vec<usize> = {
        let order: Vec<&L> = classes.into_iter().collect();
        y.iter().map(|l| order.binary_search(&l).expect("known class")).collect()
    };
    let mut class_n = vec![0usize; k];
    for &c in &class_of {
        class_n[c] += 1;
    }
    let cols = x.cols();
    let mut sums = vec![vec![0.0f64; cols]; k];
    for (r, &c) in class_of.iter().enumerate() {
        let (idx, val) = x.row(r);
        for (&j, &v) in idx.iter().zip(val) {
            sums[c][j] += v;
        }
    }
    let mut ssw = vec![0.0f64; cols];
    let mut sq = vec![0.0f64; cols];
    let mut stored = vec![vec![0usize; cols]; k];
    for (r, &c) in class_of.iter().enumerate() {
        let (idx, val) = x.row(r);
        for (&j, &v) in idx.iter().zip(val) {
            let mean = sums[c][j] / class_n[c] as f64;
            ssw[j] += (v - mean) * (v - mean);
            sq[j] += v * v;
            stored[c][j] += 1;
        }
    }
    let mut scores = Vec::with_capacity(cols);
    for j in 0..cols {
        let total: f64 = (0..k).map(|c| sums[c][j]).sum();
        let grand = total / n as f64;
        let mut ssb = 0.0;
        let mut ssw_j = ssw[j];
        for c in 0..k {
            let mean = sums[c][j] / class_n[c] as f64;
            ssb += class_n[c] as f64 * (mean - grand) * (mean - grand);
            // implicit zeros
            ssw_j += (class_n[c] - stored[c][j]) as f64 * mean * mean;
        }
        let eps = 1e-12 * sq[j];
        let f = if ssb <= eps || sq[j] == 0.0 {
            0.0
        } else if ssw_j <= eps {
            f64::INFINITY
        } else {
            (ssb / (k - 1) as f64) / (ssw_j / (n - k) as f64)
        };
        scores.push(f);
    }
    Ok(scores)
}

/// A ranked feature with its F score.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RankedFeature {
    pub ngram: String,
    pub f_score: f64,
}

impl Serialize for RankedFeature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.ngram)?;
        if self.f_score.is_finite() {
            t.serialize_element(&self.f_score)?;
        } else {
            t.serialize_element("Infinity")?;
        }
        t.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskAuditReport {
    pub top_features: Vec<RankedFeature>,
    pub violations: Vec<String>,
}

/// Column indices sorted by descending F score, ties by column order.
pub fn rank_by_f(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| match scores[b].partial_cmp(&scores[a]) {
        Some(Ordering::Equal) | None => a.cmp(&b),
        Some(o) => o,
    });
    order
}

/// Reports the `k` highest-F n-grams and which of them contain a forbidden
/// word.
pub fn audit_masking<L: Ord>(
    x: &SparseMatrix,
    y: &[L],
    vocabulary: &Vocabulary,
    lexicon: &MaskLexicon,
    k: usize,
) -> Result<MaskAuditReport> {
    if x.cols() < vocabulary.len() {
        return Err(Error::DimensionMismatch { expected: vocabulary.len(), found: x.cols() });
    }
    let scores = anova_f_scores(x, y)?;
    let top_features: Vec<RankedFeature> = rank_by_f(&scores[..vocabulary.len()])
        .into_iter()
        .take(k)
        .map(|j| RankedFeature { ngram: vocabulary.terms()[j].clone(), f_score: scores[j] })
        .collect();
    let violations = top_features.iter().filter(|f| lexicon.touches(&f.ngram)).map(|f| f.ngram.clone()).collect();
    Ok(MaskAuditReport { top_features, violations })
}
