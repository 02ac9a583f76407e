use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Metrics derived from one confusion matrix (`confusion[gold][pred]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassMetrics>,
    pub weighted: Averages,
    #[serde(rename = "macro")]
    pub macro_avg: Averages,
    pub accuracy: f64,
    /// Number of precision/recall/F1 values set to 0 for a zero denominator.
    pub zero_division: usize,
}

pub fn confusion_matrix<S: AsRef<str>>(gold: &[S], pred: &[S], class_order: &[String]) -> Result<Vec<Vec<u64>>> {
    if gold.len() != pred.len() {
        return Err(Error::DimensionMismatch { expected: gold.len(), found: pred.len() });
    }
    let index: HashMap<&str, usize> = class_order.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let lookup =
        |l: &str| index.get(l).copied().ok_or_else(|| Error::domain(format!("label {l:?} not in class order")));
    let k = class_order.len();
    let mut m = vec![vec![0u64; k]; k];
    for (g, p) in gold.iter().zip(pred) {
        m[lookup(g.as_ref())?][lookup(p.as_ref())?] += 1;
    }
    Ok(m)
}

fn ratio(num: u64, den: u64, zero_division: &mut usize) -> f64 {
    if den == 0 {
        *zero_division += 1;
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics_from_confusion(confusion: Vec<Vec<u64>>, class_order: &[String]) -> Metrics {
    let k = class_order.len();
    let total: u64 = confusion.iter().flatten().sum();
    let mut zero_division = 0;
    let mut per_class = Vec::with_capacity(k);
    for c in 0..k {
        let tp = confusion[c][c];
        let support: u64 = confusion[c].iter().sum();
        let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
        let precision = ratio(tp, predicted, &mut zero_division);
        let recall = ratio(tp, support, &mut zero_division);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            zero_division += 1;
            0.0
        };
        per_class.push(ClassMetrics { label: class_order[c].clone(), precision, recall, f1, support });
    }
    let mut weighted = Averages::default();
    let mut macro_avg = Averages::default();
    for m in &per_class {
        let w = if total > 0 { m.support as f64 / total as f64 } else { 0.0 };
        weighted.precision += w * m.precision;
        weighted.recall += w * m.recall;
        weighted.f1 += w * m.f1;
        macro_avg.precision += m.precision / k as f64;
        macro_avg.recall += m.recall / k as f64;
        macro_avg.f1 += m.f1 / k as f64;
    }
    let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
    let accuracy = if total > 0 { correct as f64 / total as f64 } else { 0.0 };
    Metrics { confusion, per_class, weighted, macro_avg, accuracy, zero_division }
}

pub fn confusion_and_metrics<S: AsRef<str>>(gold: &[S], pred: &[S], class_order: &[String]) -> Result<Metrics> {
    Ok(metrics_from_confusion(confusion_matrix(gold, pred, class_order)?, class_order))
}

/// Expected accuracy of a classifier sampling from the class distribution
/// given by `counts`: the sum of squared class proportions.
pub fn expected_dummy_accuracy<I: IntoIterator<Item = u64>>(counts: I) -> f64 {
    let counts: Vec<u64> = counts.into_iter().collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts.iter().map(|&c| (c as f64 / total as f64).powi(2)).sum()
}
