use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{metrics_from_confusion, Metrics};
use super::Averaging;

/// Cross-validated results for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub class_order: Vec<String>,
    pub fold_confusions: Vec<Vec<Vec<u64>>>,
    /// Metrics of the summed confusion matrix.
    pub pooled: Metrics,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn from_folds(model: &str, class_order: Vec<String>, fold_confusions: Vec<Vec<Vec<u64>>>) -> Self {
        let k = class_order.len();
        let mut summed = vec![vec![0u64; k]; k];
        for m in &fold_confusions {
            for (row, fold_row) in summed.iter_mut().zip(m) {
                for (a, b) in row.iter_mut().zip(fold_row) {
                    *a += b;
                }
            }
        }
        let pooled = metrics_from_confusion(summed, &class_order);
        let mut warnings = Vec::new();
        if pooled.zero_division > 0 {
            warnings.push(format!("{} metric values defined as 0 for a zero denominator", pooled.zero_division));
        }
        EvalReport { model: model.to_owned(), class_order, fold_confusions, pooled, warnings }
    }

    pub fn accuracy(&self) -> f64 {
        self.pooled.accuracy
    }

    pub fn weighted_f1(&self) -> f64 {
        self.pooled.weighted.f1
    }
}

fn pct(v: f64) -> String {
    format!("{:.1}%", 100.0 * v)
}

/// Aligned `Model  P  R  F1  Acc.` table.
pub(super) fn render_table(reports: &[&EvalReport], averaging: Averaging) -> String {
    let mut rows: Vec<[String; 5]> = vec![["Model", "P", "R", "F1", "Acc."].map(String::from)];
    for r in reports {
        let m = &r.pooled;
        if matches!(averaging, Averaging::Weighted | Averaging::Both) {
            rows.push([
                r.model.clone(),
                pct(m.weighted.precision),
                pct(m.weighted.recall),
                pct(m.weighted.f1),
                pct(m.accuracy),
            ]);
        }
        if matches!(averaging, Averaging::Macro | Averaging::Both) {
            rows.push([
                format!("{} (macro)", r.model),
                pct(m.macro_avg.precision),
                pct(m.macro_avg.recall),
                pct(m.macro_avg.f1),
                pct(m.accuracy),
            ]);
        }
    }
    let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(out, "{:<w$}", row[0], w = widths[0]);
        for c in 1..5 {
            let _ = write!(out, "  {:>w$}", row[c], w = widths[c]);
        }
        out.push('\n');
        if i == 0 {
            out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 8));
            out.push('\n');
        }
    }
    out
}
