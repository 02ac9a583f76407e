//! Linear SVM trained by dual coordinate descent, one-vs-rest multiclass, and
//! the stratified-prior dummy baseline.

mod dcd;
mod dummy;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseMatrix;

pub use dcd::{dual_objective, primal_objective, train_binary, BinarySolution};
pub use dummy::{dummy_fit, dummy_predict, DummyModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// L2-loss: squared hinge, dual unbounded above.
    #[default]
    SquaredHinge,
    /// L1-loss: hinge, dual boxed in `[0, C]`.
    Hinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop once the largest projected-gradient violation in an epoch falls
    /// below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub use_bias: bool,
    pub loss: Loss,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 0.1, tolerance: 1e-4, max_epochs: 1000, seed: 0, use_bias: true, loss: Loss::SquaredHinge }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::config(format!("C must be positive, got {}", self.c)));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_epochs == 0 {
            return Err(Error::config("max_epochs must be at least 1"));
        }
        Ok(())
    }
}

/// One weight vector per class; with a bias the last weight multiplies a
/// constant 1.0 feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub format_version: u32,
    pub class_order: Vec<String>,
    pub feature_dim: usize,
    pub weights: Vec<Vec<f64>>,
    pub config: SvmConfig,
}

impl SvmModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SvmModel = serde_json::from_str(s)?;
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::config(format!("unsupported model format version {}", self.format_version)));
        }
        if self.weights.len() != self.class_order.len() {
            return Err(Error::DimensionMismatch { expected: self.class_order.len(), found: self.weights.len() });
        }
        let width = self.feature_dim + usize::from(self.config.use_bias);
        for w in &self.weights {
            if w.len() != width {
                return Err(Error::DimensionMismatch { expected: width, found: w.len() });
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("model has non-finite weights"));
            }
        }
        Ok(())
    }

    /// Per-row, per-class decision values.
    pub fn decision_function(&self, x: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
        if x.cols() != self.feature_dim {
            return Err(Error::DimensionMismatch { expected: self.feature_dim, found: x.cols() });
        }
        Ok((0..x.rows())
            .map(|r| {
                self.weights
                    .iter()
                    .map(|w| {
                        let bias = if self.config.use_bias { w[self.feature_dim] } else { 0.0 };
                        x.row_dot(r, w) + bias
                    })
                    .collect()
            })
            .collect())
    }
}

/// Trains one binary separator per class, class order sorted.
pub fn train_ovr(x: &SparseMatrix, y: &[String], config: &SvmConfig) -> Result<SvmModel> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.rows(), found: y.len() });
    }
    let class_order: Vec<String> = y.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if class_order.len() < 2 {
        return Err(Error::domain(format!("one-vs-rest training needs at least 2 classes, found {:?}", class_order)));
    }
    let weights = class_order
        .par_iter()
        .map(|class| {
            let signs: Vec<f64> = y.iter().map(|l| if l == class { 1.0 } else { -1.0 }).collect();
            train_binary(x, &signs, config).map(|s| s.weights)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SvmModel { format_version: MODEL_FORMAT_VERSION, class_order, feature_dim: x.cols(), weights, config: *config })
}

/// Index of the largest score; ties go to the smallest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn predict(model: &SvmModel, x: &SparseMatrix) -> Result<Vec<String>> {
    Ok(model.decision_function(x)?.iter().map(|s| model.class_order[argmax(s)].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn separable() -> (SparseMatrix, Vec<String>) {
        // each class owns one column
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, label) in ["a", "b", "c"].iter().enumerate() {
            for rep in 0..4 {
                let mut r = vec![0.0; 4];
                r[c] = 1.0 + rep as f64;
                r[3] = (rep % 2) as f64;
                rows.push(r);
                y.push(label.to_string());
            }
        }
        (SparseMatrix::from_dense(&rows).unwrap(), y)
    }

    #[test]
    fn separable_three_class_fits_training_data() {
        let (x, y) = separable();
        let model = train_ovr(&x, &y, &SvmConfig::default()).unwrap();
        assert_eq!(model.class_order, strings(&["a", "b", "c"]));
        assert_eq!(predict(&model, &x).unwrap(), y);
        let again = train_ovr(&x, &y, &SvmConfig::default()).unwrap();
        assert_eq!(model, again);
    }

    #[test]
    fn two_class_reduction_matches_sign_rule() {
        let x = SparseMatrix::from_dense(&[vec![1.0, 0.2], vec![0.9, 0.0], vec![0.0, 1.0], vec![0.1, 0.8]]).unwrap();
        let y = strings(&["p", "p", "q", "q"]);
        let model = train_ovr(&x, &y, &SvmConfig::default()).unwrap();
        let scores = model.decision_function(&x).unwrap();
        let pred = predict(&model, &x).unwrap();
        for (s, p) in scores.iter().zip(&pred) {
            let by_sign = if s[0] - s[1] >= 0.0 { "p" } else { "q" };
            assert_eq!(p, by_sign);
        }
    }

    #[test]
    fn zero_weights_predict_first_class() {
        let model = SvmModel {
            format_version: MODEL_FORMAT_VERSION,
            class_order: strings(&["a", "b"]),
            feature_dim: 2,
            weights: vec![vec![0.0; 3], vec![0.0; 3]],
            config: SvmConfig::default(),
        };
        let x = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(predict(&model, &x).unwrap(), strings(&["a", "a"]));
        let wrong = SparseMatrix::from_dense(&[vec![1.0]]).unwrap();
        assert!(matches!(predict(&model, &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax(&[0.2, 0.9, 0.1]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = SparseMatrix::from_dense(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(train_ovr(&x, &strings(&["a", "a"]), &SvmConfig::default()).is_err());
    }

    #[test]
    fn model_json_round_trip_and_validation() {
        let (x, y) = separable();
        let model = train_ovr(&x, &y, &SvmConfig::default()).unwrap();
        let json = model.to_json().unwrap();
        assert_eq!(SvmModel::from_json(&json).unwrap(), model);
        let mut bad: serde_json::Value = serde_json::from_str(&json).unwrap();
        bad["format_version"] = 99.into();
        assert!(SvmModel::from_json(&bad.to_string()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SvmConfig { c: 0.0, ..Default::default() }.validate().is_err());
        assert!(SvmConfig { tolerance: 0.0, ..Default::default() }.validate().is_err());
        assert!(SvmConfig { max_epochs: 0, ..Default::default() }.validate().is_err());
        assert!(SvmConfig::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn prediction_invariant_under_positive_rescaling(scale in 0.01f64..100.0) {
            let (x, y) = separable();
            let model = train_ovr(&x, &y, &SvmConfig::default()).unwrap();
            let mut scaled = model.clone();
            for w in &mut scaled.weights {
                for v in w.iter_mut() {
                    *v *= scale;
                }
            }
            prop_assert_eq!(predict(&model, &x).unwrap(), predict(&scaled, &x).unwrap());
        }
    }
}
