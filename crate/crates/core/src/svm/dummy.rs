use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Predicts by sampling labels from the training class distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DummyModel {
    pub class_order: Vec<String>,
    pub priors: Vec<f64>,
    pub seed: u64,
}

pub fn dummy_fit<S: AsRef<str>>(y: &[S], seed: u64) -> Result<DummyModel> {
    if y.is_empty() {
        return Err(Error::domain("dummy baseline needs at least one label"));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in y {
        *counts.entry(l.as_ref()).or_default() += 1;
    }
    let total = y.len() as f64;
    let (class_order, priors) = counts.into_iter().map(|(l, c)| (l.to_owned(), c as f64 / total)).unzip();
    Ok(DummyModel { class_order, priors, seed })
}

/// `n` independent draws from the priors, deterministic per model seed.
pub fn dummy_predict(model: &DummyModel, n: usize) -> Vec<String> {
    let dist = WeightedIndex::new(&model.priors).expect("priors are nonnegative and sum to 1");
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    (0..n).map(|_| model.class_order[dist.sample(&mut rng)].clone()).collect()
}
