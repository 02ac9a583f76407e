use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub k: usize,
    /// Fold index of each instance.
    pub fold_of: Vec<usize>,
    pub warnings: Vec<String>,
}

impl FoldAssignment {
    /// `(train, test)` row indices for fold `f`, each in ascending order.
    pub fn split(&self, f: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.fold_of.len()).partition(|&i| self.fold_of[i] != f)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles each class with the seeded generator and deals its instances
/// round-robin across folds. Dealing continues where the previous class
/// stopped, so fold sizes stay within one of each other.
pub fn stratified_kfold<S: AsRef<str>>(y: &[S], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::config(format!("need at least 2 folds, got {k}")));
    }
    if y.len() < k {
        return Err(Error::config(format!("{} instances cannot fill {k} folds", y.len())));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in y.iter().enumerate() {
        by_class.entry(l.as_ref()).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; y.len()];
    let mut warnings = Vec::new();
    let mut next = 0;
    for (label, mut members) in by_class {
        if members.len() < k {
            warnings.push(format!("class {label:?} has {} instances, fewer than {k} folds", members.len()));
        }
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_of, warnings })
}
