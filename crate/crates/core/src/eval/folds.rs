use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Assignment of every document to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }
}

/// Shuffles each category's documents with one seeded generator (categories
/// in index order) and deals them round-robin into `k` folds.
///
/// Per-category fold sizes therefore differ by at most one. Categories
/// smaller than `k` simply leave some folds without members.
pub fn stratified_assignments(labels: &[usize], num_categories: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for c in 0..num_categories {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for (pos, doc) in members.into_iter().enumerate() {
            assignment[doc] = pos % k;
        }
    }
    assignment
}

pub fn stratified_kfold(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Input(format!("fold count must be at least 2, got {k}")));
    }
    for (name, &n) in corpus.categories().iter().zip(corpus.counts()) {
        if n < k {
            return Err(Error::Validation(format!(
                "category `{name}` has {n} documents, fewer than the {k} folds"
            )));
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments: stratified_assignments(corpus.labels(), corpus.categories().len(), k, seed),
    })
}
