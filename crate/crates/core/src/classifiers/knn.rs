//! Distance-weighted k-nearest neighbours.
//!
//! `Score(x, C) = sum over the k nearest training documents d in C of
//! sim(x, d)`, with `sim(x, d) = 1 / (1 + ||x - d||)`. Neighbours tied on
//! distance at the k boundary are taken in training order.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::eval::folds::stratified_assignments;
use crate::eval::metrics::ConfusionMatrix;
use crate::features::{Dataset, SparseVector};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct KnnModel<F> {
    pub train_vectors: Vec<SparseVector<F>>,
    pub train_labels: Vec<usize>,
    pub k: usize,
    pub num_categories: usize,
}

pub fn euclidean_distance<F: Scalar>(a: &SparseVector<F>, b: &SparseVector<F>) -> F {
    a.squared_distance(b).sqrt()
}

pub fn train_knn<F: Scalar>(data: &Dataset<F>, k: usize) -> Result<KnnModel<F>> {
    if k == 0 || k > data.len() {
        return Err(Error::Validation(format!(
            "k = {k} must lie in [1, {}] (the training size)",
            data.len()
        )));
    }
    Ok(KnnModel {
        train_vectors: data.vectors.clone(),
        train_labels: data.labels.clone(),
        k,
        num_categories: data.num_categories,
    })
}

/// Training indices ordered by (distance, index).
fn neighbours_by_distance<F: Scalar>(train: &[SparseVector<F>], x: &SparseVector<F>) -> Vec<(F, usize)> {
    let mut d: Vec<(F, usize)> = train.iter().enumerate().map(|(i, v)| (euclidean_distance(x, v), i)).collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    d
}

fn scores_from_neighbours<F: Scalar>(ranked: &[(F, usize)], labels: &[usize], k: usize, m: usize) -> Vec<F> {
    let mut scores = vec![F::zero(); m];
    for &(dist, i) in &ranked[..k.min(ranked.len())] {
        scores[labels[i]] = scores[labels[i]] + F::one() / (F::one() + dist);
    }
    scores
}

pub fn knn_scores<F: Scalar>(model: &KnnModel<F>, x: &SparseVector<F>) -> Vec<F> {
    let ranked = neighbours_by_distance(&model.train_vectors, x);
    scores_from_neighbours(&ranked, &model.train_labels, model.k, model.num_categories)
}

pub fn knn_predict<F: Scalar>(model: &KnnModel<F>, x: &SparseVector<F>) -> usize {
    argmax(&knn_scores(model, x))
}

/// Picks k from `candidates` by internal stratified cross-validation on
/// `data`, maximizing pooled macro F1. Ties go to the smaller k.
///
/// Candidates larger than the smallest internal training split are skipped;
/// if none remain, the smallest candidate is returned.
pub fn tune_k<F: Scalar>(data: &Dataset<F>, candidates: RangeInclusive<usize>, folds: usize, seed: u64) -> Result<usize> {
    let (lo, hi) = (*candidates.start(), *candidates.end());
    if lo == 0 || lo > hi {
        return Err(Error::Input(format!("invalid k range {lo}..={hi}")));
    }
    if lo == hi {
        return Ok(lo);
    }
    let folds = folds.clamp(2, data.len().max(2));
    let assignment = stratified_assignments(&data.labels, data.num_categories, folds, seed);

    let mut matrices: Vec<ConfusionMatrix> = (lo..=hi).map(|_| ConfusionMatrix::new(data.num_categories)).collect();
    let mut min_train = usize::MAX;
    for fold in 0..folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != fold).collect();
        let test: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == fold).collect();
        if test.is_empty() {
            continue;
        }
        min_train = min_train.min(train.len());
        let train_vectors: Vec<SparseVector<F>> = train.iter().map(|&i| data.vectors[i].clone()).collect();
        let train_labels: Vec<usize> = train.iter().map(|&i| data.labels[i]).collect();
        for &t in &test {
            let ranked = neighbours_by_distance(&train_vectors, &data.vectors[t]);
            for (slot, k) in (lo..=hi).enumerate() {
                let scores = scores_from_neighbours(&ranked, &train_labels, k, data.num_categories);
                matrices[slot].record(data.labels[t], argmax(&scores));
            }
        }
    }

    let mut best: Option<(f64, usize)> = None;
    for (slot, k) in (lo..=hi).enumerate() {
        if k > min_train {
            break;
        }
        let f1 = matrices[slot].macro_f1();
        if best.is_none_or(|(b, _)| f1 > b) {
            best = Some((f1, k));
        }
    }
    Ok(best.map_or(lo, |(_, k)| k))
}
