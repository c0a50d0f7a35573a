//! Experiment drivers: k-fold cross-validation, learning curves and
//! training-time benchmarks.
//!
//! Every driver fits the vocabulary on the training documents only; test
//! documents are projected onto it.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::metrics::{ConfusionMatrix, MetricsReport};
use crate::classifiers::{train, ClassifierConfig, ClassifierKind};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{preprocess_corpus, vectorize_corpus, Dataset};
use crate::preprocess::PipelineConfig;
use crate::scalar::Scalar;

/// Fits on `train_rows`, predicts `test_rows`, per classifier.
fn fit_and_score<F: Scalar>(
    terms: &[Vec<String>],
    labels: &[usize],
    num_categories: usize,
    train_rows: &[usize],
    test_rows: &[usize],
    classifiers: &[ClassifierKind],
    cfg: &ClassifierConfig,
) -> Result<Vec<(ConfusionMatrix, f64)>> {
    let train_docs: Vec<&[String]> = train_rows.iter().map(|&i| terms[i].as_slice()).collect();
    let train_labels = train_rows.iter().map(|&i| labels[i]).collect();
    let train_set = Dataset::<F>::fit(&train_docs, train_labels, num_categories)?;
    let test_docs: Vec<&[String]> = test_rows.iter().map(|&i| terms[i].as_slice()).collect();
    let test_labels: Vec<usize> = test_rows.iter().map(|&i| labels[i]).collect();
    let test_set = Dataset::<F>::project(train_set.vocab.clone(), &test_docs, test_labels, num_categories)?;

    classifiers
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let model = train(kind, &train_set, cfg)?;
            let seconds = start.elapsed().as_secs_f64();
            let mut cm = ConfusionMatrix::new(num_categories);
            for ((v, terms), &truth) in test_set.vectors.iter().zip(&test_set.term_sets).zip(&test_set.labels) {
                cm.record(truth, model.predict(v, terms));
            }
            Ok((cm, seconds))
        })
        .collect()
}

/// Runs every fold of `plan` and reports metrics from the confusion matrix
/// pooled over all folds, one report per classifier (in `classifiers`
/// order). Training time is summed across folds.
pub fn run_cv<F: Scalar>(
    corpus: &Corpus,
    pipeline: &PipelineConfig,
    cfg: &ClassifierConfig,
    classifiers: &[ClassifierKind],
    plan: &FoldPlan,
) -> Result<Vec<MetricsReport>> {
    if plan.assignments.len() != corpus.len() {
        return Err(Error::Validation("fold plan does not match the corpus size".into()));
    }
    let terms = preprocess_corpus(corpus, pipeline);
    let m = corpus.categories().len();
    let per_fold = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let test = plan.test_indices(fold);
            if test.is_empty() {
                return Ok(Vec::new());
            }
            fit_and_score::<F>(&terms, corpus.labels(), m, &plan.train_indices(fold), &test, classifiers, cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(classifiers
        .iter()
        .enumerate()
        .map(|(slot, &kind)| {
            let mut pooled = ConfusionMatrix::new(m);
            let mut seconds = 0.0;
            for fold in per_fold.iter().filter(|f| !f.is_empty()) {
                pooled.merge(&fold[slot].0);
                seconds += fold[slot].1;
            }
            let mut report = MetricsReport::from_confusion(kind, corpus.categories(), pooled);
            report.training_seconds = Some(seconds);
            report
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub steps: usize,
    pub step_size: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for CurveSpec {
    fn default() -> Self {
        CurveSpec {
            steps: 5,
            step_size: 30,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub classifier: ClassifierKind,
    pub train_size: usize,
    /// Macro F1 on the holdout, in percent.
    pub macro_f1: f64,
}

/// Orders `pools` (shuffled per-category candidates) so that every prefix
/// is as close to the pool proportions as possible.
fn proportional_order(pools: &[Vec<usize>]) -> Vec<usize> {
    let total: usize = pools.iter().map(Vec::len).sum();
    let mut taken = vec![0usize; pools.len()];
    let mut order = Vec::with_capacity(total);
    for _ in 0..total {
        // category furthest behind its share: smallest (taken + 1) / size
        let mut pick: Option<usize> = None;
        for (c, pool) in pools.iter().enumerate() {
            if taken[c] == pool.len() {
                continue;
            }
            let better = match pick {
                None => true,
                Some(p) => (taken[c] + 1) * pools[p].len() < (taken[p] + 1) * pool.len(),
            };
            if better {
                pick = Some(c);
            }
        }
        let c = pick.expect("some pool has documents left");
        order.push(pools[c][taken[c]]);
        taken[c] += 1;
    }
    order
}

/// Trains on nested, stratified subsets of `step_size`, `2 * step_size`, ...
/// documents and scores each on one fixed stratified holdout.
pub fn learning_curve<F: Scalar>(
    corpus: &Corpus,
    pipeline: &PipelineConfig,
    cfg: &ClassifierConfig,
    classifiers: &[ClassifierKind],
    spec: &CurveSpec,
) -> Result<Vec<CurvePoint>> {
    if spec.steps == 0 || spec.step_size == 0 {
        return Err(Error::Input("learning curve needs steps >= 1 and step_size >= 1".into()));
    }
    if !(spec.holdout_fraction > 0.0 && spec.holdout_fraction < 1.0) {
        return Err(Error::Input("holdout fraction must lie in (0, 1)".into()));
    }
    let m = corpus.categories().len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut holdout = Vec::new();
    let mut pools = Vec::with_capacity(m);
    for c in 0..m {
        let mut members: Vec<usize> = (0..corpus.len()).filter(|&i| corpus.labels()[i] == c).collect();
        members.shuffle(&mut rng);
        let n = members.len();
        let h = ((n as f64 * spec.holdout_fraction).round() as usize).clamp(1, n.saturating_sub(1).max(1));
        holdout.extend(members.drain(..h));
        pools.push(members);
    }
    let order = proportional_order(&pools);
    let needed = spec.steps * spec.step_size;
    if order.len() < needed {
        return Err(Error::Validation(format!(
            "learning curve needs {needed} training documents beyond the holdout, only {} available",
            order.len()
        )));
    }
    holdout.sort_unstable();

    let terms = preprocess_corpus(corpus, pipeline);
    let rows = (1..=spec.steps)
        .into_par_iter()
        .map(|step| {
            let size = step * spec.step_size;
            let scored = fit_and_score::<F>(&terms, corpus.labels(), m, &order[..size], &holdout, classifiers, cfg)?;
            Ok(classifiers
                .iter()
                .zip(scored)
                .map(|(&classifier, (cm, _))| CurvePoint {
                    classifier,
                    train_size: size,
                    macro_f1: MetricsReport::from_confusion(classifier, corpus.categories(), cm).macro_f1,
                })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points: Vec<CurvePoint> = rows.into_iter().flatten().collect();
    points.sort_by_key(|p| (p.classifier, p.train_size));
    Ok(points)
}

/// CSV with header `classifier,train_size,macro_f1`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("classifier,train_size,macro_f1\n");
    for p in points {
        out.push_str(&format!("{},{},{:.4}\n", p.classifier, p.train_size, p.macro_f1));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub classifier: ClassifierKind,
    pub repeats: usize,
    pub median_seconds: f64,
}

/// Median wall-clock seconds to train each classifier on the full corpus.
pub fn bench_training<F: Scalar>(
    corpus: &Corpus,
    pipeline: &PipelineConfig,
    cfg: &ClassifierConfig,
    classifiers: &[ClassifierKind],
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    if repeats == 0 {
        return Err(Error::Input("repeats must be at least 1".into()));
    }
    let data = vectorize_corpus::<F>(corpus, pipeline)?;
    classifiers
        .iter()
        .map(|&classifier| {
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let start = Instant::now();
                train(classifier, &data, cfg)?;
                times.push(start.elapsed().as_secs_f64());
            }
            times.sort_by(f64::total_cmp);
            let mid = times.len() / 2;
            let median = if times.len() % 2 == 1 { times[mid] } else { (times[mid - 1] + times[mid]) / 2.0 };
            Ok(BenchRow {
                classifier,
                repeats,
                median_seconds: median,
            })
        })
        .collect()
}
