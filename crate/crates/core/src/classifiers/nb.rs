//! Presence-based naive Bayes.
//!
//! With `|C|` the number of training documents in class `C` and
//! `df(w, C)` the number of those containing term `w`:
//!
//! ```text
//! p(C)     = |C| / sum_j |C_j|
//! P(w | C) = (df(w, C) + 1) / |C|
//! score(C) = ln p(C) + sum over distinct document terms w of ln P(w | C)
//! ```
//!
//! The conditional uses document frequencies with add-one in the numerator
//! over the class size, so it is not a normalized distribution over the
//! vocabulary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::argmax;
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct NbModel<F> {
    pub log_priors: Vec<F>,
    /// Per category: term index → number of class documents containing it.
    pub df_counts: Vec<BTreeMap<usize, usize>>,
    pub class_doc_counts: Vec<usize>,
}

pub fn train_nb<F: Scalar>(data: &Dataset<F>) -> Result<NbModel<F>> {
    let m = data.num_categories;
    let mut class_doc_counts = vec![0usize; m];
    let mut df_counts = vec![BTreeMap::new(); m];
    for (terms, &label) in data.term_sets.iter().zip(&data.labels) {
        class_doc_counts[label] += 1;
        for &t in terms {
            *df_counts[label].entry(t).or_insert(0usize) += 1;
        }
    }
    if let Some(empty) = class_doc_counts.iter().position(|&n| n == 0) {
        return Err(Error::Validation(format!("category {empty} has no training documents")));
    }
    let total = F::count(data.len());
    let log_priors = class_doc_counts.iter().map(|&n| (F::count(n) / total).ln()).collect();
    Ok(NbModel {
        log_priors,
        df_counts,
        class_doc_counts,
    })
}

/// `terms` must be distinct; each one contributes once.
pub fn nb_scores<F: Scalar>(model: &NbModel<F>, terms: &[usize]) -> Vec<F> {
    model
        .log_priors
        .iter()
        .enumerate()
        .map(|(c, &prior)| {
            let size = F::count(model.class_doc_counts[c]);
            let df = &model.df_counts[c];
            terms.iter().fold(prior, |acc, t| {
                let n = df.get(t).copied().unwrap_or(0);
                acc + (F::count(n + 1) / size).ln()
            })
        })
        .collect()
}

pub fn predict_nb<F: Scalar>(model: &NbModel<F>, terms: &[usize]) -> usize {
    argmax(&nb_scores(model, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_vocabulary, SparseVector};
    use std::sync::Arc;

    fn dataset(term_sets: Vec<Vec<usize>>, labels: Vec<usize>, m: usize) -> Dataset<f64> {
        let vocab_terms: Vec<Vec<String>> = vec![(0..10).map(|i| format!("t{i}")).collect()];
        Dataset {
            vectors: vec![SparseVector::zero(); labels.len()],
            term_sets,
            labels,
            num_categories: m,
            vocab: Arc::new(build_vocabulary(&vocab_terms).unwrap()),
        }
    }

    #[test]
    fn prior_from_class_sizes() {
        let sizes = [160, 200, 220, 240, 180];
        let labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &n)| vec![c; n]).collect();
        let d = dataset(vec![vec![]; labels.len()], labels, 5);
        let m = train_nb(&d).unwrap();
        assert!((m.log_priors[3].exp() - 0.24).abs() < 1e-12);
        let total: f64 = m.log_priors.iter().map(|p| p.exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn conditional_is_add_one_over_class_size() {
        // term 0 in 3 of 10 class-0 documents
        let mut sets = vec![vec![0]; 3];
        sets.extend(vec![vec![1]; 7]);
        sets.push(vec![2]);
        let mut labels = vec![0; 10];
        labels.push(1);
        let m = train_nb(&dataset(sets, labels, 2)).unwrap();
        let base = m.log_priors[0];
        assert!((nb_scores(&m, &[0])[0] - base - 0.4f64.ln()).abs() < 1e-12);
        // term 5 unseen in class 0
        assert!((nb_scores(&m, &[5])[0] - base - 0.1f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_document_uses_priors() {
        let d = dataset(vec![vec![0], vec![1], vec![1]], vec![0, 1, 1], 2);
        let m = train_nb(&d).unwrap();
        assert_eq!(nb_scores(&m, &[]), m.log_priors);
        assert_eq!(predict_nb(&m, &[]), 1);
    }

    #[test]
    fn single_category_always_wins() {
        let d = dataset(vec![vec![0], vec![1]], vec![0, 0], 1);
        let m = train_nb(&d).unwrap();
        for t in [vec![], vec![0], vec![3, 4]] {
            assert_eq!(predict_nb(&m, &t), 0);
        }
    }

    #[test]
    fn missing_category_is_rejected() {
        let d = dataset(vec![vec![0]], vec![0], 2);
        assert!(matches!(train_nb(&d), Err(Error::Validation(_))));
    }

    #[test]
    fn duplication_keeps_priors_but_not_add_one_conditionals() {
        let sets = vec![vec![1], vec![2], vec![1, 2], vec![1], vec![0, 1]];
        let labels = vec![0, 1, 0, 1, 1];
        let once = train_nb(&dataset(sets.clone(), labels.clone(), 2)).unwrap();
        let twice = train_nb(&dataset([sets.clone(), sets].concat(), [labels.clone(), labels].concat(), 2)).unwrap();
        for (a, b) in once.log_priors.iter().zip(&twice.log_priors) {
            assert!((a - b).abs() < 1e-12);
        }
        // (df + 1) / |C| is not scale-free, so the winner can move
        assert_eq!(predict_nb(&once, &[0, 1, 2]), 0);
        assert_eq!(predict_nb(&twice, &[0, 1, 2]), 1);
    }
}
