//! Precision, recall and F1 from a confusion matrix, macro-averaged.
//!
//! For a category with true set A (its row) and predicted set B (its
//! column): `R = |A ∩ B| / |A|`, `P = |A ∩ B| / |B|`, `F1 = 2PR / (P + R)`.
//! Empty denominators give 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifiers::ClassifierKind;
use crate::error::{Error, Result};

/// Rows are true categories, columns predicted ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(categories: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; categories]; categories],
        }
    }

    pub fn from_pairs(categories: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut cm = Self::new(categories);
        for (t, p) in pairs {
            cm.record(t, p);
        }
        cm
    }

    pub fn categories(&self) -> usize {
        self.counts.len()
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    /// Element-wise sum; order of merging does not matter.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(other_row) {
                *a += b;
            }
        }
    }

    pub fn row_sum(&self, c: usize) -> usize {
        self.counts[c].iter().sum()
    }

    pub fn column_sum(&self, c: usize) -> usize {
        self.counts.iter().map(|row| row[c]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..self.categories()).map(|c| self.counts[c][c]).sum::<usize>() as f64 / total as f64
    }

    /// Macro-averaged F1 as a fraction in [0, 1].
    pub fn macro_f1(&self) -> f64 {
        let per: Vec<f64> = (0..self.categories())
            .map(|c| {
                let (p, r) = precision_recall(self, c);
                f1(p, r)
            })
            .collect();
        macro_f1(&per).unwrap_or(0.0)
    }
}

/// `(precision, recall)` of `category` as fractions.
pub fn precision_recall(cm: &ConfusionMatrix, category: usize) -> (f64, f64) {
    let hit = cm.counts[category][category] as f64;
    let predicted = cm.column_sum(category);
    let actual = cm.row_sum(category);
    let p = if predicted == 0 { 0.0 } else { hit / predicted as f64 };
    let r = if actual == 0 { 0.0 } else { hit / actual as f64 };
    (p, r)
}

/// Harmonic mean; works in any unit (fractions or percent).
pub fn f1(precision: f64, recall: f64) -> f64 {
    let s = precision + recall;
    if s == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / s
    }
}

pub fn macro_f1(per_category: &[f64]) -> Result<f64> {
    if per_category.is_empty() {
        return Err(Error::Validation("macro average of an empty list".into()));
    }
    Ok(per_category.iter().sum::<f64>() / per_category.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub category: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-category metrics in percent, computed from one (pooled) confusion
/// matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classifier: ClassifierKind,
    pub categories: Vec<CategoryMetrics>,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
    /// Wall-clock training time summed over folds. Left out of JSON unless
    /// set, so reports stay byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_seconds: Option<f64>,
}

impl MetricsReport {
    pub fn from_confusion(classifier: ClassifierKind, names: &[String], confusion: ConfusionMatrix) -> Self {
        let categories: Vec<CategoryMetrics> = names
            .iter()
            .enumerate()
            .map(|(c, name)| {
                let (p, r) = precision_recall(&confusion, c);
                CategoryMetrics {
                    category: name.clone(),
                    precision: 100.0 * p,
                    recall: 100.0 * r,
                    f1: 100.0 * f1(p, r),
                }
            })
            .collect();
        let per: Vec<f64> = categories.iter().map(|m| m.f1).collect();
        MetricsReport {
            classifier,
            macro_f1: macro_f1(&per).unwrap_or(0.0),
            categories,
            confusion,
            training_seconds: None,
        }
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} classifier results", self.classifier.name().to_uppercase())?;
        writeln!(f, "Category\tPrecision %\tRecall %\tF-measure %")?;
        for m in &self.categories {
            writeln!(f, "{}\t{:.2}\t{:.2}\t{:.2}", m.category, m.precision, m.recall, m.f1)?;
        }
        writeln!(f, "Macro Average\t\t\t{:.2}", self.macro_f1)?;
        if let Some(s) = self.training_seconds {
            writeln!(f, "Training time (s)\t{s:.3}")?;
        }
        Ok(())
    }
}
