//! The four supervised classifiers behind one train / predict contract.
//!
//! Every tie, wherever it occurs, goes to the lowest category index.

pub mod knn;
pub mod nb;
pub mod svm;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, SparseVector};
use crate::scalar::Scalar;

pub use knn::{euclidean_distance, knn_predict, knn_scores, train_knn, tune_k, KnnModel};
pub use nb::{nb_scores, predict_nb, train_nb, NbModel};
pub use svm::{
    kernel_eval, svm_predict, train_binary_svm, train_svm, Kernel, SmoParams, SvmBinaryModel, SvmModel,
};
pub use tree::{best_split, train_c45, tree_predict, SplitChoice, TreeNode, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Nb,
    Knn,
    C45,
    Svm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [ClassifierKind::Nb, ClassifierKind::Knn, ClassifierKind::C45, ClassifierKind::Svm];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Nb => "nb",
            ClassifierKind::Knn => "knn",
            ClassifierKind::C45 => "c45",
            ClassifierKind::Svm => "svm",
        }
    }

    /// Parses `all` or a comma-separated list such as `nb,svm`.
    pub fn parse_selection(s: &str) -> Result<Vec<ClassifierKind>> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut kinds = s.split(',').map(|p| p.trim().parse()).collect::<Result<Vec<ClassifierKind>>>()?;
        kinds.sort();
        kinds.dedup();
        if kinds.is_empty() {
            return Err(Error::Input("empty classifier selection".into()));
        }
        Ok(kinds)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nb" => Ok(ClassifierKind::Nb),
            "knn" => Ok(ClassifierKind::Knn),
            "c45" | "c4.5" | "dt" => Ok(ClassifierKind::C45),
            "svm" => Ok(ClassifierKind::Svm),
            other => Err(Error::Input(format!("unknown classifier `{other}` (expected nb, knn, c45, svm or all)"))),
        }
    }
}

/// Neighbour count: fixed, or chosen per training set by internal
/// cross-validation over a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KChoice {
    Fixed(usize),
    Auto { min: usize, max: usize, folds: usize, seed: u64 },
}

impl KChoice {
    pub fn auto() -> Self {
        KChoice::Auto { min: 1, max: 10, folds: 3, seed: 0 }
    }
}

impl Default for KChoice {
    fn default() -> Self {
        KChoice::Fixed(5)
    }
}

/// Kernel as configured, before the vocabulary size is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum KernelSpec {
    Linear,
    /// `gamma = None` means `1 / vocabulary_size`.
    Sigmoid { gamma: Option<f64>, coef0: f64 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Sigmoid { gamma: None, coef0: 0.0 }
    }
}

impl KernelSpec {
    pub fn resolve<F: Scalar>(self, vocab_size: usize) -> Kernel<F> {
        match self {
            KernelSpec::Linear => Kernel::Linear,
            KernelSpec::Sigmoid { gamma, coef0 } => Kernel::Sigmoid {
                gamma: F::of(gamma.unwrap_or(1.0 / vocab_size.max(1) as f64)),
                coef0: F::of(coef0),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub kernel: KernelSpec,
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: KernelSpec::default(),
            c: 1.0,
            tol: 1e-3,
            max_passes: 100,
        }
    }
}

/// Hyperparameters of all four classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub k: KChoice,
    pub tree: TreeParams,
    pub svm: SvmConfig,
}

/// A trained model of any kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub enum TrainedModel<F> {
    Nb(NbModel<F>),
    Knn(KnnModel<F>),
    C45(TreeNode<F>),
    Svm(SvmModel<F>),
}

impl<F: Scalar> TrainedModel<F> {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Nb(_) => ClassifierKind::Nb,
            TrainedModel::Knn(_) => ClassifierKind::Knn,
            TrainedModel::C45(_) => ClassifierKind::C45,
            TrainedModel::Svm(_) => ClassifierKind::Svm,
        }
    }

    /// `terms` are the document's distinct vocabulary indices (used by naive
    /// Bayes); `vector` its TF-IDF vector (used by the others).
    pub fn predict(&self, vector: &SparseVector<F>, terms: &[usize]) -> usize {
        match self {
            TrainedModel::Nb(m) => predict_nb(m, terms),
            TrainedModel::Knn(m) => knn_predict(m, vector),
            TrainedModel::C45(t) => tree_predict(t, vector),
            TrainedModel::Svm(m) => svm_predict(m, vector),
        }
    }

    /// Per-category decision values: log posteriors (nb), neighbour scores
    /// (knn), leaf class histogram (c45), one-vs-rest decision values (svm).
    pub fn scores(&self, vector: &SparseVector<F>, terms: &[usize]) -> Vec<F> {
        match self {
            TrainedModel::Nb(m) => nb_scores(m, terms),
            TrainedModel::Knn(m) => knn_scores(m, vector),
            TrainedModel::C45(t) => t.leaf_for(vector).1.iter().map(|&n| F::count(n)).collect(),
            TrainedModel::Svm(m) => m.decision_values(vector),
        }
    }
}

/// Trains one classifier on a vectorized dataset.
pub fn train<F: Scalar>(kind: ClassifierKind, data: &Dataset<F>, cfg: &ClassifierConfig) -> Result<TrainedModel<F>> {
    if data.is_empty() {
        return Err(Error::Validation("cannot train on an empty dataset".into()));
    }
    Ok(match kind {
        ClassifierKind::Nb => TrainedModel::Nb(train_nb(data)?),
        ClassifierKind::Knn => {
            let k = match cfg.k {
                KChoice::Fixed(k) => k,
                KChoice::Auto { min, max, folds, seed } => tune_k(data, min..=max, folds, seed)?,
            };
            TrainedModel::Knn(train_knn(data, k)?)
        }
        ClassifierKind::C45 => TrainedModel::C45(train_c45(data, &cfg.tree)),
        ClassifierKind::Svm => {
            let kernel = cfg.svm.kernel.resolve(data.vocab.len());
            let params = SmoParams {
                c: F::of(cfg.svm.c),
                tol: F::of(cfg.svm.tol),
                max_passes: cfg.svm.max_passes,
            };
            TrainedModel::Svm(train_svm(data, kernel, &params)?)
        }
    })
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax<F: Scalar>(values: &[F]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
