//! Self-contained model files: everything needed to classify raw text.
//!
//! A model file is JSON holding the classifier tag, the category names, the
//! fitted vocabulary, the preprocessing configuration and the trained
//! parameters. Floats are written in shortest round-trip form, so a
//! save / load cycle reproduces every parameter bit for bit.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierConfig, ClassifierKind, TrainedModel};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{preprocess_corpus, tfidf_vector, Dataset, Vocabulary};
use crate::preprocess::{preprocess_document, PipelineConfig};
use crate::scalar::Scalar;

const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ModelFile<F> {
    pub format_version: u32,
    pub classifier: ClassifierKind,
    pub scalar: String,
    pub categories: Vec<String>,
    pub pipeline: PipelineConfig,
    pub config: ClassifierConfig,
    pub vocabulary: Arc<Vocabulary>,
    pub model: TrainedModel<F>,
}

/// A prediction for one document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction<F> {
    pub category: usize,
    pub name: String,
    pub scores: Vec<F>,
}

fn scalar_name<F>() -> String {
    std::any::type_name::<F>().to_owned()
}

impl<F: Scalar> ModelFile<F> {
    /// Preprocesses and vectorizes the whole corpus, then trains `kind`.
    pub fn train(corpus: &Corpus, pipeline: &PipelineConfig, config: &ClassifierConfig, kind: ClassifierKind) -> Result<Self> {
        let terms = preprocess_corpus(corpus, pipeline);
        if terms.iter().all(Vec::is_empty) {
            return Err(Error::Validation("every document is empty after preprocessing".into()));
        }
        let docs: Vec<&[String]> = terms.iter().map(Vec::as_slice).collect();
        let data = Dataset::<F>::fit(&docs, corpus.labels().to_vec(), corpus.categories().len())?;
        let model = train(kind, &data, config)?;
        Ok(ModelFile {
            format_version: FORMAT_VERSION,
            classifier: kind,
            scalar: scalar_name::<F>(),
            categories: corpus.categories().to_vec(),
            pipeline: pipeline.clone(),
            config: *config,
            vocabulary: data.vocab,
            model,
        })
    }

    pub fn predict_text(&self, text: &str) -> Prediction<F> {
        let terms = preprocess_document(text, &self.pipeline);
        let vector = tfidf_vector::<F, _>(&terms, &self.vocabulary);
        let set = self.vocabulary.term_set(&terms);
        let category = self.model.predict(&vector, &set);
        Prediction {
            category,
            name: self.categories[category].clone(),
            scores: self.model.scores(&vector, &set),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile<F> = serde_json::from_str(text).map_err(|e| Error::Format(format!("invalid model file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let text = String::from_utf8(bytes).map_err(|_| Error::Decode { path: path.into() })?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported model format version {}", self.format_version)));
        }
        if self.scalar != scalar_name::<F>() {
            return Err(Error::Format(format!(
                "model was saved with {} parameters, expected {}",
                self.scalar,
                scalar_name::<F>()
            )));
        }
        if self.model.kind() != self.classifier {
            return Err(Error::Format(format!(
                "classifier tag `{}` does not match the stored `{}` parameters",
                self.classifier,
                self.model.kind()
            )));
        }
        if self.categories.is_empty() {
            return Err(Error::Format("model has no categories".into()));
        }
        let m = self.categories.len();
        let v = self.vocabulary.len();
        let ok = match &self.model {
            TrainedModel::Nb(nb) => {
                nb.log_priors.len() == m
                    && nb.df_counts.len() == m
                    && nb.df_counts.iter().all(|c| c.keys().all(|&i| i < v))
            }
            TrainedModel::Knn(knn) => {
                knn.num_categories == m
                    && knn.train_labels.len() == knn.train_vectors.len()
                    && knn.k >= 1
                    && knn.k <= knn.train_labels.len()
                    && knn.train_labels.iter().all(|&l| l < m)
            }
            TrainedModel::C45(tree) => tree_fits(tree, m),
            TrainedModel::Svm(svm) => svm.binaries.len() == m,
        };
        if !ok {
            return Err(Error::Format("model parameters do not match its categories or vocabulary".into()));
        }
        Ok(())
    }
}

fn tree_fits<F: Scalar>(node: &crate::classifiers::TreeNode<F>, m: usize) -> bool {
    use crate::classifiers::TreeNode;
    match node {
        TreeNode::Leaf { category, histogram } => *category < m && histogram.len() == m,
        TreeNode::Split { left, right, .. } => tree_fits(left, m) && tree_fits(right, m),
    }
}
