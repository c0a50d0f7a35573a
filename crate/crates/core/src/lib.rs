//! Supervised categorization of Bangla text documents.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`preprocess`]: tokenization, digit and punctuation removal, stop-word
//!    removal and suffix-stripping stemming.
//! 2. [`features`]: vocabulary construction and length-normalized TF-IDF
//!    sparse vectors.
//! 3. [`classifiers`]: naive Bayes, k-nearest neighbours, a C4.5 decision
//!    tree and a one-vs-rest SMO support vector machine behind one
//!    [`classifiers::TrainedModel`] contract.
//! 4. [`eval`]: stratified k-fold cross-validation, precision / recall / F1
//!    with macro averaging, learning curves and training-time benchmarks.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the command-line
//! tool uses.

pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod preprocess;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SparseVectorF64 = features::SparseVector<f64>;
pub type SparseVectorF32 = features::SparseVector<f32>;
pub type DatasetF64 = features::Dataset<f64>;
pub type DatasetF32 = features::Dataset<f32>;
pub type TrainedModelF64 = classifiers::TrainedModel<f64>;
pub type TrainedModelF32 = classifiers::TrainedModel<f32>;
pub type ModelFileF64 = model::ModelFile<f64>;
pub type ModelFileF32 = model::ModelFile<f32>;
