//! Vocabulary and length-normalized TF-IDF vectors.
//!
//! For a document with term counts `tf_i`, the raw weight of term `i` is
//! `tf_i * ln(N / n_i)` where `N` is the number of documents the vocabulary
//! was fit on and `n_i` the number of those documents containing term `i`.
//! The vector is then scaled to unit L2 norm. A term present in every
//! document gets weight zero and is left out of the sparse representation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::preprocess::{preprocess_document, PipelineConfig};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    term_to_index: HashMap<String, usize>,
    doc_freq: Vec<usize>,
    num_docs: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    num_docs: usize,
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            num_docs: v.num_docs,
            terms: v.terms,
            doc_freq: v.doc_freq,
        }
    }
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        Vocabulary::from_parts(r.terms, r.doc_freq, r.num_docs)
    }
}

impl Vocabulary {
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>, num_docs: usize) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::Validation("terms and doc_freq differ in length".into()));
        }
        if num_docs == 0 {
            return Err(Error::Validation("vocabulary needs num_docs >= 1".into()));
        }
        if let Some(i) = doc_freq.iter().position(|&n| n == 0 || n > num_docs) {
            return Err(Error::Validation(format!(
                "term `{}` has document frequency {} outside [1, {num_docs}]",
                terms[i], doc_freq[i]
            )));
        }
        let term_to_index: HashMap<String, usize> =
            terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if term_to_index.len() != terms.len() {
            return Err(Error::Validation("duplicate vocabulary term".into()));
        }
        Ok(Vocabulary {
            terms,
            term_to_index,
            doc_freq,
            num_docs,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.term_to_index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_freq(&self, index: usize) -> usize {
        self.doc_freq[index]
    }

    /// `ln(N / n_i)`.
    pub fn idf<F: Scalar>(&self, index: usize) -> F {
        (F::count(self.num_docs) / F::count(self.doc_freq[index])).ln()
    }

    /// Sorted distinct vocabulary indices of the in-vocabulary terms.
    pub fn term_set<S: AsRef<str>>(&self, terms: &[S]) -> Vec<usize> {
        let set: BTreeSet<usize> = terms.iter().filter_map(|t| self.index_of(t.as_ref())).collect();
        set.into_iter().collect()
    }
}

/// Indices are assigned in lexicographic term order, so the result does not
/// depend on document order.
pub fn build_vocabulary<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<Vocabulary> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let distinct: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(Error::Validation("cannot build a vocabulary from documents without terms".into()));
    }
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = df.into_iter().map(|(t, n)| (t.to_owned(), n)).unzip();
    Vocabulary::from_parts(terms, doc_freq, docs.len())
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, F)>", into = "Vec<(usize, F)>")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct SparseVector<F> {
    entries: Vec<(usize, F)>,
}

impl<F: Scalar> TryFrom<Vec<(usize, F)>> for SparseVector<F> {
    type Error = Error;

    fn try_from(entries: Vec<(usize, F)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Validation("sparse vector indices must be strictly increasing".into()));
        }
        if entries.iter().any(|&(_, w)| !w.is_finite() || w.is_zero()) {
            return Err(Error::Validation("sparse vector weights must be finite and nonzero".into()));
        }
        Ok(SparseVector { entries })
    }
}

impl<F: Scalar> From<SparseVector<F>> for Vec<(usize, F)> {
    fn from(v: SparseVector<F>) -> Self {
        v.entries
    }
}

impl<F: Scalar> SparseVector<F> {
    pub fn zero() -> Self {
        SparseVector { entries: Vec::new() }
    }

    /// Sorts by index, sums duplicates and drops zeros.
    ///
    /// Panics on non-finite weights.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, F)>) -> Self {
        let mut acc: BTreeMap<usize, F> = BTreeMap::new();
        for (i, w) in pairs {
            assert!(w.is_finite(), "non-finite weight at index {i}");
            let slot = acc.entry(i).or_insert_with(F::zero);
            *slot = *slot + w;
        }
        SparseVector {
            entries: acc.into_iter().filter(|(_, w)| !w.is_zero()).collect(),
        }
    }

    /// Builds from a dense slice, skipping zeros.
    pub fn from_dense(values: &[F]) -> Self {
        Self::from_pairs(values.iter().copied().enumerate())
    }

    /// Dense copy up to the last stored index.
    pub fn to_dense(&self) -> Vec<F> {
        let mut out = vec![F::zero(); self.entries.last().map_or(0, |&(i, _)| i + 1)];
        for &(i, w) in &self.entries {
            out[i] = w;
        }
        out
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Value at `index`; absent entries read as zero.
    pub fn get(&self, index: usize) -> F {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => F::zero(),
        }
    }

    pub fn dot(&self, other: &Self) -> F {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = F::zero();
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum = sum + x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn norm(&self) -> F {
        self.entries.iter().map(|&(_, w)| w * w).sum::<F>().sqrt()
    }

    /// Squared Euclidean distance over the union of indices.
    pub fn squared_distance(&self, other: &Self) -> F {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0, 0);
        let mut sum = F::zero();
        while i < a.len() || j < b.len() {
            let d = if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                i += 1;
                a[i - 1].1
            } else if i == a.len() || b[j].0 < a[i].0 {
                j += 1;
                b[j - 1].1
            } else {
                i += 1;
                j += 1;
                a[i - 1].1 - b[j - 1].1
            };
            sum = sum + d * d;
        }
        sum
    }

    pub fn scale(&self, s: F) -> Self {
        Self::from_pairs(self.entries.iter().map(|&(i, w)| (i, w * s)))
    }

    pub fn cast<G: Scalar>(&self) -> SparseVector<G> {
        SparseVector::from_pairs(self.entries.iter().map(|&(i, w)| (i, G::of(w.as_f64()))))
    }
}

/// TF-IDF vector of one document against a fitted vocabulary.
///
/// Out-of-vocabulary terms are ignored. Returns the zero vector when every
/// raw weight vanishes.
pub fn tfidf_vector<F: Scalar, S: AsRef<str>>(terms: &[S], vocab: &Vocabulary) -> SparseVector<F> {
    let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
    for t in terms {
        if let Some(i) = vocab.index_of(t.as_ref()) {
            *tf.entry(i).or_default() += 1;
        }
    }
    let raw: Vec<(usize, F)> = tf
        .into_iter()
        .map(|(i, n)| (i, F::count(n) * vocab.idf::<F>(i)))
        .filter(|(_, w)| !w.is_zero())
        .collect();
    let norm = raw.iter().map(|&(_, w)| w * w).sum::<F>().sqrt();
    if norm.is_zero() {
        return SparseVector::zero();
    }
    SparseVector {
        entries: raw.into_iter().map(|(i, w)| (i, w / norm)).filter(|(_, w)| !w.is_zero()).collect(),
    }
}

/// Vectorized documents with their labels.
///
/// `term_sets` holds the distinct in-vocabulary term indices of each
/// document; naive Bayes consumes these, the other classifiers consume
/// `vectors`.
#[derive(Debug, Clone)]
pub struct Dataset<F> {
    pub vectors: Vec<SparseVector<F>>,
    pub term_sets: Vec<Vec<usize>>,
    pub labels: Vec<usize>,
    pub num_categories: usize,
    pub vocab: Arc<Vocabulary>,
}

impl<F: Scalar> Dataset<F> {
    /// Projects preprocessed documents onto `vocab`.
    pub fn project<S: AsRef<str> + Sync>(
        vocab: Arc<Vocabulary>,
        docs: &[&[S]],
        labels: Vec<usize>,
        num_categories: usize,
    ) -> Result<Self> {
        if docs.len() != labels.len() {
            return Err(Error::Validation("documents and labels differ in length".into()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= num_categories) {
            return Err(Error::Validation(format!("label {l} out of range for {num_categories} categories")));
        }
        let (vectors, term_sets) = docs
            .par_iter()
            .map(|d| (tfidf_vector(d, &vocab), vocab.term_set(d)))
            .unzip();
        Ok(Dataset {
            vectors,
            term_sets,
            labels,
            num_categories,
            vocab,
        })
    }

    /// Fits a vocabulary on `docs` and projects them onto it.
    pub fn fit<S: AsRef<str> + Sync>(docs: &[&[S]], labels: Vec<usize>, num_categories: usize) -> Result<Self> {
        let owned: Vec<Vec<&str>> = docs.iter().map(|d| d.iter().map(AsRef::as_ref).collect()).collect();
        let vocab = Arc::new(build_vocabulary(&owned)?);
        Self::project(vocab, docs, labels, num_categories)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Rows `rows` of this dataset, sharing the vocabulary.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Dataset {
            vectors: rows.iter().map(|&r| self.vectors[r].clone()).collect(),
            term_sets: rows.iter().map(|&r| self.term_sets[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            num_categories: self.num_categories,
            vocab: Arc::clone(&self.vocab),
        }
    }

    /// Writes `label index:weight ...`, one line per document.
    pub fn write_sparse<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (v, l) in self.vectors.iter().zip(&self.labels) {
            write!(out, "{l}")?;
            for &(i, w) in v.entries() {
                write!(out, " {i}:{w}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Preprocesses every document of the corpus, in corpus order.
pub fn preprocess_corpus(corpus: &Corpus, cfg: &PipelineConfig) -> Vec<Vec<String>> {
    corpus
        .documents()
        .par_iter()
        .map(|d| preprocess_document(&d.text, cfg))
        .collect()
}

/// Preprocesses the whole corpus and fits the vocabulary on all of it.
pub fn vectorize_corpus<F: Scalar>(corpus: &Corpus, cfg: &PipelineConfig) -> Result<Dataset<F>> {
    let terms = preprocess_corpus(corpus, cfg);
    if terms.iter().all(Vec::is_empty) {
        return Err(Error::Validation("every document is empty after preprocessing".into()));
    }
    let docs: Vec<&[String]> = terms.iter().map(Vec::as_slice).collect();
    Dataset::fit(&docs, corpus.labels().to_vec(), corpus.categories().len())
}
