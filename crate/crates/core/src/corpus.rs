//! Labeled document collections.
//!
//! On disk a corpus is a directory with one subdirectory per category, each
//! holding UTF-8 `.txt` files:
//!
//! ```text
//! <root>/<category>/<file>.txt
//! ```
//!
//! Categories are ordered lexicographically by code point, and that order
//! defines the category indices used everywhere downstream (including every
//! tie-break rule).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub id: String,
    pub text: String,
    pub category: String,
}

/// An immutable, validated document collection.
///
/// Documents are grouped by category in category order; within a category
/// they keep the order they were supplied in (lexicographic file order when
/// loaded from disk).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    categories: Vec<String>,
    documents: Vec<LabeledDocument>,
    labels: Vec<usize>,
    counts: Vec<usize>,
}

impl Corpus {
    /// Builds a corpus from documents in any order.
    ///
    /// The category list is the sorted, de-duplicated set of document
    /// categories plus any extra declared names.
    pub fn new(documents: Vec<LabeledDocument>) -> Result<Self> {
        Self::with_categories(Vec::new(), documents)
    }

    pub fn with_categories(declared: Vec<String>, documents: Vec<LabeledDocument>) -> Result<Self> {
        let mut names: Vec<String> = declared;
        names.extend(documents.iter().map(|d| d.category.clone()));
        names.sort();
        names.dedup();
        if names.is_empty() {
            return Err(Error::Validation("corpus has no categories".into()));
        }

        let mut grouped: Vec<Vec<LabeledDocument>> = vec![Vec::new(); names.len()];
        for doc in documents {
            if doc.text.trim().is_empty() {
                return Err(Error::Validation(format!("document `{}` is empty", doc.id)));
            }
            let idx = names
                .binary_search(&doc.category)
                .expect("category collected above");
            grouped[idx].push(doc);
        }

        let counts: Vec<usize> = grouped.iter().map(Vec::len).collect();
        let labels = counts
            .iter()
            .enumerate()
            .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
            .collect();
        Ok(Corpus {
            categories: names,
            documents: grouped.into_iter().flatten().collect(),
            labels,
            counts,
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn documents(&self) -> &[LabeledDocument] {
        &self.documents
    }

    /// Category index of every document, parallel to [`Corpus::documents`].
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.binary_search_by(|c| c.as_str().cmp(name)).ok()
    }

    /// Writes the corpus in the on-disk layout under `root`.
    ///
    /// Document ids are used as paths relative to `root`.
    pub fn write_to(&self, root: &Path) -> Result<()> {
        for doc in &self.documents {
            let path = root.join(&doc.id);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, &doc.text).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Loads `<root>/<category>/<file>.txt`.
///
/// Each immediate subdirectory of `root` is a category; each `.txt` file
/// directly inside it is one document whose id is its path relative to
/// `root` (with `/` separators). A leading byte-order mark is stripped.
pub fn load_corpus(root: &Path) -> Result<Corpus> {
    if !root.is_dir() {
        return Err(Error::Input(format!(
            "corpus root {} does not exist or is not a directory",
            root.display()
        )));
    }

    let mut category_dirs = Vec::new();
    for entry in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if path.is_dir() {
            let name = entry.file_name().into_string().map_err(|_| Error::Decode { path: path.clone() })?;
            category_dirs.push((name, path));
        }
    }
    category_dirs.sort();
    if category_dirs.is_empty() {
        return Err(Error::Validation(format!(
            "corpus root {} has no category directories",
            root.display()
        )));
    }

    let mut files = Vec::new();
    for (category, dir) in &category_dirs {
        let mut names = Vec::new();
        for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let path = entry.path();
            let is_txt = path.extension().is_some_and(|ext| ext == "txt");
            if is_txt && path.is_file() {
                let name = entry.file_name().into_string().map_err(|_| Error::Decode { path: path.clone() })?;
                names.push(name);
            }
        }
        if names.is_empty() {
            return Err(Error::Validation(format!(
                "category `{category}` contains no .txt documents"
            )));
        }
        names.sort();
        files.extend(names.into_iter().map(|n| (category.clone(), n)));
    }

    let documents = files
        .into_par_iter()
        .map(|(category, name)| {
            let path = root.join(&category).join(&name);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let mut text = String::from_utf8(bytes).map_err(|_| Error::Decode { path: path.clone() })?;
            if text.starts_with('\u{feff}') {
                text.drain(..'\u{feff}'.len_utf8());
            }
            if text.trim().is_empty() {
                return Err(Error::Validation(format!("document {} is empty", path.display())));
            }
            Ok(LabeledDocument {
                id: format!("{category}/{name}"),
                text,
                category,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let declared = category_dirs.into_iter().map(|(name, _)| name).collect();
    Corpus::with_categories(declared, documents)
}

/// Per-category document counts with a total row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub rows: Vec<(String, usize)>,
    pub total: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let rows: Vec<(String, usize)> = corpus
        .categories()
        .iter()
        .cloned()
        .zip(corpus.counts().iter().copied())
        .collect();
    let total = rows.iter().map(|(_, n)| n).sum();
    CorpusStats { rows, total }
}

impl fmt::Display for CorpusStats {
    /// Tab-separated: a header, one row per category, then `total`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "category\tdocuments")?;
        for (name, n) in &self.rows {
            writeln!(f, "{name}\t{n}")?;
        }
        writeln!(f, "total\t{}", self.total)
    }
}

/// Shape of the synthetic vocabulary.
///
/// Every category owns a disjoint pool of signature terms. A document draws
/// each word from its own category's pool with probability
/// `signature_fraction * (1 - overlap)`, from another category's pool with
/// probability `signature_fraction * overlap`, and from the shared
/// background pool otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabProfile {
    pub signature_terms: usize,
    pub background_terms: usize,
    pub signature_fraction: f64,
    pub overlap: f64,
    pub min_words: usize,
    pub max_words: usize,
}

impl Default for VocabProfile {
    fn default() -> Self {
        VocabProfile {
            signature_terms: 6,
            background_terms: 400,
            signature_fraction: 0.25,
            overlap: 0.1,
            min_words: 40,
            max_words: 90,
        }
    }
}

impl VocabProfile {
    /// Signature pools never leak across categories.
    pub fn zero_overlap() -> Self {
        VocabProfile {
            overlap: 0.0,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let fraction_ok = |v: f64| (0.0..=1.0).contains(&v);
        if self.signature_terms == 0 {
            return Err(Error::Input("signature_terms must be at least 1".into()));
        }
        if self.background_terms == 0 && self.signature_fraction < 1.0 {
            return Err(Error::Input(
                "background_terms must be at least 1 unless signature_fraction is 1".into(),
            ));
        }
        if !fraction_ok(self.signature_fraction) || !fraction_ok(self.overlap) {
            return Err(Error::Input("signature_fraction and overlap must lie in [0, 1]".into()));
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return Err(Error::Input("need 1 <= min_words <= max_words".into()));
        }
        Ok(())
    }
}

/// Category directory name for synthetic category `index`.
pub fn synthetic_category_name(index: usize) -> String {
    format!("category{index:03}")
}

/// Signature term `term` of synthetic category `category`.
///
/// Terms are pure ASCII letters so that they pass through digit,
/// punctuation and Bengali suffix processing untouched.
pub fn signature_term(category: usize, term: usize) -> String {
    format!("s{}{}", letters(category, 3), letters(term, 3))
}

pub fn background_term(term: usize) -> String {
    format!("b{}", letters(term, 4))
}

fn letters(mut n: usize, width: usize) -> String {
    let mut out = vec![b'a'; width];
    for slot in out.iter_mut().rev() {
        *slot = b'a' + (n % 26) as u8;
        n /= 26;
    }
    debug_assert_eq!(n, 0, "index too large for {width} letters");
    String::from_utf8(out).expect("ascii")
}

/// Deterministic, learnably separable corpus for tests and benchmarks.
pub fn generate_synthetic_corpus(
    seed: u64,
    categories: usize,
    docs_per_category: usize,
    profile: &VocabProfile,
) -> Result<Corpus> {
    if categories < 2 {
        return Err(Error::Input("synthetic corpus needs at least 2 categories".into()));
    }
    if docs_per_category == 0 {
        return Err(Error::Input("synthetic corpus needs at least 1 document per category".into()));
    }
    profile.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signature: Vec<Vec<String>> = (0..categories)
        .map(|c| (0..profile.signature_terms).map(|t| signature_term(c, t)).collect())
        .collect();
    let background: Vec<String> = (0..profile.background_terms).map(background_term).collect();

    let mut documents = Vec::with_capacity(categories * docs_per_category);
    for (c, own_pool) in signature.iter().enumerate() {
        let name = synthetic_category_name(c);
        for d in 0..docs_per_category {
            let words = rng.random_range(profile.min_words..=profile.max_words);
            let mut text = String::new();
            for w in 0..words {
                let word = if rng.random_bool(profile.signature_fraction) {
                    if profile.overlap > 0.0 && rng.random_bool(profile.overlap) {
                        let other = (c + rng.random_range(1..categories)) % categories;
                        signature[other].choose(&mut rng)
                    } else {
                        own_pool.choose(&mut rng)
                    }
                } else {
                    background.choose(&mut rng)
                };
                if w > 0 {
                    text.push(if w % 12 == 0 { '\n' } else { ' ' });
                }
                text.push_str(word.expect("pools are nonempty"));
            }
            text.push('\n');
            documents.push(LabeledDocument {
                id: format!("{name}/doc{d:05}.txt"),
                text,
                category: name.clone(),
            });
        }
    }
    Corpus::new(documents)
}

/// Documents per category name.
pub fn count_by_category(corpus: &Corpus) -> BTreeMap<&str, usize> {
    corpus
        .categories()
        .iter()
        .map(String::as_str)
        .zip(corpus.counts().iter().copied())
        .collect()
}
