use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use textcat::classifiers::{knn_predict, train_binary_svm, train_knn, Kernel, SmoParams};
use textcat::corpus::{corpus_stats, generate_synthetic_corpus, load_corpus, VocabProfile};
use textcat::eval::folds::stratified_assignments;
use textcat::eval::{f1, macro_f1, ConfusionMatrix};
use textcat::features::{build_vocabulary, tfidf_vector, Dataset, SparseVector};
use textcat::preprocess::{
    default_stopwords, default_suffix_rules, is_digit, is_punctuation, preprocess_document, stem, PipelineConfig,
};

// Stems that no default rule shortens and that are not stop words.
const STEMS: &[&str] = &["বাজার", "স্কুল", "মানুষ", "শিক্ষক", "খেলোয়াড়", "প্রযুক্তি", "হাসপাতাল", "ব্যাংক", "দল", "নদী"];
const SUFFIXES: &[&str] = &["", "গুলো", "দের", "কে", "তে", "টি", "রা", "ের"];
const NOISE: &[&str] = &["২০১৪", "১২৩", "42", "।", "॥", ",", "!", "(", ")", "এবং", "আমি", "কিন্তু", "ক", "x"];

fn token() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => (0..STEMS.len(), 0..SUFFIXES.len()).prop_map(|(s, x)| format!("{}{}", STEMS[s], SUFFIXES[x])),
        1 => (0..STEMS.len(), 0..NOISE.len()).prop_map(|(s, n)| format!("{}{}", STEMS[s], NOISE[n])),
        1 => (0..NOISE.len()).prop_map(|n| NOISE[n].to_owned()),
        1 => "[a-z]{2,6}",
    ]
}

fn document() -> impl Strategy<Value = String> {
    prop::collection::vec((token(), prop_oneof![Just(" "), Just("\n"), Just("\t"), Just("  ")]), 0..30)
        .prop_map(|parts| parts.into_iter().map(|(t, sep)| t + sep).collect())
}

#[test]
fn stem_pool_is_a_fixpoint() {
    let rules = default_suffix_rules();
    let stops = default_stopwords();
    for s in STEMS {
        assert_eq!(stem(s, &rules), *s);
        assert!(!stops.contains(s));
    }
}

proptest! {
    #[test]
    fn preprocessing_is_idempotent(text in document()) {
        let cfg = PipelineConfig::default();
        let once = preprocess_document(&text, &cfg);
        let twice = preprocess_document(&once.join(" "), &cfg);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn output_is_clean(text in document()) {
        let cfg = PipelineConfig::default();
        for t in preprocess_document(&text, &cfg) {
            prop_assert!(!t.is_empty());
            prop_assert!(!t.chars().any(|c| is_digit(c) || is_punctuation(c) || c.is_whitespace()), "{t:?}");
            prop_assert!(!cfg.stopwords.contains(&t));
        }
    }

    #[test]
    fn tfidf_is_unit_length_and_order_free(docs in prop::collection::vec(prop::collection::vec(0usize..8, 1..12), 2..20), rot in 0usize..12) {
        let docs: Vec<Vec<String>> = docs.into_iter().map(|d| d.into_iter().map(|t| format!("t{t}")).collect()).collect();
        let vocab = build_vocabulary(&docs).unwrap();
        for d in &docs {
            let v: SparseVector<f64> = tfidf_vector(d, &vocab);
            if !v.is_zero() {
                prop_assert!((v.norm() - 1.0).abs() <= 1e-9);
            }
            prop_assert!(v.entries().iter().all(|&(_, w)| w > 0.0));
            let mut rotated = d.clone();
            let shift = rot % rotated.len();
            rotated.rotate_left(shift);
            prop_assert_eq!(tfidf_vector::<f64, _>(&rotated, &vocab), v);
        }
    }

    #[test]
    fn knn_ignores_training_order(
        points in prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 3), 0usize..3), 4..25),
        query in prop::collection::vec(-1.0f64..1.0, 3),
        k in 1usize..4,
    ) {
        let vocab = Arc::new(build_vocabulary(&[vec!["x"]]).unwrap());
        let make = |pts: &[(Vec<f64>, usize)]| Dataset {
            vectors: pts.iter().map(|(p, _)| SparseVector::from_dense(p)).collect(),
            term_sets: vec![vec![]; pts.len()],
            labels: pts.iter().map(|p| p.1).collect(),
            num_categories: 3,
            vocab: Arc::clone(&vocab),
        };
        let k = k.min(points.len());
        let q = SparseVector::from_dense(&query);
        let forward = knn_predict(&train_knn(&make(&points), k).unwrap(), &q);
        let mut reversed = points.clone();
        reversed.reverse();
        let backward = knn_predict(&train_knn(&make(&reversed), k).unwrap(), &q);
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn linear_svm_is_label_symmetric_and_affine(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8..24),
        scale in 0.5f64..3.0,
    ) {
        // labels from a fixed line with a clear margin, so the optimum is unique
        let labelled: Vec<(f64, f64, bool)> =
            pts.iter().filter(|&&(x, y)| (x + 0.5 * y).abs() > 0.2).map(|&(x, y)| (x, y, x + 0.5 * y > 0.0)).collect();
        prop_assume!(labelled.iter().filter(|p| p.2).count() >= 2 && labelled.iter().filter(|p| !p.2).count() >= 2);
        let xs: Vec<SparseVector<f64>> = labelled.iter().map(|&(x, y, _)| SparseVector::from_dense(&[x, y])).collect();
        let ys: Vec<bool> = labelled.iter().map(|p| p.2).collect();
        let flipped: Vec<bool> = ys.iter().map(|&y| !y).collect();
        let params = SmoParams { c: 100.0, tol: 1e-3, max_passes: 1000 };
        let a = train_binary_svm(&xs, &ys, Kernel::Linear, &params).unwrap();
        let b = train_binary_svm(&xs, &flipped, Kernel::Linear, &params).unwrap();
        for x in &xs {
            let (fa, fb) = (a.decision(x), b.decision(x));
            // both solutions are only tol-accurate
            prop_assert!((fa + fb).abs() <= 1e-2 * fa.abs().max(1.0), "{fa} vs {fb}");
            if fa.abs() > 1e-2 {
                prop_assert!(fa.signum() != fb.signum());
            }
            let scaled = x.scale(scale);
            // the decision function is affine in x
            let w = a.linear_weights().unwrap();
            prop_assert!((a.decision(&scaled) - (w.dot(&scaled) + a.bias)).abs() <= 1e-9);
        }
    }

    #[test]
    fn folds_partition_and_balance(labels in prop::collection::vec(0usize..4, 1..80), k in 2usize..6, seed in any::<u64>()) {
        let a = stratified_assignments(&labels, 4, k, seed);
        prop_assert_eq!(&a, &stratified_assignments(&labels, 4, k, seed));
        prop_assert!(a.iter().all(|&f| f < k));
        for c in 0..4 {
            let sizes: Vec<usize> = (0..k).map(|f| (0..labels.len()).filter(|&i| labels[i] == c && a[i] == f).count()).collect();
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn f1_lies_between_precision_and_recall(p in 0.0f64..100.0, r in 0.0f64..100.0) {
        let f = f1(p, r);
        prop_assert!(f >= p.min(r) - 1e-9 && f <= p.max(r) + 1e-9);
        prop_assert_eq!(f1(r, p), f);
    }

    #[test]
    fn macro_average_is_bounded(values in prop::collection::vec(0.0f64..100.0, 1..10)) {
        let m = macro_f1(&values).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9);
    }

    #[test]
    fn confusion_merge_is_order_free(pairs in prop::collection::vec((0usize..3, 0usize..3), 0..40), cut in 0usize..40) {
        let cut = cut.min(pairs.len());
        let whole = ConfusionMatrix::from_pairs(3, pairs.iter().copied());
        let (a, b) = pairs.split_at(cut);
        let mut ab = ConfusionMatrix::from_pairs(3, a.iter().copied());
        ab.merge(&ConfusionMatrix::from_pairs(3, b.iter().copied()));
        let mut ba = ConfusionMatrix::from_pairs(3, b.iter().copied());
        ba.merge(&ConfusionMatrix::from_pairs(3, a.iter().copied()));
        prop_assert_eq!(&whole, &ab);
        prop_assert_eq!(&whole, &ba);
        prop_assert_eq!(whole.total(), pairs.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn loaded_counts_match_disk(layout in prop::collection::btree_map("[a-z]{1,6}", 1usize..6, 1..5)) {
        let dir = tempfile::tempdir().unwrap();
        for (cat, &n) in &layout {
            std::fs::create_dir(dir.path().join(cat)).unwrap();
            for i in 0..n {
                std::fs::write(dir.path().join(cat).join(format!("{i:02}.txt")), format!("doc {i} of {cat}")).unwrap();
            }
        }
        let corpus = load_corpus(dir.path()).unwrap();
        let stats = corpus_stats(&corpus);
        let on_disk: BTreeMap<String, usize> = layout.clone();
        let loaded: BTreeMap<String, usize> = stats.rows.iter().cloned().collect();
        prop_assert_eq!(loaded, on_disk);
        prop_assert_eq!(stats.total, layout.values().sum::<usize>());
        let ids: Vec<&str> = corpus.documents().iter().map(|d| d.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        prop_assert_eq!(ids, sorted);
    }

    #[test]
    fn generator_is_pure(seed in any::<u64>(), cats in 2usize..5, docs in 1usize..6) {
        let p = VocabProfile::default();
        let a = generate_synthetic_corpus(seed, cats, docs, &p).unwrap();
        let b = generate_synthetic_corpus(seed, cats, docs, &p).unwrap();
        prop_assert_eq!(a.documents(), b.documents());
        prop_assert_eq!(a.len(), cats * docs);
    }
}
