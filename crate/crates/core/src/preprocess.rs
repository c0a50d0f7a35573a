//! Raw text to stemmed terms.
//!
//! The pipeline is tokenize → remove digits → remove punctuation → remove
//! stop words (and single-letter words) → stem. Every stage after
//! tokenization can be switched off through [`StepFlags`].
//!
//! Lengths are measured in extended grapheme clusters, not code points:
//! a Bengali consonant with a vowel sign is one letter to a reader.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

const BENGALI_DANDA: char = '\u{0964}';
const BENGALI_DOUBLE_DANDA: char = '\u{0965}';

/// Stop words shipped by default. Users with a fuller list load it with
/// [`StopwordList::from_file`].
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "এবং", "জন্য", "আমি", "অনেকে", "ইহা", "দিয়েছে", "তারপর", "নিজে", "নাই", "ব্যাপারে",
    "অথবা", "অনেক", "আমরা", "আমার", "আপনি", "আর", "আরও", "উনি", "উপর", "এই", "এক", "একটি",
    "এখন", "এখানে", "এটা", "এটি", "এমন", "এর", "এরা", "কিন্তু", "কি", "কী", "কে", "কোন",
    "কোনো", "কিছু", "করে", "করা", "করেন", "করতে", "কারণ", "গিয়ে", "চেয়ে", "তবে", "তা",
    "তাই", "তার", "তারা", "তিনি", "তুমি", "তখন", "থেকে", "দিয়ে", "দিকে", "না", "নিয়ে",
    "পর", "পরে", "পর্যন্ত", "প্রতি", "বা", "বলে", "বলেন", "মধ্যে", "যা", "যে", "যদি",
    "যখন", "যেমন", "শুধু", "সঙ্গে", "সব", "সহ", "সাথে", "হয়", "হয়েছে", "হবে", "হয়ে",
    "হলে", "হচ্ছে", "ছিল", "ছিলেন",
];

/// Default noun-suffix table as `(suffix, min_stem_length)`.
pub const DEFAULT_SUFFIXES: &[(&str, usize)] = &[
    ("গুলোতে", 2),
    ("গুলোর", 2),
    ("দেরকে", 2),
    ("গুলো", 2),
    ("গুলি", 2),
    ("দের", 2),
    ("কে", 2),
    ("তে", 2),
    ("টি", 2),
    ("টা", 2),
    ("রা", 2),
    ("ের", 2),
    ("ে", 2),
];

pub fn grapheme_len(s: &str) -> usize {
    s.graphemes(true).count()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl StopwordList {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for w in words {
            let w = w.into();
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Validation(format!("invalid stop word {w:?}")));
            }
            set.insert(w);
        }
        Ok(StopwordList { words: set })
    }

    /// One term per line; `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(|line| line.split('#').next().unwrap_or("").trim())
                .filter(|w| !w.is_empty()),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read_utf8(path)?)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.words.contains(term)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

pub fn default_stopwords() -> StopwordList {
    StopwordList::new(DEFAULT_STOPWORDS.iter().copied()).expect("default list is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixRule {
    pub suffix: String,
    pub min_stem_length: usize,
}

impl SuffixRule {
    pub fn new(suffix: impl Into<String>, min_stem_length: usize) -> Result<Self> {
        let suffix = suffix.into();
        if suffix.is_empty() {
            return Err(Error::Validation("suffix must be non-empty".into()));
        }
        if min_stem_length < 2 {
            return Err(Error::Validation(format!(
                "suffix {suffix:?}: min_stem_length must be at least 2, got {min_stem_length}"
            )));
        }
        Ok(SuffixRule {
            suffix,
            min_stem_length,
        })
    }
}

/// Parses `suffix<TAB>min_stem_length` lines (`#` comments allowed) and
/// orders the result longest-suffix-first.
pub fn parse_suffix_rules(text: &str) -> Result<Vec<SuffixRule>> {
    let mut rules = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let (suffix, len) = line.split_once('\t').ok_or_else(|| {
            Error::Validation(format!("suffix rule line {}: expected `suffix<TAB>min_stem_length`", lineno + 1))
        })?;
        let len = len.trim().parse::<usize>().map_err(|_| {
            Error::Validation(format!("suffix rule line {}: bad min_stem_length {len:?}", lineno + 1))
        })?;
        rules.push(SuffixRule::new(suffix.trim(), len)?);
    }
    Ok(order_rules(rules))
}

pub fn load_suffix_rules(path: &Path) -> Result<Vec<SuffixRule>> {
    parse_suffix_rules(&read_utf8(path)?)
}

pub fn default_suffix_rules() -> Vec<SuffixRule> {
    order_rules(
        DEFAULT_SUFFIXES
            .iter()
            .map(|&(s, n)| SuffixRule::new(s, n).expect("default rules are valid"))
            .collect(),
    )
}

/// Stable sort, longest suffix (in code points) first.
fn order_rules(mut rules: Vec<SuffixRule>) -> Vec<SuffixRule> {
    rules.sort_by_key(|r| std::cmp::Reverse(r.suffix.chars().count()));
    rules
}

fn read_utf8(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Decode { path: path.into() })?;
    Ok(text.trim_start_matches('\u{feff}').to_owned())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFlags {
    pub digits: bool,
    pub punctuation: bool,
    pub stopwords: bool,
    pub stemming: bool,
}

impl Default for StepFlags {
    fn default() -> Self {
        StepFlags {
            digits: true,
            punctuation: true,
            stopwords: true,
            stemming: true,
        }
    }
}

impl StepFlags {
    pub fn tokenize_only() -> Self {
        StepFlags {
            digits: false,
            punctuation: false,
            stopwords: false,
            stemming: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub stopwords: StopwordList,
    suffix_rules: Vec<SuffixRule>,
    pub remove_single_letter: bool,
    pub steps: StepFlags,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stopwords: default_stopwords(),
            suffix_rules: default_suffix_rules(),
            remove_single_letter: true,
            steps: StepFlags::default(),
        }
    }
}

impl PipelineConfig {
    /// Rules are re-ordered longest-suffix-first.
    pub fn new(stopwords: StopwordList, suffix_rules: Vec<SuffixRule>, remove_single_letter: bool, steps: StepFlags) -> Self {
        PipelineConfig {
            stopwords,
            suffix_rules: order_rules(suffix_rules),
            remove_single_letter,
            steps,
        }
    }

    pub fn suffix_rules(&self) -> &[SuffixRule] {
        &self.suffix_rules
    }

    pub fn set_suffix_rules(&mut self, rules: Vec<SuffixRule>) {
        self.suffix_rules = order_rules(rules);
    }
}

/// Splits on Unicode whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

pub fn is_digit(c: char) -> bool {
    c.is_ascii_digit() || ('\u{09E6}'..='\u{09EF}').contains(&c)
}

/// Unicode punctuation (P*) and symbols (S*), plus the Bengali dandas.
pub fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    c == BENGALI_DANDA
        || c == BENGALI_DOUBLE_DANDA
        || matches!(
            get_general_category(c),
            ConnectorPunctuation
                | DashPunctuation
                | OpenPunctuation
                | ClosePunctuation
                | InitialPunctuation
                | FinalPunctuation
                | OtherPunctuation
                | MathSymbol
                | CurrencySymbol
                | ModifierSymbol
                | OtherSymbol
        )
}

fn strip_chars(tokens: Vec<String>, drop: impl Fn(char) -> bool) -> Vec<String> {
    tokens
        .into_iter()
        .filter_map(|t| {
            let kept: String = if t.chars().any(&drop) {
                t.chars().filter(|&c| !drop(c)).collect()
            } else {
                t
            };
            (!kept.is_empty()).then_some(kept)
        })
        .collect()
}

pub fn remove_digits(tokens: Vec<String>) -> Vec<String> {
    strip_chars(tokens, is_digit)
}

pub fn remove_punctuation(tokens: Vec<String>) -> Vec<String> {
    strip_chars(tokens, is_punctuation)
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &StopwordList, remove_single_letter: bool) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !stopwords.contains(t) && !(remove_single_letter && grapheme_len(t) == 1))
        .collect()
}

/// Strips the first matching suffix that leaves at least `min_stem_length`
/// grapheme clusters. At most one rule fires.
pub fn stem(token: &str, rules: &[SuffixRule]) -> String {
    for rule in rules {
        if let Some(base) = token.strip_suffix(rule.suffix.as_str()) {
            if grapheme_len(base) >= rule.min_stem_length {
                return base.to_owned();
            }
        }
    }
    token.to_owned()
}

pub fn preprocess_document(text: &str, cfg: &PipelineConfig) -> Vec<String> {
    let mut tokens = tokenize(text);
    if cfg.steps.digits {
        tokens = remove_digits(tokens);
    }
    if cfg.steps.punctuation {
        tokens = remove_punctuation(tokens);
    }
    if cfg.steps.stopwords {
        tokens = remove_stopwords(tokens, &cfg.stopwords, cfg.remove_single_letter);
    }
    if cfg.steps.stemming {
        tokens = tokens.iter().map(|t| stem(t, &cfg.suffix_rules)).collect();
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("আমি ভাত খাই"), v(&["আমি", "ভাত", "খাই"]));
        assert_eq!(tokenize("a\tb\nc"), v(&["a", "b", "c"]));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("  a \u{3000} b\r\n"), v(&["a", "b"]));
    }

    #[test]
    fn digits() {
        assert!(remove_digits(v(&["২০১৪"])).is_empty());
        assert_eq!(remove_digits(v(&["কক্ষ১"])), v(&["কক্ষ"]));
        assert_eq!(remove_digits(v(&["ভাত"])), v(&["ভাত"]));
        assert_eq!(remove_digits(v(&["a1b2", "2014"])), v(&["ab"]));
    }

    #[test]
    fn punctuation() {
        assert_eq!(remove_punctuation(v(&["{স্বাস্থ্য}"])), v(&["স্বাস্থ্য"]));
        assert!(remove_punctuation(v(&["***"])).is_empty());
        assert_eq!(remove_punctuation(v(&["খেলা।"])), v(&["খেলা"]));
        let symbols = "<>:{}[]^&*()|";
        assert!(symbols.chars().all(is_punctuation));
        // vowel signs and virama are marks, not punctuation
        assert!(!"স্বাস্থ্য".chars().any(is_punctuation));
    }

    #[test]
    fn stopwords_and_single_letters() {
        let sw = default_stopwords();
        assert_eq!(remove_stopwords(v(&["এবং", "খেলা"]), &sw, true), v(&["খেলা"]));
        assert_eq!(remove_stopwords(v(&["ও", "খেলা"]), &sw, true), v(&["খেলা"]));
        assert_eq!(remove_stopwords(v(&["খেলা"]), &sw, true), v(&["খেলা"]));
        assert_eq!(remove_stopwords(v(&["ও", "x"]), &StopwordList::default(), false), v(&["ও", "x"]));
        // one grapheme cluster even though it is two code points
        assert_eq!(grapheme_len("কি"), 1);
    }

    #[test]
    fn shipped_list_has_the_documented_examples() {
        let sw = default_stopwords();
        for w in ["এবং", "জন্য", "আমি", "অনেকে", "ইহা", "দিয়েছে", "তারপর", "নিজে", "নাই", "ব্যাপারে"] {
            assert!(sw.contains(w), "{w}");
        }
    }

    #[test]
    fn stemming_examples() {
        let rules = default_suffix_rules();
        assert_eq!(stem("বাংলাদেশে", &rules), "বাংলাদেশ");
        assert_eq!(stem("আসনের", &rules), "আসন");
        assert_eq!(stem("দের", &rules), "দের");
        assert_eq!(stem("কে", &rules), "কে");
        assert_eq!(stem("ভাত", &rules), "ভাত");
    }

    #[test]
    fn stem_applies_only_one_rule() {
        let rules = default_suffix_rules();
        // ends in কে and, once stripped, in ে again
        assert_eq!(stem("বাড়িতেকে", &rules), "বাড়িতে");
    }

    #[test]
    fn a_second_pass_can_change_the_output() {
        let cfg = PipelineConfig::default();
        let once = preprocess_document("বাড়িতেকে", &cfg);
        assert_eq!(once, v(&["বাড়িতে"]));
        assert_eq!(preprocess_document(&once.join(" "), &cfg), v(&["বাড়ি"]));
    }

    #[test]
    fn rules_are_ordered_longest_first() {
        let rules = default_suffix_rules();
        let lens: Vec<usize> = rules.iter().map(|r| r.suffix.chars().count()).collect();
        assert!(lens.windows(2).all(|w| w[0] >= w[1]));
        let parsed = parse_suffix_rules("ে\t2\n# comment\nদের\t3\n\n").unwrap();
        assert_eq!(parsed[0].suffix, "দের");
        assert_eq!(parsed[0].min_stem_length, 3);
    }

    #[test]
    fn bad_rule_files() {
        assert!(parse_suffix_rules("ে 2").is_err());
        assert!(parse_suffix_rules("ে\t1").is_err());
        assert!(parse_suffix_rules("\t2").is_err());
        assert!(SuffixRule::new("", 2).is_err());
    }

    #[test]
    fn stopword_file_format() {
        let sw = StopwordList::parse("# header\nএবং\n  জন্য  # trailing\n\n").unwrap();
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("জন্য"));
        assert!(StopwordList::new(["a b"]).is_err());
    }

    #[test]
    fn full_pipeline_trace() {
        let cfg = PipelineConfig::default();
        // tokenize: [আসনের, ২০১৪, এবং।]; digits: [আসনের, এবং।];
        // punctuation: [আসনের, এবং]; stop words: [আসনের]; stem: [আসন]
        assert_eq!(preprocess_document("আসনের ২০১৪ এবং।", &cfg), v(&["আসন"]));
        assert!(preprocess_document("", &cfg).is_empty());
    }

    #[test]
    fn tokenize_only_is_identity_composition() {
        let cfg = PipelineConfig {
            steps: StepFlags::tokenize_only(),
            ..PipelineConfig::default()
        };
        let text = "আসনের ২০১৪ এবং। ও {x}";
        assert_eq!(preprocess_document(text, &cfg), tokenize(text));
    }
}
