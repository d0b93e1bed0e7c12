//! Tokenization, noun-bag extraction and word frequencies.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::ops::Add;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::embedding::EmbeddingModel;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Lowercase + NFC. The canonical key form shared by the tokenizer, the
/// embedding lookup and the sentiment lexicon.
pub fn normalize(word: &str) -> String {
    word.to_lowercase().nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
}

/// Splits on Unicode whitespace and normalizes each piece.
///
/// URLs and `@`-mentions are dropped, a leading `#` is removed from
/// hashtags, and surrounding punctuation is trimmed. Pieces with nothing
/// alphanumeric left are dropped.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace().filter_map(token_from).collect()
}

fn token_from(surface: &str) -> Option<Token> {
    let head = surface.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '@' && c != '#');
    if head.starts_with('@') {
        return None;
    }
    let lower = head.to_lowercase();
    if lower.contains("://") || lower.trim_start_matches('#').starts_with("www.") {
        return None;
    }
    let normalized: String = lower.nfc().collect();
    let normalized = normalized.trim_matches(|c: char| !c.is_alphanumeric());
    if normalized.is_empty() {
        return None;
    }
    Some(Token {
        surface: surface.to_owned(),
        normalized: normalized.to_owned(),
    })
}

/// Set of normalized words excluded from noun bags.
#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// The shipped English list.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    /// One token per line; blank lines and `#` comments are ignored.
    pub fn parse(contents: &str) -> Self {
        Self(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(normalize)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(|s| normalize(s.as_ref())).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NounStrategy {
    /// Stopword removal plus embedding-vocabulary membership.
    #[default]
    Stoplist,
    /// `Stoplist`, additionally dropping inflected verb/adverb forms.
    Suffix,
}

/// How noun candidates are filtered out of a token stream.
#[derive(Debug, Clone)]
pub struct NounFilter {
    pub strategy: NounStrategy,
    pub suffixes: Vec<String>,
}

impl Default for NounFilter {
    fn default() -> Self {
        Self::new(NounStrategy::default())
    }
}

impl NounFilter {
    pub fn new(strategy: NounStrategy) -> Self {
        Self {
            strategy,
            suffixes: ["ing", "ly", "ed"].map(String::from).to_vec(),
        }
    }

    /// A token ending in a listed suffix is treated as inflected when the
    /// remaining stem (or the stem plus a silent `e`) is itself in the
    /// vocabulary, e.g. `running`/`runn` does not qualify but `jumped`/`jump` does.
    fn is_inflected(&self, word: &str, model: &EmbeddingModel) -> bool {
        self.suffixes.iter().any(|suffix| {
            word.strip_suffix(suffix.as_str())
                .filter(|stem| !stem.is_empty())
                .is_some_and(|stem| model.contains(stem) || model.contains(&format!("{stem}e")))
        })
    }
}

/// The multiset of nouns extracted from one text, in token order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounBag(Vec<String>);

impl NounBag {
    pub fn new(words: Vec<String>) -> Self {
        Self(words.into_iter().filter(|w| !w.is_empty()).collect())
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl<S: Into<String>> FromIterator<S> for NounBag {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(Into::into).collect())
    }
}

/// Result of noun extraction with the number of otherwise-eligible
/// candidates dropped because the model does not know them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub nouns: NounBag,
    pub oov_dropped: usize,
}

pub fn extract_nouns(
    tokens: &[Token],
    model: &EmbeddingModel,
    stopwords: &StopWords,
    filter: &NounFilter,
) -> NounBag {
    extract_nouns_counted(tokens, model, stopwords, filter).nouns
}

pub fn extract_nouns_counted(
    tokens: &[Token],
    model: &EmbeddingModel,
    stopwords: &StopWords,
    filter: &NounFilter,
) -> Extraction {
    let mut nouns = Vec::new();
    let mut oov_dropped = 0;
    for token in tokens {
        let word = token.normalized.as_str();
        if stopwords.contains(word)
            || word.chars().count() < 2
            || word.chars().all(|c| c.is_numeric())
        {
            continue;
        }
        if !model.contains(word) {
            oov_dropped += 1;
            continue;
        }
        if filter.strategy == NounStrategy::Suffix && filter.is_inflected(word, model) {
            continue;
        }
        nouns.push(word.to_owned());
    }
    Extraction {
        nouns: NounBag(nouns),
        oov_dropped,
    }
}

/// Stopwords and noun filter bundled for repeated text → noun-bag runs.
#[derive(Debug, Clone)]
pub struct TextPipeline {
    pub stopwords: StopWords,
    pub filter: NounFilter,
}

impl Default for TextPipeline {
    fn default() -> Self {
        Self {
            stopwords: StopWords::english(),
            filter: NounFilter::default(),
        }
    }
}

impl TextPipeline {
    pub fn nouns(&self, text: &str, model: &EmbeddingModel) -> Extraction {
        extract_nouns_counted(&tokenize(text), model, &self.stopwords, &self.filter)
    }
}

/// Exact multiset counts of a noun bag. Ordered by word for stable output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyTable(BTreeMap<String, u64>);

impl FrequencyTable {
    pub fn get(&self, word: &str) -> u64 {
        self.0.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.0.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn add_assign(&mut self, other: &FrequencyTable) {
        for (w, c) in other.iter() {
            *self.0.entry(w.to_owned()).or_default() += c;
        }
    }
}

impl Add for &FrequencyTable {
    type Output = FrequencyTable;

    fn add(self, rhs: &FrequencyTable) -> FrequencyTable {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl<'a> FromIterator<(&'a str, u64)> for FrequencyTable {
    fn from_iter<I: IntoIterator<Item = (&'a str, u64)>>(iter: I) -> Self {
        let mut map = BTreeMap::new();
        for (w, c) in iter.into_iter().filter(|&(_, c)| c > 0) {
            *map.entry(w.to_owned()).or_default() += c;
        }
        Self(map)
    }
}

pub fn word_frequencies(bag: &NounBag) -> FrequencyTable {
    bag.iter().map(|w| (w.as_str(), 1)).collect()
}
