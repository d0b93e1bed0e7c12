//! Pre-trained word-embedding models and the distance kernels that operate
//! on them.

mod distance;
mod format;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use distance::{
    euclidean_unchecked, nearest_squared, nearest_squared_batch, squared_euclidean,
};
pub use format::{
    parse_binary_model, parse_model, parse_text_model, read_binary, read_text, sniff_format,
    write_binary, write_text, BinaryLayout, ModelFormat,
};

use crate::text::normalize;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("model declares {expected} entries but only {found} were present")]
    Truncated { expected: usize, found: usize },
    #[error("unexpected data after the {expected} declared entries (line {line})")]
    TrailingData { expected: usize, line: usize },
    #[error("line {line}: word {word:?} has {found} components, expected {expected}")]
    WrongArity {
        line: usize,
        word: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: word {word:?} has non-numeric component {value:?}")]
    NonNumeric {
        line: usize,
        word: String,
        value: String,
    },
    #[error("word {word:?} has a non-finite component")]
    NonFinite { word: String },
    #[error("duplicate word {word:?}")]
    DuplicateWord { word: String },
    #[error("entry {entry}: invalid word {word:?} (empty, non-UTF-8, or contains whitespace)")]
    InvalidWord { entry: usize, word: String },
    #[error("entry {entry}: file ends inside the vector for {word:?}")]
    TruncatedVector { entry: usize, word: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimensionality must be positive")]
    ZeroDimension,
}

/// A borrowed view of one word's embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WordVector<'a> {
    pub word: &'a str,
    pub components: &'a [f64],
}

impl WordVector<'_> {
    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Euclidean distance between two word vectors of equal dimensionality.
pub fn euclidean(a: &WordVector<'_>, b: &WordVector<'_>) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(euclidean_unchecked(a.components, b.components))
}

/// Immutable vocabulary → vector map with a fixed dimensionality.
///
/// Vectors are stored contiguously in insertion order; components are
/// held in double precision regardless of the on-disk format.
#[derive(Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl fmt::Debug for EmbeddingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EmbeddingModel")
            .field("dim", &self.dim)
            .field("vocab_size", &self.words.len())
            .finish()
    }
}

impl EmbeddingModel {
    /// Builds a model, enforcing the store invariants: positive `dim`,
    /// non-empty whitespace-free unique words, `dim` finite components each.
    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut builder = ModelBuilder::new(dim, 0)?;
        for (word, components) in entries {
            builder.push(word.into(), &components, 0)?;
        }
        Ok(builder.finish())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Exact-key access, no normalization.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Looks `word` up after applying the text pipeline's normalization
    /// (lowercase, NFC). Out-of-vocabulary words yield `None`.
    pub fn lookup(&self, word: &str) -> Option<WordVector<'_>> {
        let key = normalize(word);
        self.index
            .get_key_value(key.as_str())
            .map(|(w, &i)| WordVector {
                word: w.as_str(),
                components: self.row(i),
            })
    }

    /// Entries in file order.
    pub fn iter(&self) -> impl ExactSizeIterator<Item = WordVector<'_>> + '_ {
        self.words.iter().enumerate().map(move |(i, w)| WordVector {
            word: w,
            components: self.row(i),
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// A copy with every vector scaled to unit L2 norm. Zero vectors are
    /// left as they are.
    pub fn l2_normalized(&self) -> Self {
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        out
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

pub(crate) struct ModelBuilder {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl ModelBuilder {
    pub(crate) fn new(dim: usize, capacity_hint: usize) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDimension);
        }
        // Header counts are untrusted; don't let them drive huge allocations.
        let cap = capacity_hint.min(1 << 16);
        Ok(Self {
            dim,
            words: Vec::with_capacity(cap),
            index: HashMap::with_capacity(cap),
            data: Vec::with_capacity(cap.saturating_mul(dim).min(1 << 22)),
        })
    }

    pub(crate) fn push(
        &mut self,
        word: String,
        components: &[f64],
        line: usize,
    ) -> Result<(), EmbeddingError> {
        if !is_valid_word(&word) {
            return Err(EmbeddingError::InvalidWord {
                entry: self.words.len(),
                word,
            });
        }
        if components.len() != self.dim {
            return Err(EmbeddingError::WrongArity {
                line,
                word,
                expected: self.dim,
                found: components.len(),
            });
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(EmbeddingError::NonFinite { word });
        }
        if self.index.contains_key(&word) {
            return Err(EmbeddingError::DuplicateWord { word });
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(components);
        Ok(())
    }

    pub(crate) fn len(&self) -> usize {
        self.words.len()
    }

    pub(crate) fn finish(self) -> EmbeddingModel {
        EmbeddingModel {
            dim: self.dim,
            words: self.words,
            index: self.index,
            data: self.data,
        }
    }
}

pub(crate) fn is_valid_word(word: &str) -> bool {
    !word.is_empty() && !word.chars().any(char::is_whitespace)
}
