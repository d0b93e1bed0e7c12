//! Topic centroids built from training documents, and nearest-topic
//! classification of noun bags by word-embedding distance.
//!
//! A topic's centroid is the *set* of vectors of the nouns found in its
//! training documents, not a mean point. The distance between a noun bag
//! `K` and a topic is the sum, over every in-vocabulary word of `K`, of
//! that word's Euclidean distance to the nearest centroid word.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::embedding::{nearest_squared, nearest_squared_batch, EmbeddingModel};
use crate::text::{NounBag, TextPipeline};

#[derive(Debug, Error)]
pub enum TopicError {
    #[error("topic {name:?} has no in-vocabulary training nouns")]
    EmptyCentroid { name: String },
    #[error("topic {name:?} has no training documents")]
    NoDocuments { name: String },
    #[error("a topic set needs at least two topics, got {0}")]
    TooFewTopics(usize),
    #[error("duplicate topic name {0:?}")]
    DuplicateName(String),
    #[error("topic {name:?} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid topic manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// A named cluster whose centroid is a deduplicated set of word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Topic {
    name: String,
    dim: usize,
    words: Vec<String>,
    vectors: Vec<f64>,
}

impl Topic {
    /// Builds a topic from explicit centroid words, resolving each through
    /// the model. OOV and repeated words are skipped.
    pub fn from_words<S: AsRef<str>>(
        name: impl Into<String>,
        words: impl IntoIterator<Item = S>,
        model: &EmbeddingModel,
    ) -> Result<Self, TopicError> {
        let name = name.into();
        let mut seen = HashSet::new();
        let mut topic = Topic {
            name,
            dim: model.dim(),
            words: Vec::new(),
            vectors: Vec::new(),
        };
        for word in words {
            let word = word.as_ref();
            if let Some(v) = model.get(word) {
                if seen.insert(word.to_owned()) {
                    topic.words.push(word.to_owned());
                    topic.vectors.extend_from_slice(v);
                }
            }
        }
        if topic.words.is_empty() {
            return Err(TopicError::EmptyCentroid { name: topic.name });
        }
        Ok(topic)
    }

    pub fn name(&self) -> &str {
        &self.name
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

    pub fn centroid_words(&self) -> impl ExactSizeIterator<Item = (&str, &[f64])> + '_ {
        self.words
            .iter()
            .zip(self.vectors.chunks_exact(self.dim))
            .map(|(w, v)| (w.as_str(), v))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }

    /// Row-major centroid matrix, `len() * dim()` components.
    pub fn matrix(&self) -> &[f64] {
        &self.vectors
    }
}

/// Outcome of [`build_topic`], with the count of OOV nouns dropped.
#[derive(Debug, Clone)]
pub struct BuiltTopic {
    pub topic: Topic,
    pub oov_dropped: usize,
}

/// Builds a topic from attacker-supplied descriptive documents: the
/// centroid is the deduplicated union of the nouns extracted from them.
pub fn build_topic<S: AsRef<str>>(
    name: &str,
    documents: &[S],
    model: &EmbeddingModel,
    pipeline: &TextPipeline,
) -> Result<BuiltTopic, TopicError> {
    if documents.is_empty() {
        return Err(TopicError::NoDocuments {
            name: name.to_owned(),
        });
    }
    let mut nouns = Vec::new();
    let mut oov_dropped = 0;
    for doc in documents {
        let ex = pipeline.nouns(doc.as_ref(), model);
        oov_dropped += ex.oov_dropped;
        nouns.extend(ex.nouns.words().iter().cloned());
    }
    let topic = Topic::from_words(name, nouns, model)?;
    Ok(BuiltTopic { topic, oov_dropped })
}

/// Ordered, validated collection of at least two uniquely named topics.
#[derive(Debug, Clone)]
pub struct TopicSet {
    topics: Vec<Topic>,
}

impl TopicSet {
    pub fn new(topics: Vec<Topic>) -> Result<Self, TopicError> {
        if topics.len() < 2 {
            return Err(TopicError::TooFewTopics(topics.len()));
        }
        let mut names = HashSet::new();
        for t in &topics {
            if !names.insert(t.name.as_str()) {
                return Err(TopicError::DuplicateName(t.name.clone()));
            }
            if t.dim != topics[0].dim {
                return Err(TopicError::DimensionMismatch {
                    name: t.name.clone(),
                    expected: topics[0].dim,
                    found: t.dim,
                });
            }
        }
        Ok(Self { topics })
    }

    pub fn topics(&self) -> &[Topic] {
        &self.topics
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.topics.iter().map(Topic::name)
    }

    pub fn len(&self) -> usize {
        self.topics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topics.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Topic> {
        self.topics.iter().find(|t| t.name == name)
    }
}

/// Smallest Euclidean distance between `k` and any centroid word of `topic`.
pub fn min_word_distance(k: &[f64], topic: &Topic) -> f64 {
    nearest_squared(k, &topic.vectors, topic.dim).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Sum over bag words of each word's nearest-centroid distance.
    #[default]
    PerWordSum,
    /// Single smallest distance over all (bag word, centroid word) pairs.
    GlobalMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassifyOptions {
    pub mode: DistanceMode,
    /// Divide each topic's distance by the number of matched bag words.
    pub normalize_length: bool,
}

/// `l(K, c_t)` together with the number of bag words that were in vocabulary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopicDistance {
    pub distance: f64,
    pub matched: usize,
}

pub fn topic_text_distance(
    bag: &NounBag,
    topic: &Topic,
    model: &EmbeddingModel,
    options: ClassifyOptions,
) -> TopicDistance {
    let vectors: Vec<&[f64]> = bag.iter().filter_map(|w| model.get(w)).collect();
    distance_over(&vectors, topic, options)
}

fn distance_over(vectors: &[&[f64]], topic: &Topic, options: ClassifyOptions) -> TopicDistance {
    let matched = vectors.len();
    if matched == 0 {
        return TopicDistance {
            distance: f64::INFINITY,
            matched,
        };
    }
    let mut nearest = vec![0.0; matched];
    nearest_squared_batch(vectors, &topic.vectors, topic.dim, &mut nearest);
    let mut distance = match options.mode {
        DistanceMode::PerWordSum => nearest.iter().map(|d| d.sqrt()).sum::<f64>(),
        DistanceMode::GlobalMin => nearest.iter().copied().fold(f64::INFINITY, f64::min).sqrt(),
    };
    if options.normalize_length {
        distance /= matched as f64;
    }
    TopicDistance { distance, matched }
}

/// Winning topic for a bag, with every topic's distance in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub topic_name: String,
    pub distance: f64,
    pub matched: usize,
    pub per_topic_distances: Vec<(String, f64)>,
}

impl Assignment {
    pub fn distance_to(&self, topic: &str) -> Option<f64> {
        self.per_topic_distances
            .iter()
            .find(|(n, _)| n == topic)
            .map(|&(_, d)| d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Assigned(Assignment),
    /// No bag word was in the model's vocabulary.
    Unclassified,
}

impl Classification {
    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            Classification::Assigned(a) => Some(a),
            Classification::Unclassified => None,
        }
    }

    pub fn topic_name(&self) -> Option<&str> {
        self.assignment().map(|a| a.topic_name.as_str())
    }
}

/// Assigns the bag to the topic with the smallest distance. Ties go to the
/// topic declared first; exact `f64` comparison, no epsilon.
pub fn classify(
    bag: &NounBag,
    topics: &TopicSet,
    model: &EmbeddingModel,
    options: ClassifyOptions,
) -> Classification {
    let vectors: Vec<&[f64]> = bag.iter().filter_map(|w| model.get(w)).collect();
    if vectors.is_empty() {
        return Classification::Unclassified;
    }
    let mut per_topic = Vec::with_capacity(topics.len());
    let mut best: Option<(usize, f64)> = None;
    for (i, topic) in topics.topics.iter().enumerate() {
        let d = distance_over(&vectors, topic, options).distance;
        if best.is_none_or(|(_, b)| d < b) {
            best = Some((i, d));
        }
        per_topic.push((topic.name.clone(), d));
    }
    let (winner, distance) = best.expect("topic sets are non-empty");
    Classification::Assigned(Assignment {
        topic_name: topics.topics[winner].name.clone(),
        distance,
        matched: vectors.len(),
        per_topic_distances: per_topic,
    })
}

/// Topic manifest: `{ "topics": [ { "name": ..., "documents": [paths] } ] }`.
/// Relative document paths resolve against the manifest's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicManifest {
    pub topics: Vec<TopicSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicSpec {
    pub name: String,
    pub documents: Vec<PathBuf>,
}

impl TopicManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopicError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|source| TopicError::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut manifest: TopicManifest =
            serde_json::from_str(&raw).map_err(|source| TopicError::Manifest {
                path: path.to_owned(),
                source,
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for spec in &mut manifest.topics {
            for doc in &mut spec.documents {
                if doc.is_relative() {
                    *doc = base.join(&*doc);
                }
            }
        }
        Ok(manifest)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.topics.iter().map(|t| t.name.as_str())
    }

    /// Reads every document and builds the topic set. Returns the total
    /// number of OOV training nouns dropped alongside the set.
    pub fn build(
        &self,
        model: &EmbeddingModel,
        pipeline: &TextPipeline,
    ) -> Result<(TopicSet, usize), TopicError> {
        let mut topics = Vec::with_capacity(self.topics.len());
        let mut oov = 0;
        for spec in &self.topics {
            let docs = spec
                .documents
                .iter()
                .map(|p| {
                    fs::read_to_string(p).map_err(|source| TopicError::Io {
                        path: p.clone(),
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let built = build_topic(&spec.name, &docs, model, pipeline)?;
            oov += built.oov_dropped;
            topics.push(built.topic);
        }
        Ok((TopicSet::new(topics)?, oov))
    }
}
