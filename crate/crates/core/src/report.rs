//! Per-topic aggregation of classified posts into an exposure report, and
//! its JSON and Markdown renderings.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sentiment::SentimentClass;
use crate::text::FrequencyTable;
use crate::topic::Classification;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("post {post_id:?} is assigned to unknown topic {topic:?}")]
    UnknownTopic { post_id: String, topic: String },
    #[error("duplicate topic name {0:?}")]
    DuplicateTopic(String),
    #[error("post {0:?}: a topic is present iff the distance is finite")]
    Inconsistent(String),
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// One post joined with its topic assignment, sentiment and noun counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassifiedPostWire", into = "ClassifiedPostWire")]
pub struct ClassifiedPost {
    post_id: String,
    topic: Option<String>,
    distance: f64,
    sentiment: SentimentClass,
    nouns: FrequencyTable,
}

impl ClassifiedPost {
    pub fn new(
        post_id: impl Into<String>,
        classification: &Classification,
        sentiment: SentimentClass,
        nouns: FrequencyTable,
    ) -> Self {
        let (topic, distance) = match classification.assignment() {
            Some(a) => (Some(a.topic_name.clone()), a.distance),
            None => (None, f64::INFINITY),
        };
        Self {
            post_id: post_id.into(),
            topic,
            distance,
            sentiment,
            nouns,
        }
    }

    /// `distance` must be finite and non-negative.
    pub fn assigned(
        post_id: impl Into<String>,
        topic: impl Into<String>,
        distance: f64,
        sentiment: SentimentClass,
        nouns: FrequencyTable,
    ) -> Result<Self, ReportError> {
        let post_id = post_id.into();
        if !distance.is_finite() || distance < 0.0 {
            return Err(ReportError::Inconsistent(post_id));
        }
        Ok(Self {
            post_id,
            topic: Some(topic.into()),
            distance,
            sentiment,
            nouns,
        })
    }

    pub fn unclassified(
        post_id: impl Into<String>,
        sentiment: SentimentClass,
        nouns: FrequencyTable,
    ) -> Self {
        Self {
            post_id: post_id.into(),
            topic: None,
            distance: f64::INFINITY,
            sentiment,
            nouns,
        }
    }

    pub fn post_id(&self) -> &str {
        &self.post_id
    }

    pub fn topic(&self) -> Option<&str> {
        self.topic.as_deref()
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn sentiment(&self) -> SentimentClass {
        self.sentiment
    }

    pub fn nouns(&self) -> &FrequencyTable {
        &self.nouns
    }
}

// JSON has no infinity; unclassified posts carry `null` topic and distance.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifiedPostWire {
    post_id: String,
    topic: Option<String>,
    distance: Option<f64>,
    sentiment: SentimentClass,
    nouns: FrequencyTable,
}

impl TryFrom<ClassifiedPostWire> for ClassifiedPost {
    type Error = ReportError;

    fn try_from(w: ClassifiedPostWire) -> Result<Self, Self::Error> {
        match (w.topic, w.distance) {
            (Some(t), Some(d)) => Self::assigned(w.post_id, t, d, w.sentiment, w.nouns),
            (None, None) => Ok(Self::unclassified(w.post_id, w.sentiment, w.nouns)),
            _ => Err(ReportError::Inconsistent(w.post_id)),
        }
    }
}

impl From<ClassifiedPost> for ClassifiedPostWire {
    fn from(p: ClassifiedPost) -> Self {
        Self {
            post_id: p.post_id,
            distance: p.topic.as_ref().map(|_| p.distance),
            topic: p.topic,
            sentiment: p.sentiment,
            nouns: p.nouns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NounCount {
    pub word: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicAggregate {
    pub name: String,
    pub post_count: u64,
    /// Always carries all five classes, zeros included.
    pub sentiment_histogram: BTreeMap<SentimentClass, u64>,
    pub modal_sentiment: SentimentClass,
    /// Descending by count, then ascending by word.
    pub top_nouns: Vec<NounCount>,
}

impl TopicAggregate {
    fn from_posts(name: &str, posts: &[&ClassifiedPost]) -> Self {
        let mut histogram: BTreeMap<SentimentClass, u64> =
            SentimentClass::ALL.iter().map(|&c| (c, 0)).collect();
        let mut nouns = FrequencyTable::default();
        for p in posts {
            *histogram
                .get_mut(&p.sentiment)
                .expect("all classes present") += 1;
            nouns.add_assign(&p.nouns);
        }
        let mut top_nouns: Vec<NounCount> = nouns
            .iter()
            .map(|(w, c)| NounCount {
                word: w.to_owned(),
                count: c,
            })
            .collect();
        top_nouns.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
        Self {
            name: name.to_owned(),
            post_count: posts.len() as u64,
            modal_sentiment: modal_class(&histogram),
            sentiment_histogram: histogram,
            top_nouns,
        }
    }
}

/// Most frequent class; ties go to the more negative class, and an empty
/// histogram reports `Neutral`.
pub fn modal_class(histogram: &BTreeMap<SentimentClass, u64>) -> SentimentClass {
    let mut best = (SentimentClass::Neutral, 0);
    for class in SentimentClass::ALL {
        let n = histogram.get(&class).copied().unwrap_or(0);
        if n > best.1 {
            best = (class, n);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExposureReport {
    pub subject: String,
    pub generated_at: DateTime<Utc>,
    pub unclassified_count: u64,
    /// One aggregate per topic, zero-post topics included.
    pub topics: Vec<TopicAggregate>,
}

impl ExposureReport {
    pub fn total_posts(&self) -> u64 {
        self.topics.iter().map(|t| t.post_count).sum::<u64>() + self.unclassified_count
    }

    pub fn topic(&self, name: &str) -> Option<&TopicAggregate> {
        self.topics.iter().find(|t| t.name == name)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ReportError> {
        Ok(serde_json::from_slice(bytes)?)
    }
}

/// Folds classified posts into per-topic aggregates. `topic_names` fixes
/// which topics appear and in what order.
pub fn aggregate<'a>(
    subject: &str,
    classified: &[ClassifiedPost],
    topic_names: impl IntoIterator<Item = &'a str>,
    generated_at: DateTime<Utc>,
) -> Result<ExposureReport, ReportError> {
    let names: Vec<&str> = topic_names.into_iter().collect();
    let mut members: HashMap<&str, Vec<&ClassifiedPost>> = HashMap::with_capacity(names.len());
    for &n in &names {
        if members.insert(n, Vec::new()).is_some() {
            return Err(ReportError::DuplicateTopic(n.to_owned()));
        }
    }
    let mut unclassified_count = 0;
    for post in classified {
        match &post.topic {
            None => unclassified_count += 1,
            Some(t) => members
                .get_mut(t.as_str())
                .ok_or_else(|| ReportError::UnknownTopic {
                    post_id: post.post_id.clone(),
                    topic: t.clone(),
                })?
                .push(post),
        }
    }
    Ok(ExposureReport {
        subject: subject.to_owned(),
        generated_at,
        unclassified_count,
        topics: names
            .iter()
            .map(|n| TopicAggregate::from_posts(n, &members[n]))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Markdown,
}

pub const MARKDOWN_TOP_NOUNS: usize = 10;

pub fn render(report: &ExposureReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Markdown => render_markdown(report).into_bytes(),
    }
}

/// Canonical JSON: object keys sorted, topics sorted by name, two-space
/// indentation, trailing LF.
fn render_json(report: &ExposureReport) -> Vec<u8> {
    let mut sorted = report.clone();
    sorted.topics.sort_by(|a, b| a.name.cmp(&b.name));
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    let value = serde_json::to_value(&sorted).expect("report serializes");
    let mut out = serde_json::to_vec_pretty(&value).expect("value serializes");
    out.push(b'\n');
    out
}

fn render_markdown(report: &ExposureReport) -> String {
    let mut md = String::new();
    let classified: u64 = report.topics.iter().map(|t| t.post_count).sum();
    let _ = writeln!(md, "# Exposure report: {}\n", report.subject);
    let _ = writeln!(
        md,
        "Generated: {}  ",
        report
            .generated_at
            .to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true)
    );
    let _ = writeln!(
        md,
        "Posts: {} ({} classified, {} unclassified)\n",
        report.total_posts(),
        classified,
        report.unclassified_count
    );
    md.push_str("Modal-sentiment ties are broken toward the more negative class.\n");

    for topic in &report.topics {
        let _ = writeln!(md, "\n## {}\n", topic.name);
        let _ = writeln!(
            md,
            "Posts: {}. Modal sentiment: **{}**.\n",
            topic.post_count, topic.modal_sentiment
        );
        md.push_str("| Sentiment | Posts |\n|---|---:|\n");
        for class in SentimentClass::ALL {
            let n = topic.sentiment_histogram.get(&class).copied().unwrap_or(0);
            let _ = writeln!(md, "| {class} | {n} |");
        }
        md.push_str("\nTop nouns:\n\n");
        if topic.top_nouns.is_empty() {
            md.push_str("_none_\n");
        }
        for (i, n) in topic.top_nouns.iter().take(MARKDOWN_TOP_NOUNS).enumerate() {
            let _ = writeln!(md, "{}. {} ({})", i + 1, n.word, n.count);
        }
    }
    md
}
