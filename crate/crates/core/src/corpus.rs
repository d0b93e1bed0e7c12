//! Loading, validating and deduplicating a subject's posts.
//!
//! Posts arrive either as a JSON-Lines export or through a cursor-paginated
//! [`PageFetcher`]. Every [`Corpus`] is sorted by timestamp and holds each
//! post id at most once: when ids collide the earliest post wins, with
//! input order breaking timestamp ties.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::num::NonZeroUsize;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("cannot merge corpora of different subjects ({left:?} vs {right:?})")]
    SubjectMismatch { left: String, right: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Source {
    Twitter,
    Gplus,
    File,
    Other(String),
}

impl From<String> for Source {
    fn from(s: String) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "twitter" => Source::Twitter,
            "gplus" | "g+" | "googleplus" => Source::Gplus,
            "file" => Source::File,
            _ => Source::Other(s),
        }
    }
}

impl From<Source> for String {
    fn from(s: Source) -> Self {
        s.to_string()
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Twitter => f.write_str("twitter"),
            Source::Gplus => f.write_str("gplus"),
            Source::File => f.write_str("file"),
            Source::Other(label) => f.write_str(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Post {
    pub id: String,
    pub source: Source,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
}

impl Post {
    fn validate(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.text.trim().is_empty() {
            return Err(format!("post {:?} has empty text", self.id));
        }
        Ok(())
    }
}

/// The profiled subject's posts, timestamp-sorted with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    subject: String,
    posts: Vec<Post>,
}

impl Corpus {
    /// Sorts and deduplicates `posts`. Returns the corpus and the number of
    /// duplicate-id posts dropped.
    pub fn new(subject: impl Into<String>, mut posts: Vec<Post>) -> (Self, usize) {
        posts.sort_by_key(|p| p.timestamp);
        let before = posts.len();
        let mut seen = HashSet::with_capacity(before);
        posts.retain(|p| seen.insert(p.id.clone()));
        let dropped = before - posts.len();
        (
            Self {
                subject: subject.into(),
                posts,
            },
            dropped,
        )
    }

    pub fn empty(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            posts: Vec::new(),
        }
    }

    pub fn subject(&self) -> &str {
        &self.subject
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Writes the posts back out as JSON-Lines.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for post in &self.posts {
            serde_json::to_writer(&mut w, post)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    Strict,
    /// Skip malformed lines and count them.
    #[default]
    Lenient,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    /// Malformed lines skipped in lenient mode, as (line number, reason).
    pub skipped: Vec<(usize, String)>,
    pub duplicates_dropped: usize,
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    subject: &str,
    mode: ParseMode,
) -> Result<LoadedCorpus, CorpusError> {
    read_corpus(BufReader::new(File::open(path)?), subject, mode)
}

pub fn read_corpus<R: BufRead>(
    reader: R,
    subject: &str,
    mode: ParseMode,
) -> Result<LoadedCorpus, CorpusError> {
    let mut posts = Vec::new();
    let mut skipped = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<Post>(&line)
            .map_err(|e| e.to_string())
            .and_then(|p| p.validate().map(|()| p));
        match (parsed, mode) {
            (Ok(post), _) => posts.push(post),
            (Err(reason), ParseMode::Strict) => {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    reason,
                })
            }
            (Err(reason), ParseMode::Lenient) => skipped.push((line_no, reason)),
        }
    }
    let (corpus, duplicates_dropped) = Corpus::new(subject, posts);
    Ok(LoadedCorpus {
        corpus,
        skipped,
        duplicates_dropped,
    })
}

/// Union of two corpora of the same subject, deduplicated by id and
/// re-sorted. Returns the number of duplicate posts dropped.
pub fn merge_corpora(a: &Corpus, b: &Corpus) -> Result<(Corpus, usize), CorpusError> {
    if a.subject != b.subject {
        return Err(CorpusError::SubjectMismatch {
            left: a.subject.clone(),
            right: b.subject.clone(),
        });
    }
    let posts = a.posts.iter().chain(&b.posts).cloned().collect();
    Ok(Corpus::new(a.subject.clone(), posts))
}

/// Where a paginated read starts and how much it asks for per call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagedSourceDescriptor {
    pub name: String,
    pub page_size: NonZeroUsize,
    /// Empty for the first page.
    pub cursor: String,
}

impl PagedSourceDescriptor {
    pub fn new(name: impl Into<String>, page_size: NonZeroUsize) -> Self {
        Self {
            name: name.into(),
            page_size,
            cursor: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub posts: Vec<Post>,
    /// `None` marks the end of the stream.
    pub next_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FetchError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("invalid cursor {0:?}")]
    InvalidCursor(String),
}

impl FetchError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, FetchError::Transport(_))
    }
}

/// A cursor-paginated post source, e.g. a social network's timeline API.
///
/// Implementations must return at most `page_size` posts per call and,
/// when walked from the empty cursor to the end marker, every post exactly
/// once.
pub trait PageFetcher: Send + Sync {
    fn fetch(&self, cursor: &str, page_size: NonZeroUsize) -> Result<Page, FetchError>;
}

pub fn fetch_page(
    desc: &PagedSourceDescriptor,
    fetcher: &dyn PageFetcher,
) -> Result<Page, FetchError> {
    fetcher.fetch(&desc.cursor, desc.page_size)
}

/// Walks a fetcher from `desc.cursor` to the end marker, retrying
/// transport failures up to `max_retries` times per page.
pub fn fetch_all(
    desc: &PagedSourceDescriptor,
    fetcher: &dyn PageFetcher,
    max_retries: usize,
) -> Result<Vec<Post>, FetchError> {
    let mut desc = desc.clone();
    let mut out = Vec::new();
    loop {
        let mut attempt = 0;
        let page = loop {
            match fetch_page(&desc, fetcher) {
                Err(e) if e.is_retryable() && attempt < max_retries => attempt += 1,
                other => break other?,
            }
        };
        out.extend(page.posts);
        match page.next_cursor {
            Some(next) => desc.cursor = next,
            None => return Ok(out),
        }
    }
}

/// In-memory fetcher over a fixed post list, with offset cursors of the
/// form `off:<n>`. Can be told to fail the next few calls with a transport
/// error.
#[derive(Debug, Default)]
pub struct MockFetcher {
    posts: Vec<Post>,
    transient_failures: AtomicUsize,
}

impl MockFetcher {
    pub fn new(posts: Vec<Post>) -> Self {
        Self {
            posts,
            transient_failures: AtomicUsize::new(0),
        }
    }

    /// Serves the posts of a JSON-Lines export.
    pub fn from_jsonl(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let loaded = load_corpus(path, "", ParseMode::Strict)?;
        Ok(Self::new(loaded.corpus.posts))
    }

    pub fn with_transient_failures(self, n: usize) -> Self {
        self.transient_failures.store(n, Ordering::SeqCst);
        self
    }

    fn offset(&self, cursor: &str) -> Result<usize, FetchError> {
        if cursor.is_empty() {
            return Ok(0);
        }
        cursor
            .strip_prefix("off:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0 && n < self.posts.len())
            .ok_or_else(|| FetchError::InvalidCursor(cursor.to_owned()))
    }
}

impl PageFetcher for MockFetcher {
    fn fetch(&self, cursor: &str, page_size: NonZeroUsize) -> Result<Page, FetchError> {
        let failing = self
            .transient_failures
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
            .is_ok();
        if failing {
            return Err(FetchError::Transport("injected failure".into()));
        }
        let start = self.offset(cursor)?;
        let end = (start + page_size.get()).min(self.posts.len());
        Ok(Page {
            posts: self.posts[start..end].to_vec(),
            next_cursor: (end < self.posts.len()).then(|| format!("off:{end}")),
        })
    }
}
