//! Five-class sentiment scoring.
//!
//! [`LexiconScorer`] is the reference scorer: the mean valence of the
//! lexicon words in a text, with single-token negation, bucketed into
//! five bands. Any other engine can stand in behind [`SentimentScorer`];
//! [`ExternalScorer`] drives one as a subprocess.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Command, Stdio};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Post};
use crate::text::{normalize, tokenize};

const DEFAULT_LEXICON: &str = include_str!("../data/lexicon_en.tsv");

#[derive(Debug, Error)]
pub enum SentimentError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("external scorer: {0}")]
    External(String),
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum SentimentClass {
    #[serde(alias = "VeryNegative")]
    VeryNegative,
    #[serde(alias = "Negative")]
    Negative,
    #[default]
    #[serde(alias = "Neutral")]
    Neutral,
    #[serde(alias = "Positive")]
    Positive,
    #[serde(alias = "VeryPositive")]
    VeryPositive,
}

impl SentimentClass {
    /// All classes from most negative to most positive.
    pub const ALL: [SentimentClass; 5] = [
        SentimentClass::VeryNegative,
        SentimentClass::Negative,
        SentimentClass::Neutral,
        SentimentClass::Positive,
        SentimentClass::VeryPositive,
    ];

    /// Buckets a mean valence: `(-inf, -0.6]`, `(-0.6, -0.2]`, `(-0.2, 0.2)`,
    /// `[0.2, 0.6)`, `[0.6, inf)`.
    pub fn from_mean(m: f64) -> Self {
        if m <= -0.6 {
            SentimentClass::VeryNegative
        } else if m <= -0.2 {
            SentimentClass::Negative
        } else if m < 0.2 {
            SentimentClass::Neutral
        } else if m < 0.6 {
            SentimentClass::Positive
        } else {
            SentimentClass::VeryPositive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentClass::VeryNegative => "very_negative",
            SentimentClass::Negative => "negative",
            SentimentClass::Neutral => "neutral",
            SentimentClass::Positive => "positive",
            SentimentClass::VeryPositive => "very_positive",
        }
    }
}

impl fmt::Display for SentimentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Normalized word → valence in `[-1, 1]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValenceLexicon(HashMap<String, f64>);

impl ValenceLexicon {
    /// The shipped ~50-word English starter lexicon.
    pub fn starter() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SentimentError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// `word<TAB>valence` per line; blank lines and `#` comments ignored.
    pub fn parse(contents: &str) -> Result<Self, SentimentError> {
        let mut map = HashMap::new();
        for (idx, raw) in contents.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| SentimentError::Lexicon {
                line: idx + 1,
                reason,
            };
            let (word, value) = line
                .split_once('\t')
                .ok_or_else(|| err("expected word<TAB>valence".into()))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("bad valence {value:?}")))?;
            let word = normalize(word.trim());
            if word.is_empty() {
                return Err(err("empty word".into()));
            }
            if !(-1.0..=1.0).contains(&value) {
                return Err(err(format!("valence {value} outside [-1, 1]")));
            }
            map.insert(word, value);
        }
        Ok(Self(map))
    }

    /// Builds a lexicon from pairs; valences must lie in `[-1, 1]`.
    pub fn from_pairs<S: AsRef<str>>(
        pairs: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Self, SentimentError> {
        let mut map = HashMap::new();
        for (i, (w, v)) in pairs.into_iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(SentimentError::Lexicon {
                    line: i + 1,
                    reason: format!("valence {v} outside [-1, 1]"),
                });
            }
            map.insert(normalize(w.as_ref()), v);
        }
        Ok(Self(map))
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.0.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.0.iter().map(|(w, &v)| (w.as_str(), v))
    }
}

/// Text → five-class sentiment, for whole batches of posts.
pub trait SentimentScorer: Send + Sync {
    /// One class per post, in input order.
    fn score_posts(&self, posts: &[Post]) -> Result<Vec<SentimentClass>, SentimentError>;
}

/// Always answers `Neutral`; used when sentiment scoring is disabled.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeutralScorer;

impl SentimentScorer for NeutralScorer {
    fn score_posts(&self, posts: &[Post]) -> Result<Vec<SentimentClass>, SentimentError> {
        Ok(vec![SentimentClass::Neutral; posts.len()])
    }
}

#[derive(Debug, Clone)]
pub struct LexiconScorer {
    lexicon: ValenceLexicon,
    negators: HashSet<String>,
}

impl LexiconScorer {
    pub fn new(lexicon: ValenceLexicon) -> Self {
        Self {
            lexicon,
            negators: ["not", "no", "never", "n't"].map(String::from).into(),
        }
    }

    pub fn with_negators<S: AsRef<str>>(mut self, negators: impl IntoIterator<Item = S>) -> Self {
        self.negators = negators
            .into_iter()
            .map(|s| normalize(s.as_ref()))
            .collect();
        self
    }

    pub fn lexicon(&self) -> &ValenceLexicon {
        &self.lexicon
    }

    /// Contraction-style entries such as `n't` also match as a suffix
    /// (`don't`, `isn't`).
    fn is_negator(&self, word: &str) -> bool {
        self.negators.contains(word)
            || self
                .negators
                .iter()
                .any(|n| n.starts_with("n'") && word.ends_with(n.as_str()))
    }

    /// Mean valence over lexicon hits, or `None` when nothing matched.
    pub fn mean_valence(&self, text: &str) -> Option<f64> {
        let tokens = tokenize(text);
        let mut sum = 0.0;
        let mut hits = 0usize;
        for (i, token) in tokens.iter().enumerate() {
            if let Some(mut v) = self.lexicon.get(&token.normalized) {
                if i > 0 && self.is_negator(&tokens[i - 1].normalized) {
                    v = -v;
                }
                sum += v;
                hits += 1;
            }
        }
        (hits > 0).then(|| sum / hits as f64)
    }

    pub fn score(&self, text: &str) -> SentimentClass {
        self.mean_valence(text)
            .map_or(SentimentClass::Neutral, SentimentClass::from_mean)
    }
}

impl SentimentScorer for LexiconScorer {
    fn score_posts(&self, posts: &[Post]) -> Result<Vec<SentimentClass>, SentimentError> {
        Ok(posts.par_iter().map(|p| self.score(&p.text)).collect())
    }
}

/// Scores every post of a corpus with the lexicon scorer.
pub fn score_batch(corpus: &Corpus, scorer: &LexiconScorer) -> BTreeMap<String, SentimentClass> {
    corpus
        .posts()
        .par_iter()
        .map(|p| (p.id.clone(), scorer.score(&p.text)))
        .collect()
}

/// Runs an external program that reads `{"id","text"}` JSON-Lines on stdin
/// and answers `{"id","class"}` JSON-Lines on stdout.
#[derive(Debug, Clone)]
pub struct ExternalScorer {
    program: String,
    args: Vec<String>,
}

#[derive(Serialize)]
struct ExternalRequest<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct ExternalResponse {
    id: String,
    class: SentimentClass,
}

impl ExternalScorer {
    /// `command` is split on whitespace into program and arguments.
    pub fn new(command: &str) -> Result<Self, SentimentError> {
        let mut parts = command.split_whitespace().map(String::from);
        let program = parts
            .next()
            .ok_or_else(|| SentimentError::External("empty command".into()))?;
        Ok(Self {
            program,
            args: parts.collect(),
        })
    }
}

impl SentimentScorer for ExternalScorer {
    fn score_posts(&self, posts: &[Post]) -> Result<Vec<SentimentClass>, SentimentError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| SentimentError::External(format!("spawning {:?}: {e}", self.program)))?;

        let mut stdin = child.stdin.take().expect("stdin is piped");
        let requests: Vec<u8> = posts
            .iter()
            .flat_map(|p| {
                let mut line = serde_json::to_vec(&ExternalRequest {
                    id: &p.id,
                    text: &p.text,
                })
                .expect("request serializes");
                line.push(b'\n');
                line
            })
            .collect();
        let writer = std::thread::spawn(move || stdin.write_all(&requests));

        let stdout = child.stdout.take().expect("stdout is piped");
        let mut classes = HashMap::with_capacity(posts.len());
        for line in BufReader::new(stdout).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let resp: ExternalResponse = serde_json::from_str(&line)
                .map_err(|e| SentimentError::External(format!("bad response {line:?}: {e}")))?;
            classes.insert(resp.id, resp.class);
        }
        writer
            .join()
            .map_err(|_| SentimentError::External("stdin writer panicked".into()))??;
        let status = child.wait()?;
        if !status.success() {
            return Err(SentimentError::External(format!("exited with {status}")));
        }
        posts
            .iter()
            .map(|p| {
                classes.get(&p.id).copied().ok_or_else(|| {
                    SentimentError::External(format!("no class for post {:?}", p.id))
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scorer(pairs: &[(&str, f64)]) -> LexiconScorer {
        LexiconScorer::new(ValenceLexicon::from_pairs(pairs.iter().copied()).unwrap())
    }

    #[test]
    fn empty_text_is_neutral() {
        assert_eq!(scorer(&[]).score(""), SentimentClass::Neutral);
    }

    #[test]
    fn single_word() {
        assert_eq!(
            scorer(&[("terrible", -0.8)]).score("terrible"),
            SentimentClass::VeryNegative
        );
    }

    #[test]
    fn mean_of_hits() {
        let s = scorer(&[("good", 0.5), ("terrible", -0.8)]);
        let m = s.mean_valence("good but terrible").unwrap();
        assert!((m + 0.15).abs() < 1e-15);
        assert_eq!(s.score("good but terrible"), SentimentClass::Neutral);
    }

    #[test]
    fn negation_flips() {
        let s = scorer(&[("good", 0.5)]);
        assert_eq!(s.mean_valence("not good"), Some(-0.5));
        assert_eq!(s.score("not good"), SentimentClass::Negative);
        assert_eq!(s.score("Don't good"), SentimentClass::Negative);
        assert_eq!(s.score("not very good"), SentimentClass::Positive);
    }

    #[test]
    fn thresholds_are_closed_toward_extremes() {
        use SentimentClass::*;
        let cases = [
            (-1.0, VeryNegative),
            (-0.6, VeryNegative),
            (-0.59, Negative),
            (-0.2, Negative),
            (-0.19, Neutral),
            (0.0, Neutral),
            (0.19, Neutral),
            (0.2, Positive),
            (0.59, Positive),
            (0.6, VeryPositive),
            (1.0, VeryPositive),
        ];
        for (m, c) in cases {
            assert_eq!(SentimentClass::from_mean(m), c, "m={m}");
        }
    }

    #[test]
    fn lexicon_parsing() {
        let lex = ValenceLexicon::parse("# c\nGood\t0.5\n\nbad\t-0.5\r\n").unwrap();
        assert_eq!(lex.get("good"), Some(0.5));
        assert_eq!(lex.get("bad"), Some(-0.5));
        assert!(matches!(
            ValenceLexicon::parse("x\t1.5"),
            Err(SentimentError::Lexicon { line: 1, .. })
        ));
        assert!(ValenceLexicon::parse("x 0.5").is_err());
        assert!(ValenceLexicon::starter().len() >= 50);
    }

    #[test]
    fn class_names_round_trip() {
        for c in SentimentClass::ALL {
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.as_str()));
            assert_eq!(serde_json::from_str::<SentimentClass>(&json).unwrap(), c);
        }
        assert_eq!(
            serde_json::from_str::<SentimentClass>("\"VeryPositive\"").unwrap(),
            SentimentClass::VeryPositive
        );
    }
}
