//! Command-line front end: `ingest`, `classify`, `report`, `profile`, plus
//! `sentiment`, which serves the external-scorer protocol over stdio.

mod config;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use config::{RunConfig, ScorerKind, Settings};

use crate::corpus::{load_corpus, merge_corpora, Corpus, CorpusError, ParseMode};
use crate::embedding::{parse_model, EmbeddingError, EmbeddingModel, ModelFormat};
use crate::pipeline::Classifier;
use crate::report::{aggregate, render, ClassifiedPost, ExposureReport, ReportError, ReportFormat};
use crate::sentiment::{
    ExternalScorer, LexiconScorer, NeutralScorer, SentimentClass, SentimentError, SentimentScorer,
    ValenceLexicon,
};
use crate::text::{NounFilter, NounStrategy, StopWords, TextPipeline};
use crate::topic::{DistanceMode, TopicError, TopicManifest, TopicSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Ingest,
    Model,
    Topics,
    Sentiment,
    Classify,
    Aggregate,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::Ingest => "ingest",
            Stage::Model => "model",
            Stage::Topics => "topics",
            Stage::Sentiment => "sentiment",
            Stage::Classify => "classify",
            Stage::Aggregate => "aggregate",
            Stage::Output => "output",
        })
    }
}

/// Determines the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Io,
    Data,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Io => 2,
            ErrorKind::Data => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(stage: Stage, kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            stage,
            kind,
            message: message.into(),
        }
    }

    fn io(stage: Stage, e: io::Error) -> Self {
        Self::new(stage, ErrorKind::Io, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        let kind = match e {
            CorpusError::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Data,
        };
        Self::new(Stage::Ingest, kind, e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        let kind = match e {
            EmbeddingError::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Data,
        };
        Self::new(Stage::Model, kind, e.to_string())
    }
}

impl From<TopicError> for CliError {
    fn from(e: TopicError) -> Self {
        let kind = match e {
            TopicError::Io { .. } => ErrorKind::Io,
            _ => ErrorKind::Data,
        };
        Self::new(Stage::Topics, kind, e.to_string())
    }
}

impl From<SentimentError> for CliError {
    fn from(e: SentimentError) -> Self {
        let kind = match e {
            SentimentError::Io(_) => ErrorKind::Io,
            _ => ErrorKind::Data,
        };
        Self::new(Stage::Sentiment, kind, e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        Self::new(Stage::Aggregate, ErrorKind::Data, e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hav-profiler",
    version,
    about = "Per-topic exposure profiling of social-media posts"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag (keys are the long flag names).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for sentiment scoring and classification.
    /// Defaults to the available parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<NonZeroUsize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load, validate and deduplicate a corpus; emit it as normalized JSON-Lines.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Output path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify every post of a corpus; emit one JSON object per post.
    Classify {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        sentiment: SentimentArgs,
        #[command(flatten)]
        topics: TopicArgs,
        /// Output path (default: standard output).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate the output of `classify` into an exposure report.
    Report {
        /// Classified posts, as written by `classify`.
        #[arg(long)]
        classified: Option<PathBuf>,
        /// Topic manifest; fixes the topics listed in the report.
        #[arg(long)]
        topics: Option<PathBuf>,
        #[arg(long)]
        subject: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the whole pipeline from corpus to report.
    Profile {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        text: TextArgs,
        #[command(flatten)]
        sentiment: SentimentArgs,
        #[command(flatten)]
        topics: TopicArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Score `{"id","text"}` JSON-Lines from stdin, answering `{"id","class"}`
    /// lines on stdout. Usable as an external scorer.
    Sentiment {
        /// Valence lexicon (default: the bundled starter lexicon).
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Post corpus in JSON-Lines; repeat to merge several exports.
    #[arg(long = "input", visible_alias = "corpus")]
    pub input: Vec<PathBuf>,
    /// Identifier of the profiled user.
    #[arg(long)]
    pub subject: Option<String>,
    /// Abort on the first malformed line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Pre-trained word2vec model.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model_format: Option<ModelFormat>,
    /// Scale every embedding to unit length before use.
    #[arg(long)]
    pub normalize_vectors: bool,
}

#[derive(Debug, Args)]
pub struct TextArgs {
    /// Stopword list, one word per line (default: bundled English list).
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub noun_strategy: Option<NounStrategy>,
}

#[derive(Debug, Args)]
pub struct SentimentArgs {
    /// Valence lexicon TSV (default: bundled starter lexicon).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Command line of the external scorer.
    #[arg(long)]
    pub scorer_cmd: Option<String>,
}

#[derive(Debug, Args)]
pub struct TopicArgs {
    /// Topic manifest JSON.
    #[arg(long)]
    pub topics: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub distance: Option<DistanceMode>,
    /// Divide each topic distance by the number of matched nouns.
    #[arg(long)]
    pub normalize_length: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
    /// Output path (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pin the report timestamp (RFC 3339) instead of using the current time.
    #[arg(long)]
    pub generated_at: Option<DateTime<Utc>>,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl InputArgs {
    fn apply(&self, s: &mut Settings) {
        s.input = (!self.input.is_empty()).then(|| self.input.clone());
        s.subject.clone_from(&self.subject);
        s.strict = flag(self.strict);
    }
}

impl ModelArgs {
    fn apply(&self, s: &mut Settings) {
        s.model.clone_from(&self.model);
        s.model_format = self.model_format;
        s.normalize_vectors = flag(self.normalize_vectors);
    }
}

impl TextArgs {
    fn apply(&self, s: &mut Settings) {
        s.stopwords.clone_from(&self.stopwords);
        s.noun_strategy = self.noun_strategy;
    }
}

impl SentimentArgs {
    fn apply(&self, s: &mut Settings) {
        s.lexicon.clone_from(&self.lexicon);
        s.scorer = self.scorer;
        s.scorer_cmd.clone_from(&self.scorer_cmd);
    }
}

impl TopicArgs {
    fn apply(&self, s: &mut Settings) {
        s.topics.clone_from(&self.topics);
        s.distance = self.distance;
        s.normalize_length = flag(self.normalize_length);
    }
}

impl OutputArgs {
    fn apply(&self, s: &mut Settings) {
        s.format = self.format;
        s.out.clone_from(&self.out);
        s.generated_at = self.generated_at;
    }
}

impl Cli {
    /// Flags first, then the config file for anything left unset.
    pub fn settings(&self) -> Result<Settings, CliError> {
        let mut s = Settings {
            jobs: self.jobs,
            ..Settings::default()
        };
        match &self.command {
            Command::Ingest { input, out } => {
                input.apply(&mut s);
                s.out.clone_from(out);
            }
            Command::Classify {
                input,
                model,
                text,
                sentiment,
                topics,
                out,
            } => {
                input.apply(&mut s);
                model.apply(&mut s);
                text.apply(&mut s);
                sentiment.apply(&mut s);
                topics.apply(&mut s);
                s.out.clone_from(out);
            }
            Command::Report {
                classified,
                topics,
                subject,
                output,
            } => {
                s.classified.clone_from(classified);
                s.topics.clone_from(topics);
                s.subject.clone_from(subject);
                output.apply(&mut s);
            }
            Command::Profile {
                input,
                model,
                text,
                sentiment,
                topics,
                output,
            } => {
                input.apply(&mut s);
                model.apply(&mut s);
                text.apply(&mut s);
                sentiment.apply(&mut s);
                topics.apply(&mut s);
                output.apply(&mut s);
            }
            Command::Sentiment { lexicon } => s.lexicon.clone_from(lexicon),
        }
        if let Some(path) = &self.config {
            s.fill_from(Settings::load_file(path)?);
        }
        Ok(s)
    }
}

/// Counts written to stderr as one JSON line when a command finishes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub command: String,
    pub posts: usize,
    pub skipped_lines: usize,
    pub duplicates_dropped: usize,
    pub oov_dropped_training: usize,
    pub oov_dropped_posts: usize,
    pub unclassified: usize,
    pub topics: BTreeMap<String, u64>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ErrorKind::Validation.exit_code()
            } else {
                0
            };
        }
    };
    match run(&cli) {
        Ok(summary) => {
            if let Some(summary) = summary {
                eprintln!(
                    "{}",
                    serde_json::to_string(&summary).expect("summary serializes")
                );
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.kind.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<Option<RunSummary>, CliError> {
    let settings = cli.settings()?;
    match &cli.command {
        Command::Ingest { .. } => run_ingest(&settings).map(Some),
        Command::Classify { .. } => run_classify(&settings).map(Some),
        Command::Report { .. } => run_report(&settings).map(Some),
        Command::Profile { .. } => {
            let config = RunConfig::resolve(&settings)?;
            run_profile(&config).map(|(_, summary)| Some(summary))
        }
        Command::Sentiment { .. } => serve_sentiment(&settings).map(|()| None),
    }
}

struct Ingested {
    corpus: Corpus,
    skipped: usize,
    duplicates: usize,
}

fn ingest(paths: &[PathBuf], subject: &str, mode: ParseMode) -> Result<Ingested, CliError> {
    let mut out = Ingested {
        corpus: Corpus::empty(subject),
        skipped: 0,
        duplicates: 0,
    };
    for path in paths {
        let loaded = load_corpus(path, subject, mode).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", path.display(), err.message);
            err
        })?;
        for (line, reason) in &loaded.skipped {
            eprintln!("warning: {}:{line}: skipped: {reason}", path.display());
        }
        out.skipped += loaded.skipped.len();
        out.duplicates += loaded.duplicates_dropped;
        let (merged, dropped) = merge_corpora(&out.corpus, &loaded.corpus)?;
        out.duplicates += dropped;
        out.corpus = merged;
    }
    if out.duplicates > 0 {
        eprintln!("warning: dropped {} duplicate post id(s)", out.duplicates);
    }
    Ok(out)
}

fn ingest_from(s: &Settings) -> Result<Ingested, CliError> {
    let paths = Settings::require(&s.input, "input")?;
    let subject = Settings::require(&s.subject, "subject")?;
    for p in paths {
        config::require_file(p, "input")?;
    }
    let mode = if s.strict.unwrap_or(false) {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    };
    ingest(paths, subject, mode)
}

fn run_ingest(s: &Settings) -> Result<RunSummary, CliError> {
    let ing = ingest_from(s)?;
    let mut buf = Vec::new();
    ing.corpus
        .write_jsonl(&mut buf)
        .map_err(|e| CliError::io(Stage::Output, e))?;
    write_output(s.out.as_deref(), &buf)?;
    Ok(RunSummary {
        command: "ingest".into(),
        posts: ing.corpus.len(),
        skipped_lines: ing.skipped,
        duplicates_dropped: ing.duplicates,
        ..RunSummary::default()
    })
}

fn load_model(
    path: &Path,
    format: ModelFormat,
    normalize: bool,
) -> Result<EmbeddingModel, CliError> {
    let model = parse_model(path, format).map_err(|e| {
        let mut err = CliError::from(e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })?;
    Ok(if normalize {
        model.l2_normalized()
    } else {
        model
    })
}

fn text_pipeline(
    stopwords: Option<&Path>,
    strategy: NounStrategy,
) -> Result<TextPipeline, CliError> {
    let stopwords = match stopwords {
        Some(p) => StopWords::load(p).map_err(|e| CliError::io(Stage::Topics, e))?,
        None => StopWords::english(),
    };
    Ok(TextPipeline {
        stopwords,
        filter: NounFilter::new(strategy),
    })
}

fn lexicon(path: Option<&Path>) -> Result<ValenceLexicon, CliError> {
    Ok(match path {
        Some(p) => ValenceLexicon::load(p)?,
        None => ValenceLexicon::starter(),
    })
}

fn scorer(
    kind: ScorerKind,
    lexicon_path: Option<&Path>,
    cmd: Option<&str>,
) -> Result<Box<dyn SentimentScorer>, CliError> {
    Ok(match kind {
        ScorerKind::Lexicon => Box::new(LexiconScorer::new(lexicon(lexicon_path)?)),
        ScorerKind::None => Box::new(NeutralScorer),
        ScorerKind::External => {
            let cmd = cmd.ok_or_else(|| {
                CliError::new(
                    Stage::Validate,
                    ErrorKind::Validation,
                    "missing required option --scorer-cmd",
                )
            })?;
            Box::new(ExternalScorer::new(cmd)?)
        }
    })
}

fn thread_pool(jobs: Option<NonZeroUsize>) -> Result<rayon::ThreadPool, CliError> {
    let n = jobs
        .or_else(|| std::thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::new(Stage::Validate, ErrorKind::Validation, e.to_string()))
}

struct ClassifyInputs<'a> {
    corpus: &'a Corpus,
    model: &'a EmbeddingModel,
    topics: &'a TopicSet,
    text: &'a TextPipeline,
    scorer: &'a dyn SentimentScorer,
    options: crate::topic::ClassifyOptions,
    jobs: Option<NonZeroUsize>,
}

fn classify_corpus(inp: ClassifyInputs<'_>) -> Result<(Vec<ClassifiedPost>, usize), CliError> {
    let pool = thread_pool(inp.jobs)?;
    pool.install(|| {
        let sentiments: Vec<SentimentClass> = inp.scorer.score_posts(inp.corpus.posts())?;
        let classifier = Classifier {
            model: inp.model,
            topics: inp.topics,
            text: inp.text,
            options: inp.options,
        };
        let batch = classifier.classify_all(inp.corpus.posts(), &sentiments);
        Ok((batch.posts, batch.oov_dropped))
    })
}

/// Runs ingest → sentiment → noun extraction → classification →
/// aggregation → render and writes the rendered report.
pub fn run_profile(config: &RunConfig) -> Result<(ExposureReport, RunSummary), CliError> {
    let ing = ingest(&config.corpus_paths, &config.subject, config.parse_mode)?;
    let model = load_model(
        &config.model_path,
        config.model_format,
        config.normalize_vectors,
    )?;
    let text = text_pipeline(config.stopwords_path.as_deref(), config.noun_strategy)?;
    let manifest = TopicManifest::load(&config.topics_path)?;
    let (topics, training_oov) = manifest.build(&model, &text)?;
    let scorer = scorer(
        config.scorer,
        config.lexicon_path.as_deref(),
        config.scorer_cmd.as_deref(),
    )?;

    let (classified, post_oov) = classify_corpus(ClassifyInputs {
        corpus: &ing.corpus,
        model: &model,
        topics: &topics,
        text: &text,
        scorer: scorer.as_ref(),
        options: config.classify,
        jobs: config.jobs,
    })?;

    let report = aggregate(
        &config.subject,
        &classified,
        topics.names(),
        config.generated_at.unwrap_or_else(Utc::now),
    )?;
    write_output(config.out.as_deref(), &render(&report, config.format))?;

    let summary = RunSummary {
        command: "profile".into(),
        posts: ing.corpus.len(),
        skipped_lines: ing.skipped,
        duplicates_dropped: ing.duplicates,
        oov_dropped_training: training_oov,
        oov_dropped_posts: post_oov,
        unclassified: report.unclassified_count as usize,
        topics: report
            .topics
            .iter()
            .map(|t| (t.name.clone(), t.post_count))
            .collect(),
    };
    Ok((report, summary))
}

fn run_classify(s: &Settings) -> Result<RunSummary, CliError> {
    let model_path = Settings::require(&s.model, "model")?;
    let topics_path = Settings::require(&s.topics, "topics")?;
    config::require_file(model_path, "model")?;
    config::require_file(topics_path, "topics")?;
    let ing = ingest_from(s)?;
    let model = load_model(
        model_path,
        s.model_format.unwrap_or_default(),
        s.normalize_vectors.unwrap_or(false),
    )?;
    let text = text_pipeline(s.stopwords.as_deref(), s.noun_strategy.unwrap_or_default())?;
    let (topics, training_oov) = TopicManifest::load(topics_path)?.build(&model, &text)?;
    let scorer = scorer(
        s.scorer.unwrap_or_default(),
        s.lexicon.as_deref(),
        s.scorer_cmd.as_deref(),
    )?;
    let (classified, post_oov) = classify_corpus(ClassifyInputs {
        corpus: &ing.corpus,
        model: &model,
        topics: &topics,
        text: &text,
        scorer: scorer.as_ref(),
        options: crate::topic::ClassifyOptions {
            mode: s.distance.unwrap_or_default(),
            normalize_length: s.normalize_length.unwrap_or(false),
        },
        jobs: s.jobs,
    })?;

    let mut buf = Vec::new();
    let mut topic_counts: BTreeMap<String, u64> =
        topics.names().map(|n| (n.to_owned(), 0)).collect();
    let mut unclassified = 0;
    for post in &classified {
        match post.topic() {
            Some(t) => *topic_counts.get_mut(t).expect("known topic") += 1,
            None => unclassified += 1,
        }
        serde_json::to_writer(&mut buf, post).expect("classified post serializes");
        buf.push(b'\n');
    }
    write_output(s.out.as_deref(), &buf)?;
    Ok(RunSummary {
        command: "classify".into(),
        posts: ing.corpus.len(),
        skipped_lines: ing.skipped,
        duplicates_dropped: ing.duplicates,
        oov_dropped_training: training_oov,
        oov_dropped_posts: post_oov,
        unclassified,
        topics: topic_counts,
    })
}

fn run_report(s: &Settings) -> Result<RunSummary, CliError> {
    let classified_path = Settings::require(&s.classified, "classified")?;
    let topics_path = Settings::require(&s.topics, "topics")?;
    let subject = Settings::require(&s.subject, "subject")?;
    config::require_file(classified_path, "classified")?;
    config::require_file(topics_path, "topics")?;
    let manifest = TopicManifest::load(topics_path)?;

    let file =
        std::fs::File::open(classified_path).map_err(|e| CliError::io(Stage::Aggregate, e))?;
    let mut classified = Vec::new();
    for (idx, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(Stage::Aggregate, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let post: ClassifiedPost = serde_json::from_str(&line).map_err(|e| {
            CliError::new(
                Stage::Aggregate,
                ErrorKind::Data,
                format!("{}:{}: {e}", classified_path.display(), idx + 1),
            )
        })?;
        classified.push(post);
    }
    let report = aggregate(
        subject,
        &classified,
        manifest.names(),
        s.generated_at.unwrap_or_else(Utc::now),
    )?;
    write_output(
        s.out.as_deref(),
        &render(&report, s.format.unwrap_or_default()),
    )?;
    Ok(RunSummary {
        command: "report".into(),
        posts: classified.len(),
        unclassified: report.unclassified_count as usize,
        topics: report
            .topics
            .iter()
            .map(|t| (t.name.clone(), t.post_count))
            .collect(),
        ..RunSummary::default()
    })
}

#[derive(Deserialize)]
struct ScoreRequest {
    id: String,
    text: String,
}

#[derive(Serialize)]
struct ScoreResponse<'a> {
    id: &'a str,
    class: SentimentClass,
}

fn serve_sentiment(s: &Settings) -> Result<(), CliError> {
    let scorer = LexiconScorer::new(lexicon(s.lexicon.as_deref())?);
    let stdin = io::stdin().lock();
    let mut stdout = io::BufWriter::new(io::stdout().lock());
    for (idx, line) in stdin.lines().enumerate() {
        let line = line.map_err(|e| CliError::io(Stage::Sentiment, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let req: ScoreRequest = serde_json::from_str(&line).map_err(|e| {
            CliError::new(
                Stage::Sentiment,
                ErrorKind::Data,
                format!("line {}: {e}", idx + 1),
            )
        })?;
        let resp = ScoreResponse {
            id: &req.id,
            class: scorer.score(&req.text),
        };
        serde_json::to_writer(&mut stdout, &resp).expect("response serializes");
        stdout
            .write_all(b"\n")
            .map_err(|e| CliError::io(Stage::Sentiment, e))?;
    }
    stdout
        .flush()
        .map_err(|e| CliError::io(Stage::Sentiment, e))
}

/// Writes to `path` via a temporary file in the same directory and an
/// atomic rename, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::io(Stage::Output, e);
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|()| out.flush())
            .map_err(io_err);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
