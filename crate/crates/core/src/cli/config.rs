use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;

use super::{CliError, ErrorKind, Stage};
use crate::corpus::ParseMode;
use crate::embedding::ModelFormat;
use crate::report::ReportFormat;
use crate::text::NounStrategy;
use crate::topic::{ClassifyOptions, DistanceMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    #[default]
    Lexicon,
    External,
    /// Skip sentiment; every post is neutral.
    None,
}

/// Every option a run can take, unresolved. Populated from command-line
/// flags first; anything still unset is then taken from the config file.
///
/// The TOML config file uses the same keys as the long flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    #[serde(alias = "corpus")]
    pub input: Option<Vec<PathBuf>>,
    pub subject: Option<String>,
    pub strict: Option<bool>,
    pub model: Option<PathBuf>,
    pub model_format: Option<ModelFormat>,
    pub normalize_vectors: Option<bool>,
    pub topics: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub noun_strategy: Option<NounStrategy>,
    pub lexicon: Option<PathBuf>,
    pub scorer: Option<ScorerKind>,
    pub scorer_cmd: Option<String>,
    pub distance: Option<DistanceMode>,
    pub normalize_length: Option<bool>,
    pub classified: Option<PathBuf>,
    pub format: Option<ReportFormat>,
    pub out: Option<PathBuf>,
    pub jobs: Option<NonZeroUsize>,
    pub generated_at: Option<DateTime<Utc>>,
}

macro_rules! fill {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

impl Settings {
    /// Reads a TOML config file. Relative paths inside it are resolved
    /// against the file's directory.
    pub fn load_file(path: &Path) -> Result<Self, CliError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            CliError::new(
                Stage::Validate,
                ErrorKind::Validation,
                format!("config {}: {e}", path.display()),
            )
        })?;
        let mut file: Settings = toml::from_str(&raw).map_err(|e| {
            CliError::new(
                Stage::Validate,
                ErrorKind::Validation,
                format!("config {}: {e}", path.display()),
            )
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        file.input.iter_mut().flatten().for_each(rebase);
        for p in [
            &mut file.model,
            &mut file.topics,
            &mut file.stopwords,
            &mut file.lexicon,
            &mut file.classified,
            &mut file.out,
        ]
        .into_iter()
        .flatten()
        {
            rebase(p);
        }
        Ok(file)
    }

    /// Fills every unset option from `file`; values already set win.
    pub fn fill_from(&mut self, file: Settings) {
        fill!(self, file;
            input, subject, strict, model, model_format, normalize_vectors, topics,
            stopwords, noun_strategy, lexicon, scorer, scorer_cmd, distance,
            normalize_length, classified, format, out, jobs, generated_at,
        );
        if self.input.as_ref().is_some_and(Vec::is_empty) {
            self.input = None;
        }
    }

    pub(crate) fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
        value.as_ref().ok_or_else(|| {
            CliError::new(
                Stage::Validate,
                ErrorKind::Validation,
                format!("missing required option --{flag}"),
            )
        })
    }
}

pub(crate) fn require_file(path: &Path, flag: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::new(
            Stage::Validate,
            ErrorKind::Validation,
            format!(
                "--{flag}: {} does not exist or is not a file",
                path.display()
            ),
        ))
    }
}

/// Fully resolved configuration of an end-to-end profiling run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subject: String,
    pub corpus_paths: Vec<PathBuf>,
    pub parse_mode: ParseMode,
    pub model_path: PathBuf,
    pub model_format: ModelFormat,
    pub normalize_vectors: bool,
    pub topics_path: PathBuf,
    pub stopwords_path: Option<PathBuf>,
    pub noun_strategy: NounStrategy,
    pub lexicon_path: Option<PathBuf>,
    pub scorer: ScorerKind,
    pub scorer_cmd: Option<String>,
    pub classify: ClassifyOptions,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
    pub jobs: Option<NonZeroUsize>,
    pub generated_at: Option<DateTime<Utc>>,
}

impl RunConfig {
    /// Checks that every required option is present and every referenced
    /// input file exists.
    pub fn resolve(s: &Settings) -> Result<Self, CliError> {
        let subject = Settings::require(&s.subject, "subject")?.clone();
        let corpus_paths = Settings::require(&s.input, "input")?.clone();
        let model_path = Settings::require(&s.model, "model")?.clone();
        let topics_path = Settings::require(&s.topics, "topics")?.clone();
        for p in &corpus_paths {
            require_file(p, "input")?;
        }
        require_file(&model_path, "model")?;
        require_file(&topics_path, "topics")?;
        if let Some(p) = &s.stopwords {
            require_file(p, "stopwords")?;
        }
        if let Some(p) = &s.lexicon {
            require_file(p, "lexicon")?;
        }
        let scorer = s.scorer.unwrap_or_default();
        if scorer == ScorerKind::External {
            Settings::require(&s.scorer_cmd, "scorer-cmd")?;
        }
        Ok(Self {
            subject,
            corpus_paths,
            parse_mode: if s.strict.unwrap_or(false) {
                ParseMode::Strict
            } else {
                ParseMode::Lenient
            },
            model_path,
            model_format: s.model_format.unwrap_or_default(),
            normalize_vectors: s.normalize_vectors.unwrap_or(false),
            topics_path,
            stopwords_path: s.stopwords.clone(),
            noun_strategy: s.noun_strategy.unwrap_or_default(),
            lexicon_path: s.lexicon.clone(),
            scorer,
            scorer_cmd: s.scorer_cmd.clone(),
            classify: ClassifyOptions {
                mode: s.distance.unwrap_or_default(),
                normalize_length: s.normalize_length.unwrap_or(false),
            },
            format: s.format.unwrap_or_default(),
            out: s.out.clone(),
            jobs: s.jobs,
            generated_at: s.generated_at,
        })
    }
}
