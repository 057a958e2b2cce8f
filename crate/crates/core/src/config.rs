//! Run configuration: flat `key = value` text with section prefixes.
//!
//! ```text
//! # comments start with '#'
//! lang.source = fr
//! oracle.backend = local
//! oracle.index = docs.tsv
//! phase2.noun_jaccard_min = 0.05
//! ```
//!
//! The API key is never read from or written to the file; it comes from the
//! `LEXIFORGE_ORACLE_KEY` environment variable.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::extraction::ExtractionConfig;
use crate::oracle::HttpConfig;
use crate::pipeline::PipelineConfig;

pub const API_KEY_ENV: &str = "LEXIFORGE_ORACLE_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Http,
    Local,
    Fixture,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Http => "http",
            BackendKind::Local => "local",
            BackendKind::Fixture => "fixture",
        }
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http" => Ok(BackendKind::Http),
            "local" => Ok(BackendKind::Local),
            "fixture" => Ok(BackendKind::Fixture),
            other => Err(format!("unknown backend {other:?} (http, local, fixture)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSettings {
    pub backend: BackendKind,
    /// Answer from the cache only; any miss is an error.
    pub offline: bool,
    pub cache: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub rate_per_sec: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub page_size: usize,
    pub timeout_secs: u64,
    pub parallelism: usize,
    /// Document file for the local backend.
    pub index: Option<PathBuf>,
    /// Response file for the fixture backend.
    pub fixture: Option<PathBuf>,
    pub api_key: Option<String>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            backend: BackendKind::Http,
            offline: false,
            cache: None,
            endpoint: None,
            rate_per_sec: 1.0,
            max_retries: 3,
            backoff_ms: 500,
            page_size: 50,
            timeout_secs: 30,
            parallelism: crate::oracle::DEFAULT_PARALLELISM,
            index: None,
            fixture: None,
            api_key: None,
        }
    }
}

impl OracleSettings {
    pub fn http_config(&self) -> Option<HttpConfig> {
        let endpoint = self.endpoint.clone()?;
        Some(HttpConfig {
            endpoint,
            api_key: self.api_key.clone(),
            rate_per_sec: self.rate_per_sec,
            max_retries: self.max_retries,
            backoff: Duration::from_millis(self.backoff_ms),
            page_size: self.page_size,
            timeout: Duration::from_secs(self.timeout_secs),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub output: PathBuf,
    pub source_lang: String,
    pub target_lang: String,
    /// Optional tagger lexicons replacing the bundled ones.
    pub source_lexicon: Option<PathBuf>,
    pub target_lexicon: Option<PathBuf>,
    pub source_stopwords: Option<PathBuf>,
    pub target_stopwords: Option<PathBuf>,
    pub oracle: OracleSettings,
    pub extraction: ExtractionConfig,
    pub pipeline: PipelineConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            dictionary: None,
            output: PathBuf::from("out"),
            source_lang: "fr".into(),
            target_lang: "en".into(),
            source_lexicon: None,
            target_lexicon: None,
            source_stopwords: None,
            target_stopwords: None,
            oracle: OracleSettings::default(),
            extraction: ExtractionConfig::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{key}: {reason}")]
    Value { key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_string(),
        reason: format!("{raw:?}: {e}"),
    })
}

fn parse_opt<T: FromStr>(key: &str, raw: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    if raw == "none" || raw.is_empty() {
        Ok(None)
    } else {
        parse_value(key, raw).map(Some)
    }
}

fn opt_path(raw: &str) -> Option<PathBuf> {
    (!raw.is_empty() && raw != "none").then(|| PathBuf::from(raw))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map_or("none".into(), |p| p.display().to_string())
}

fn show_opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or("none".into(), |v| v.to_string())
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ConfigError> {
        let raw = raw.trim();
        let o = &mut self.oracle;
        let e = &mut self.extraction;
        let p = &mut self.pipeline;
        match key {
            "corpus" => self.corpus = opt_path(raw),
            "dictionary" => self.dictionary = opt_path(raw),
            "output" => self.output = PathBuf::from(raw),
            "lang.source" => self.source_lang = raw.to_string(),
            "lang.target" => self.target_lang = raw.to_string(),
            "tagger.source_lexicon" => self.source_lexicon = opt_path(raw),
            "tagger.target_lexicon" => self.target_lexicon = opt_path(raw),
            "stopwords.source" => self.source_stopwords = opt_path(raw),
            "stopwords.target" => self.target_stopwords = opt_path(raw),
            "oracle.backend" => o.backend = parse_value(key, raw)?,
            "oracle.offline" => o.offline = parse_value(key, raw)?,
            "oracle.cache" => o.cache = opt_path(raw),
            "oracle.endpoint" => o.endpoint = (raw != "none" && !raw.is_empty()).then(|| raw.to_string()),
            "oracle.rate_per_sec" => o.rate_per_sec = parse_value(key, raw)?,
            "oracle.max_retries" => o.max_retries = parse_value(key, raw)?,
            "oracle.backoff_ms" => o.backoff_ms = parse_value(key, raw)?,
            "oracle.page_size" => o.page_size = parse_value(key, raw)?,
            "oracle.timeout_secs" => o.timeout_secs = parse_value(key, raw)?,
            "oracle.parallelism" => o.parallelism = parse_value(key, raw)?,
            "oracle.index" => o.index = opt_path(raw),
            "oracle.fixture" => o.fixture = opt_path(raw),
            "extraction.min_corpus_freq" => e.min_corpus_freq = parse_value(key, raw)?,
            "extraction.min_literal_freq" => e.min_literal_freq = parse_value(key, raw)?,
            "extraction.min_article_freq" => e.min_article_freq = parse_value(key, raw)?,
            "extraction.max_ulcs" => e.max_ulcs = parse_opt(key, raw)?,
            "phase1.divisor" => p.phase1.divisor = parse_value(key, raw)?,
            "phase1.use_an" => p.phase1.use_an = parse_value(key, raw)?,
            "phase2.noun_jaccard_min" => p.phase2.noun_jaccard_min = parse_value(key, raw)?,
            "phase2.adj_jaccard_min" => p.phase2.adj_jaccard_min = parse_value(key, raw)?,
            "phase2.pair_top_k" => p.phase2.pair_top_k = parse_opt(key, raw)?,
            "phase2.snippet_limit" => p.phase2.snippet_limit = parse_value(key, raw)?,
            "phase2.world_size" => p.phase2.world_size = parse_value(key, raw)?,
            "phase3.snippet_limit" => p.phase3.snippet_limit = parse_value(key, raw)?,
            "phase3.top_k" => p.phase3.top_k = parse_value(key, raw)?,
            "phase3.min_pair_freq" => p.phase3.min_pair_freq = parse_value(key, raw)?,
            "phase3.exclude_target_stopwords" => {
                p.phase3.exclude_target_stopwords = parse_value(key, raw)?
            }
            "oracle.api_key" => {
                return Err(ConfigError::Value {
                    key: key.into(),
                    reason: format!("set the key through {API_KEY_ENV}"),
                })
            }
            _ => {
                return Err(ConfigError::Value {
                    key: key.into(),
                    reason: "unknown key".into(),
                })
            }
        }
        Ok(())
    }

    /// Parses settings on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        config.apply(text)?;
        Ok(config)
    }

    /// Parses settings on top of the current values.
    pub fn apply(&mut self, text: &str) -> Result<(), ConfigError> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    reason: "expected key = value".into(),
                });
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Every setting except the API key, in a fixed order.
    pub fn dump(&self) -> String {
        let o = &self.oracle;
        let e = &self.extraction;
        let p = &self.pipeline;
        let rows: Vec<(&str, String)> = vec![
            ("corpus", show_path(&self.corpus)),
            ("dictionary", show_path(&self.dictionary)),
            ("output", self.output.display().to_string()),
            ("lang.source", self.source_lang.clone()),
            ("lang.target", self.target_lang.clone()),
            ("tagger.source_lexicon", show_path(&self.source_lexicon)),
            ("tagger.target_lexicon", show_path(&self.target_lexicon)),
            ("stopwords.source", show_path(&self.source_stopwords)),
            ("stopwords.target", show_path(&self.target_stopwords)),
            ("oracle.backend", o.backend.as_str().into()),
            ("oracle.offline", o.offline.to_string()),
            ("oracle.cache", show_path(&o.cache)),
            ("oracle.endpoint", show_opt(&o.endpoint)),
            ("oracle.rate_per_sec", o.rate_per_sec.to_string()),
            ("oracle.max_retries", o.max_retries.to_string()),
            ("oracle.backoff_ms", o.backoff_ms.to_string()),
            ("oracle.page_size", o.page_size.to_string()),
            ("oracle.timeout_secs", o.timeout_secs.to_string()),
            ("oracle.parallelism", o.parallelism.to_string()),
            ("oracle.index", show_path(&o.index)),
            ("oracle.fixture", show_path(&o.fixture)),
            ("extraction.min_corpus_freq", e.min_corpus_freq.to_string()),
            ("extraction.min_literal_freq", e.min_literal_freq.to_string()),
            ("extraction.min_article_freq", e.min_article_freq.to_string()),
            ("extraction.max_ulcs", show_opt(&e.max_ulcs)),
            ("phase1.divisor", p.phase1.divisor.to_string()),
            ("phase1.use_an", p.phase1.use_an.to_string()),
            ("phase2.noun_jaccard_min", p.phase2.noun_jaccard_min.to_string()),
            ("phase2.adj_jaccard_min", p.phase2.adj_jaccard_min.to_string()),
            ("phase2.pair_top_k", show_opt(&p.phase2.pair_top_k)),
            ("phase2.snippet_limit", p.phase2.snippet_limit.to_string()),
            ("phase2.world_size", p.phase2.world_size.to_string()),
            ("phase3.snippet_limit", p.phase3.snippet_limit.to_string()),
            ("phase3.top_k", p.phase3.top_k.to_string()),
            ("phase3.min_pair_freq", p.phase3.min_pair_freq.to_string()),
            (
                "phase3.exclude_target_stopwords",
                p.phase3.exclude_target_stopwords.to_string(),
            ),
        ];
        let mut s = String::new();
        for (k, v) in rows {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Reads the API key from the environment if set.
    pub fn apply_env(&mut self) {
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            if !key.is_empty() {
                self.oracle.api_key = Some(key);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let p = &self.pipeline;
        for (name, v) in [
            ("phase2.noun_jaccard_min", p.phase2.noun_jaccard_min),
            ("phase2.adj_jaccard_min", p.phase2.adj_jaccard_min),
            ("oracle.rate_per_sec", self.oracle.rate_per_sec),
        ] {
            if !v.is_finite() || v < 0.0 {
                return invalid(format!("{name} must be a non-negative number, got {v}"));
            }
        }
        if p.phase1.divisor == 0 {
            return invalid("phase1.divisor must be positive".into());
        }
        if self.oracle.parallelism == 0 {
            return invalid("oracle.parallelism must be positive".into());
        }
        if self.oracle.page_size == 0 {
            return invalid("oracle.page_size must be positive".into());
        }
        if let Some(n) = p.only_phase {
            if !(1..=3).contains(&n) {
                return invalid(format!("phase restriction must be 1, 2 or 3, got {n}"));
            }
        }
        if self.source_lang.is_empty() || self.target_lang.is_empty() {
            return invalid("language codes must not be empty".into());
        }
        if !self.oracle.offline {
            match self.oracle.backend {
                BackendKind::Http if self.oracle.endpoint.is_none() => {
                    return invalid("oracle.backend = http needs oracle.endpoint".into())
                }
                BackendKind::Local if self.oracle.index.is_none() => {
                    return invalid("oracle.backend = local needs oracle.index".into())
                }
                BackendKind::Fixture if self.oracle.fixture.is_none() => {
                    return invalid("oracle.backend = fixture needs oracle.fixture".into())
                }
                _ => {}
            }
        } else if self.oracle.cache.is_none() {
            return invalid("offline mode needs oracle.cache".into());
        }
        Ok(())
    }
}
