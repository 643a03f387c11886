//! Service configuration, read from a single JSON document.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every key except the three paths has a default:
//!
//! ```json
//! {
//!   "kg_path": "toy_graph.nt",
//!   "corpus_path": "toy_corpus.jsonl",
//!   "session_dir": "sessions",
//!   "bind": "127.0.0.1",
//!   "port": 8080,
//!   "preferred_language": "en",
//!   "max_depth": 3,
//!   "temporal": { "min_year": 100, "max_year": 2100, "year_fraction": 0.5, "interval_fraction": 0.5 },
//!   "corpus": { "sentence_pattern": "[.!?](?P<gap>\\s+)[\\p{Lu}\\p{Nd}]", "min_confidence": 0.0, "context": 1 },
//!   "preview_k": 5,
//!   "preview_context": 1,
//!   "page_size": 20,
//!   "max_page_size": 200,
//!   "cors_origins": ["http://localhost:5173"]
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusConfig;
use crate::kg::{GraphConfig, Vocabulary, DEFAULT_MAX_DEPTH};
use crate::temporal::TemporalConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{key} does not exist: {path}")]
    MissingPath { key: &'static str, path: PathBuf },
    #[error("port must be in 1..=65535")]
    InvalidPort,
    #[error("{0}")]
    Invalid(String),
}

fn default_bind() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8080
}

fn default_language() -> String {
    "en".into()
}

fn default_max_depth() -> usize {
    DEFAULT_MAX_DEPTH
}

fn default_preview_k() -> usize {
    5
}

fn default_one() -> usize {
    1
}

fn default_page_size() -> usize {
    20
}

fn default_max_page_size() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub kg_path: PathBuf,
    pub corpus_path: PathBuf,
    pub session_dir: PathBuf,
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_language")]
    pub preferred_language: String,
    #[serde(default)]
    pub vocabulary: Vocabulary,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default)]
    pub temporal: TemporalConfig,
    #[serde(default)]
    pub corpus: CorpusConfig,
    #[serde(default = "default_preview_k")]
    pub preview_k: usize,
    #[serde(default = "default_one")]
    pub preview_context: usize,
    #[serde(default = "default_page_size")]
    pub page_size: usize,
    #[serde(default = "default_max_page_size")]
    pub max_page_size: usize,
    #[serde(default)]
    pub cors_origins: Vec<String>,
}

/// Tunables the engine needs at query time.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineSettings {
    pub max_depth: usize,
    pub temporal: TemporalConfig,
    pub preview_k: usize,
    pub preview_context: usize,
    pub page_size: usize,
    pub max_page_size: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        EngineSettings {
            max_depth: DEFAULT_MAX_DEPTH,
            temporal: TemporalConfig::default(),
            preview_k: default_preview_k(),
            preview_context: 1,
            page_size: default_page_size(),
            max_page_size: default_max_page_size(),
        }
    }
}

impl ServiceConfig {
    /// Config with defaults for everything but the paths.
    pub fn with_paths(
        kg_path: impl Into<PathBuf>,
        corpus_path: impl Into<PathBuf>,
        session_dir: impl Into<PathBuf>,
    ) -> Self {
        ServiceConfig {
            kg_path: kg_path.into(),
            corpus_path: corpus_path.into(),
            session_dir: session_dir.into(),
            bind: default_bind(),
            port: default_port(),
            preferred_language: default_language(),
            vocabulary: Vocabulary::default(),
            max_depth: default_max_depth(),
            temporal: TemporalConfig::default(),
            corpus: CorpusConfig::default(),
            preview_k: default_preview_k(),
            preview_context: 1,
            page_size: default_page_size(),
            max_page_size: default_max_page_size(),
            cors_origins: Vec::new(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let mut config: ServiceConfig = serde_json::from_slice(&bytes)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.kg_path, &mut config.corpus_path, &mut config.session_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.port == 0 {
            return Err(ConfigError::InvalidPort);
        }
        for (key, path) in [("kg_path", &self.kg_path), ("corpus_path", &self.corpus_path)] {
            if !path.is_file() {
                return Err(ConfigError::MissingPath { key, path: path.clone() });
            }
        }
        let t = &self.temporal;
        if t.min_year > t.max_year {
            return Err(ConfigError::Invalid("temporal.min_year exceeds temporal.max_year".into()));
        }
        if self.page_size == 0 || self.page_size > self.max_page_size {
            return Err(ConfigError::Invalid("page_size must be in 1..=max_page_size".into()));
        }
        if self.preview_k == 0 {
            return Err(ConfigError::Invalid("preview_k must be at least 1".into()));
        }
        Ok(())
    }

    pub fn graph_config(&self) -> GraphConfig {
        GraphConfig { vocabulary: self.vocabulary.clone(), preferred_language: self.preferred_language.clone() }
    }

    pub fn engine_settings(&self) -> EngineSettings {
        EngineSettings {
            max_depth: self.max_depth,
            temporal: self.temporal,
            preview_k: self.preview_k,
            preview_context: self.preview_context,
            page_size: self.page_size,
            max_page_size: self.max_page_size,
        }
    }
}
