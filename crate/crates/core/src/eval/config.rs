use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bm25::{Bm25Params, IdfFloor};
use crate::schema::SelectionMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Spider-layout dataset directory.
    pub dataset: PathBuf,
    #[serde(default = "default_samples")]
    pub samples: String,
    /// Example index directory; without one, prompts carry no examples.
    #[serde(default)]
    pub index: Option<PathBuf>,
    pub output: PathBuf,
    #[serde(default)]
    pub strict: bool,
    /// Skips schema and value selection, for questions in another language.
    #[serde(default)]
    pub cross_lingual: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Fraction of failed samples above which the run counts as failed.
    #[serde(default = "default_failure_fraction")]
    pub max_failure_fraction: f64,
    #[serde(default)]
    pub approximator: ApproximatorConfig,
    #[serde(default)]
    pub selection: SelectionConfig,
    #[serde(default)]
    pub bm25: Bm25Config,
    #[serde(default)]
    pub values: ValuesConfig,
    #[serde(default)]
    pub examples: ExamplesConfig,
    #[serde(default)]
    pub split: SplitConfig,
    pub llm: LlmConfig,
}

fn default_samples() -> String {
    "dev.json".into()
}

fn default_workers() -> usize {
    4
}

fn default_failure_fraction() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproximatorMode {
    #[default]
    Oracle,
    File,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApproximatorConfig {
    #[serde(default)]
    pub mode: ApproximatorMode,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

impl Default for ApproximatorConfig {
    fn default() -> Self {
        ApproximatorConfig {
            mode: ApproximatorMode::Oracle,
            path: None,
            url: None,
            timeout_secs: default_timeout(),
            retries: default_retries(),
        }
    }
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> u32 {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionKind {
    Bm25Topk,
    ApproxOnly,
    #[default]
    HybridDynamic,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    #[serde(default)]
    pub mode: SelectionKind,
    /// Depth for `bm25-topk`.
    #[serde(default = "default_k")]
    pub k: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            mode: SelectionKind::default(),
            k: default_k(),
        }
    }
}

fn default_k() -> usize {
    10
}

impl SelectionConfig {
    pub fn mode(&self) -> SelectionMode {
        match self.mode {
            SelectionKind::Bm25Topk => SelectionMode::Bm25TopK(self.k),
            SelectionKind::ApproxOnly => SelectionMode::ApproxOnly,
            SelectionKind::HybridDynamic => SelectionMode::HybridDynamic,
            SelectionKind::Full => SelectionMode::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bm25Config {
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_b")]
    pub b: f64,
    /// Negative IDF values become this fraction of the mean IDF; zero when absent.
    #[serde(default)]
    pub idf_epsilon: Option<f64>,
}

impl Default for Bm25Config {
    fn default() -> Self {
        Bm25Config {
            k1: default_k1(),
            b: default_b(),
            idf_epsilon: None,
        }
    }
}

fn default_k1() -> f64 {
    1.5
}

fn default_b() -> f64 {
    0.75
}

impl Bm25Config {
    pub fn params(&self) -> Bm25Params {
        Bm25Params {
            k1: self.k1,
            b: self.b,
            idf_floor: self
                .idf_epsilon
                .map_or(IdfFloor::Zero, IdfFloor::MeanFraction),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuesConfig {
    #[serde(default = "default_topk")]
    pub topk: usize,
    #[serde(default = "default_max_chars")]
    pub max_chars: usize,
    /// Distinct values kept per column when reading the sidecar.
    #[serde(default = "default_cap")]
    pub cap: usize,
}

impl Default for ValuesConfig {
    fn default() -> Self {
        ValuesConfig {
            topk: default_topk(),
            max_chars: default_max_chars(),
            cap: default_cap(),
        }
    }
}

fn default_topk() -> usize {
    crate::values::DEFAULT_VALUES_PER_COLUMN
}

fn default_max_chars() -> usize {
    crate::prompt::DEFAULT_MAX_VALUE_CHARS
}

fn default_cap() -> usize {
    crate::schema::DEFAULT_VALUE_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmbedderKind {
    #[default]
    Hashing,
    Precomputed,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExamplesConfig {
    #[serde(default = "default_e")]
    pub e: usize,
    #[serde(default = "default_pool")]
    pub pool: usize,
    /// Leave out examples written against the test database.
    #[serde(default)]
    pub exclude_same_db: bool,
    #[serde(default)]
    pub embedder: EmbedderKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Vector file for the precomputed embedder, covering records and samples.
    #[serde(default)]
    pub vectors: Option<PathBuf>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub token_env: Option<String>,
}

impl Default for ExamplesConfig {
    fn default() -> Self {
        ExamplesConfig {
            e: default_e(),
            pool: default_pool(),
            exclude_same_db: false,
            embedder: EmbedderKind::Hashing,
            dim: default_dim(),
            vectors: None,
            url: None,
            model: None,
            token_env: None,
        }
    }
}

fn default_e() -> usize {
    crate::example_store::DEFAULT_EXAMPLES
}

fn default_pool() -> usize {
    crate::example_store::DEFAULT_POOL
}

fn default_dim() -> usize {
    256
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_r")]
    pub r: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { r: default_r() }
    }
}

fn default_r() -> usize {
    crate::split::DEFAULT_SPLIT_WIDTH
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlmBackend {
    /// Cached completions only.
    #[default]
    Replay,
    /// Remote endpoint without caching.
    Remote,
    /// Remote endpoint behind the cache, recording misses.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmConfig {
    #[serde(default)]
    pub backend: LlmBackend,
    #[serde(default)]
    pub cache: Option<PathBuf>,
    #[serde(default)]
    pub url: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

fn default_max_tokens() -> u32 {
    crate::llm::DEFAULT_MAX_TOKENS
}

fn default_token_env() -> String {
    "LLM_API_KEY".into()
}

fn default_in_flight() -> usize {
    4
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error("config: {0}")]
    Invalid(String),
}

impl RunConfig {
    /// Reads a TOML config; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        fix(&mut self.output);
        for p in [
            self.index.as_mut(),
            self.approximator.path.as_mut(),
            self.examples.vectors.as_mut(),
            self.llm.cache.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let need = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::Invalid(msg.into()))
            }
        };
        need(self.workers >= 1, "workers must be at least 1")?;
        need(self.split.r >= 1, "split.r must be at least 1")?;
        match self.approximator.mode {
            ApproximatorMode::File => need(
                self.approximator.path.is_some(),
                "approximator.path is required for mode = \"file\"",
            )?,
            ApproximatorMode::Remote => need(
                self.approximator.url.is_some(),
                "approximator.url is required for mode = \"remote\"",
            )?,
            ApproximatorMode::Oracle => {}
        }
        match self.llm.backend {
            LlmBackend::Replay => need(
                self.llm.cache.is_some(),
                "llm.cache is required for backend = \"replay\"",
            )?,
            LlmBackend::Record => {
                need(
                    self.llm.cache.is_some(),
                    "llm.cache is required for backend = \"record\"",
                )?;
                need(
                    self.llm.url.is_some() && self.llm.model.is_some(),
                    "llm.url and llm.model are required",
                )?;
            }
            LlmBackend::Remote => need(
                self.llm.url.is_some() && self.llm.model.is_some(),
                "llm.url and llm.model are required",
            )?,
        }
        match self.examples.embedder {
            EmbedderKind::Precomputed => need(
                self.examples.vectors.is_some(),
                "examples.vectors is required for the precomputed embedder",
            )?,
            EmbedderKind::Remote => need(
                self.examples.url.is_some() && self.examples.model.is_some(),
                "examples.url and examples.model are required",
            )?,
            EmbedderKind::Hashing => {}
        }
        Ok(())
    }
}
