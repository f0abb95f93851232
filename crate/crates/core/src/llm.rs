//! LLM clients, the replay cache and SQL extraction.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::http::JsonEndpoint;
use crate::prompt::PromptBundle;
use crate::sql::parse_sql;

pub const DEFAULT_MAX_TOKENS: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LlmError {
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("no cached completion for prompt {0}")]
    CacheMiss(String),
    #[error("cache {path}: {message}")]
    Cache { path: String, message: String },
}

pub trait LlmClient: Send + Sync {
    fn complete_text(&self, prompt: &str) -> Result<String, LlmError>;
    /// Requests sent over the network so far.
    fn network_calls(&self) -> usize;
}

/// Hex SHA-256 of the prompt text.
pub fn prompt_key(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

struct InFlight {
    limit: usize,
    busy: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut busy = self.busy.lock().expect("in-flight lock");
        while *busy >= self.limit {
            busy = self.freed.wait(busy).expect("in-flight lock");
        }
        *busy += 1;
        drop(busy);
        let out = f();
        *self.busy.lock().expect("in-flight lock") -= 1;
        self.freed.notify_one();
        out
    }
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReply,
}

#[derive(Deserialize)]
struct ChatReply {
    content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteChatConfig {
    pub url: String,
    pub model: String,
    pub max_tokens: u32,
    /// Environment variable holding the bearer token.
    pub token_env: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
    pub max_in_flight: usize,
}

/// Chat-completions endpoint, one user message, greedy decoding.
pub struct RemoteChat {
    endpoint: JsonEndpoint,
    model: String,
    max_tokens: u32,
    in_flight: InFlight,
    calls: AtomicUsize,
}

impl RemoteChat {
    pub fn new(cfg: &RemoteChatConfig) -> Self {
        let token = cfg.token_env.as_deref().and_then(|v| std::env::var(v).ok());
        RemoteChat {
            endpoint: JsonEndpoint::new(
                &cfg.url,
                Duration::from_secs(cfg.timeout_secs),
                cfg.retries,
                token,
            ),
            model: cfg.model.clone(),
            max_tokens: cfg.max_tokens,
            in_flight: InFlight {
                limit: cfg.max_in_flight.max(1),
                busy: Mutex::new(0),
                freed: Condvar::new(),
            },
            calls: AtomicUsize::new(0),
        }
    }
}

impl LlmClient for RemoteChat {
    fn complete_text(&self, prompt: &str) -> Result<String, LlmError> {
        let body = ChatRequest {
            model: &self.model,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: 0.0,
            max_tokens: self.max_tokens,
        };
        self.calls.fetch_add(1, Ordering::SeqCst);
        let resp: ChatResponse = self
            .in_flight
            .run(|| self.endpoint.post(&body))
            .map_err(|e| LlmError::Endpoint(e.to_string()))?;
        resp.choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| LlmError::Endpoint("response has no choices".into()))
    }

    fn network_calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheLine {
    key: String,
    response: String,
}

/// Completions keyed by prompt hash, stored as JSON lines. Lookups never
/// touch the network; a missing prompt is an error.
pub struct ReplayCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<String, String>>,
    writer: Mutex<Option<File>>,
}

impl ReplayCache {
    pub fn in_memory() -> Self {
        ReplayCache {
            path: None,
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
        }
    }

    /// Opens (creating if absent) a cache file.
    pub fn open(path: &Path) -> Result<Self, LlmError> {
        let err = |e: &dyn std::fmt::Display| LlmError::Cache {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut entries = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| err(&e))?;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let l: CacheLine = serde_json::from_str(line).map_err(|e| err(&e))?;
                entries.entry(l.key).or_insert(l.response);
            }
        }
        Ok(ReplayCache {
            path: Some(path.to_path_buf()),
            entries: RwLock::new(entries),
            writer: Mutex::new(None),
        })
    }

    pub fn get(&self, prompt: &str) -> Option<String> {
        self.entries
            .read()
            .expect("cache lock")
            .get(&prompt_key(prompt))
            .cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores a completion; the first response recorded for a prompt wins.
    pub fn insert(&self, prompt: &str, response: &str) -> Result<(), LlmError> {
        let key = prompt_key(prompt);
        let mut entries = self.entries.write().expect("cache lock");
        if entries.contains_key(&key) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let err = |e: std::io::Error| LlmError::Cache {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            let mut writer = self.writer.lock().expect("cache writer lock");
            if writer.is_none() {
                *writer = Some(
                    OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(path)
                        .map_err(err)?,
                );
            }
            let line = serde_json::to_string(&CacheLine {
                key: key.clone(),
                response: response.to_string(),
            })
            .expect("serializable");
            let f = writer.as_mut().expect("opened");
            writeln!(f, "{line}").map_err(err)?;
        }
        entries.insert(key, response.to_string());
        Ok(())
    }
}

impl LlmClient for ReplayCache {
    fn complete_text(&self, prompt: &str) -> Result<String, LlmError> {
        self.get(prompt)
            .ok_or_else(|| LlmError::CacheMiss(prompt_key(prompt)))
    }

    fn network_calls(&self) -> usize {
        0
    }
}

/// Serves cached completions and records new ones from `inner`.
pub struct RecordingClient<C> {
    pub inner: C,
    pub cache: ReplayCache,
}

impl<C: LlmClient> LlmClient for RecordingClient<C> {
    fn complete_text(&self, prompt: &str) -> Result<String, LlmError> {
        if let Some(hit) = self.cache.get(prompt) {
            return Ok(hit);
        }
        let response = self.inner.complete_text(prompt)?;
        self.cache.insert(prompt, &response)?;
        Ok(response)
    }

    fn network_calls(&self) -> usize {
        self.inner.network_calls()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub raw: String,
    pub sql: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompleteError {
    #[error(transparent)]
    Endpoint(#[from] LlmError),
    #[error("no SQL statement found in the response")]
    Extraction { raw: String },
}

pub fn complete(
    client: &dyn LlmClient,
    bundle: &PromptBundle,
) -> Result<Completion, CompleteError> {
    let raw = client.complete_text(&bundle.text)?;
    match extract_sql(&raw) {
        Some(sql) => Ok(Completion { raw, sql }),
        None => Err(CompleteError::Extraction { raw }),
    }
}

/// Body of the first fenced code block, or the whole text.
fn strip_fences(text: &str) -> &str {
    let Some(start) = text.find("```") else {
        return text;
    };
    let after = &text[start + 3..];
    let body = match after.find('\n') {
        Some(nl) if !after[..nl].trim().contains(' ') => &after[nl + 1..],
        _ => after,
    };
    match body.find("```") {
        Some(end) => &body[..end],
        None => body,
    }
}

/// Longest parseable statement starting at a SELECT keyword, cut at the
/// first `;` and trimmed back word by word until it parses.
pub fn extract_sql(response: &str) -> Option<String> {
    let body = strip_fences(response);
    let lower = body.to_ascii_lowercase();
    let starts = lower.match_indices("select").map(|(i, _)| i).filter(|&i| {
        let before_ok = i == 0
            || !lower.as_bytes()[i - 1].is_ascii_alphanumeric() && lower.as_bytes()[i - 1] != b'_';
        let after = lower.as_bytes().get(i + 6);
        before_ok && after.is_none_or(|c| !c.is_ascii_alphanumeric() && *c != b'_')
    });
    for start in starts {
        // A statement opened by a parenthesis belongs to it.
        let mut from = start;
        while from > 0 && body.as_bytes()[from - 1] == b'(' {
            from -= 1;
        }
        let rest = &body[from..];
        let rest = rest.split(';').next().unwrap_or(rest);
        let mut ends: Vec<usize> = rest
            .char_indices()
            .filter(|(_, c)| c.is_whitespace())
            .map(|(i, _)| i)
            .collect();
        ends.push(rest.len());
        for &end in ends.iter().rev() {
            let candidate = rest[..end].trim();
            if !candidate.is_empty() && parse_sql(candidate).is_ok() {
                return Some(candidate.split_whitespace().collect::<Vec<_>>().join(" "));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_response() {
        assert_eq!(
            extract_sql("```sql\nSELECT name FROM highschooler\n```").as_deref(),
            Some("SELECT name FROM highschooler")
        );
    }

    #[test]
    fn prose_and_terminator() {
        assert_eq!(
            extract_sql("Sure! SELECT count(*) FROM t WHERE a = 'x'; -- done").as_deref(),
            Some("SELECT count(*) FROM t WHERE a = 'x'")
        );
        assert_eq!(extract_sql("I cannot answer"), None);
    }

    #[test]
    fn replay_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let cache = ReplayCache::open(&path).unwrap();
        cache.insert("p", "SELECT 1").unwrap();
        drop(cache);
        let cache = ReplayCache::open(&path).unwrap();
        assert_eq!(cache.complete_text("p").unwrap(), "SELECT 1");
        assert!(matches!(
            cache.complete_text("q"),
            Err(LlmError::CacheMiss(_))
        ));
        assert_eq!(cache.network_calls(), 0);
    }
}
