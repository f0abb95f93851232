//! Index of (question, SQL) examples with question retrieval and AST re-ranking.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::http::JsonEndpoint;
use crate::sql::{
    diff_trees, normalize_sql, similarity_of, MatcherConfig, NormalizationMode, NormalizedAst,
    SqlError,
};
use crate::text::tokenize;

pub const DEFAULT_EXAMPLES: usize = 5;
pub const DEFAULT_POOL: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExampleError {
    #[error("example {id}: {source}")]
    Parse { id: String, source: SqlError },
    #[error("embedder unavailable: {0}")]
    EmbedderUnavailable(String),
    #[error("embedding of {id} has dimension {got}, expected {expected}")]
    Dimension {
        id: String,
        got: usize,
        expected: usize,
    },
    #[error("embedder {found} does not match index embedder {expected}")]
    EmbedderMismatch { expected: String, found: String },
    #[error("index is empty")]
    EmptyIndex,
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ExampleError {
    ExampleError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Turns texts into unit vectors. `key` identifies the text for backends
/// that look vectors up instead of computing them.
pub trait Embedder: Send + Sync {
    fn id(&self) -> &str;
    fn embed(&self, key: &str, text: &str) -> Result<Vec<f32>, ExampleError>;
}

pub fn l2_normalize(v: &mut [f32]) {
    let norm = v
        .iter()
        .map(|x| (*x as f64) * (*x as f64))
        .sum::<f64>()
        .sqrt();
    if norm > 0.0 {
        for x in v {
            *x = (*x as f64 / norm) as f32;
        }
    }
}

/// Signed feature hashing of stemmed tokens; needs no model files.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    id: String,
    dim: usize,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        HashingEmbedder {
            id: format!("hashing-{dim}"),
            dim: dim.max(1),
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

impl Embedder for HashingEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, _key: &str, text: &str) -> Result<Vec<f32>, ExampleError> {
        let mut v = vec![0f32; self.dim];
        let mut tokens = tokenize(text);
        if tokens.is_empty() {
            tokens.push(String::new());
        }
        for t in &tokens {
            let h = fnv1a(t);
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            v[(h % self.dim as u64) as usize] += sign;
        }
        if v.iter().all(|x| *x == 0.0) {
            v[0] = 1.0;
        }
        l2_normalize(&mut v);
        Ok(v)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VectorLine {
    id: String,
    vector: Vec<f32>,
}

/// Vectors read from a JSON-lines file of `{id, vector}`.
#[derive(Debug, Clone)]
pub struct PrecomputedEmbedder {
    id: String,
    vectors: HashMap<String, Vec<f32>>,
}

impl PrecomputedEmbedder {
    pub fn from_jsonl(id: &str, path: &Path) -> Result<Self, ExampleError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut vectors = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut v: VectorLine = serde_json::from_str(line).map_err(|e| io_err(path, e))?;
            l2_normalize(&mut v.vector);
            vectors.insert(v.id, v.vector);
        }
        Ok(PrecomputedEmbedder {
            id: id.to_string(),
            vectors,
        })
    }

    pub fn from_vectors(id: &str, vectors: impl IntoIterator<Item = (String, Vec<f32>)>) -> Self {
        PrecomputedEmbedder {
            id: id.to_string(),
            vectors: vectors
                .into_iter()
                .map(|(k, mut v)| {
                    l2_normalize(&mut v);
                    (k, v)
                })
                .collect(),
        }
    }
}

impl Embedder for PrecomputedEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, key: &str, _text: &str) -> Result<Vec<f32>, ExampleError> {
        self.vectors
            .get(key)
            .cloned()
            .ok_or_else(|| ExampleError::EmbedderUnavailable(format!("no vector for {key}")))
    }
}

/// Embedding endpoint speaking `{model, input}` to `{data: [{embedding}]}`.
#[derive(Debug, Clone)]
pub struct RemoteEmbedder {
    id: String,
    model: String,
    endpoint: JsonEndpoint,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    input: [&'a str; 1],
}

#[derive(Deserialize)]
struct EmbedResponse {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    embedding: Vec<f32>,
}

impl RemoteEmbedder {
    pub fn new(
        url: &str,
        model: &str,
        token: Option<String>,
        timeout: Duration,
        retries: u32,
    ) -> Self {
        RemoteEmbedder {
            id: format!("remote:{model}"),
            model: model.to_string(),
            endpoint: JsonEndpoint::new(url, timeout, retries, token),
        }
    }
}

impl Embedder for RemoteEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn embed(&self, _key: &str, text: &str) -> Result<Vec<f32>, ExampleError> {
        let resp: EmbedResponse = self
            .endpoint
            .post(&EmbedRequest {
                model: &self.model,
                input: [text],
            })
            .map_err(|e| ExampleError::EmbedderUnavailable(e.to_string()))?;
        let mut v = resp
            .data
            .into_iter()
            .next()
            .ok_or_else(|| ExampleError::EmbedderUnavailable("empty embedding response".into()))?
            .embedding;
        l2_normalize(&mut v);
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExamplePair {
    pub id: String,
    pub question: String,
    pub sql: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub db_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRecord {
    pub id: String,
    pub question: String,
    pub sql: String,
    pub db_id: Option<String>,
    pub embedding: Vec<f32>,
    /// Cross-domain normalized tree of `sql`.
    pub normalized_ast: NormalizedAst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleIndex {
    pub records: Vec<ExampleRecord>,
    pub embedder_id: String,
    pub dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenExample {
    pub id: String,
    pub question: String,
    pub sql: String,
    pub ast_score: f64,
    /// 0-based position in the question-similarity ranking.
    pub question_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// In prompt order: ascending AST score, most similar last.
    pub chosen: Vec<ChosenExample>,
    pub pool_size: usize,
    /// Set when the approximated query did not parse and the selection used
    /// question similarity only.
    pub question_only: bool,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingHeader {
    dim: usize,
    count: usize,
    embedder_id: String,
}

const RECORDS_FILE: &str = "records.jsonl";
const EMBEDDINGS_FILE: &str = "embeddings.bin";

fn cross_domain(id: &str, sql: &str) -> Result<NormalizedAst, ExampleError> {
    normalize_sql(sql, NormalizationMode::CrossDomain).map_err(|source| ExampleError::Parse {
        id: id.to_string(),
        source,
    })
}

impl ExampleIndex {
    pub fn build(pairs: &[ExamplePair], embedder: &dyn Embedder) -> Result<Self, ExampleError> {
        let records = pairs
            .par_iter()
            .map(|p| {
                let normalized_ast = cross_domain(&p.id, &p.sql)?;
                let embedding = embedder.embed(&p.id, &p.question)?;
                Ok(ExampleRecord {
                    id: p.id.clone(),
                    question: p.question.clone(),
                    sql: p.sql.clone(),
                    db_id: p.db_id.clone(),
                    embedding,
                    normalized_ast,
                })
            })
            .collect::<Result<Vec<_>, ExampleError>>()?;
        let dim = records.first().map_or(0, |r| r.embedding.len());
        if let Some(r) = records.iter().find(|r| r.embedding.len() != dim) {
            return Err(ExampleError::Dimension {
                id: r.id.clone(),
                got: r.embedding.len(),
                expected: dim,
            });
        }
        Ok(ExampleIndex {
            records,
            embedder_id: embedder.id().to_string(),
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn save(&self, dir: &Path) -> Result<(), ExampleError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let path = dir.join(RECORDS_FILE);
        let mut out = String::new();
        for r in &self.records {
            let pair = ExamplePair {
                id: r.id.clone(),
                question: r.question.clone(),
                sql: r.sql.clone(),
                db_id: r.db_id.clone(),
            };
            out.push_str(&serde_json::to_string(&pair).expect("serializable"));
            out.push('\n');
        }
        fs::write(&path, out).map_err(|e| io_err(&path, e))?;

        let path = dir.join(EMBEDDINGS_FILE);
        let header = EmbeddingHeader {
            dim: self.dim,
            count: self.records.len(),
            embedder_id: self.embedder_id.clone(),
        };
        let mut bytes = serde_json::to_vec(&header).expect("serializable");
        bytes.push(b'\n');
        for r in &self.records {
            for x in &r.embedding {
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        f.write_all(&bytes).map_err(|e| io_err(&path, e))
    }

    pub fn load(dir: &Path) -> Result<Self, ExampleError> {
        let path = dir.join(RECORDS_FILE);
        let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
        let pairs = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<ExamplePair>(l).map_err(|e| io_err(&path, e)))
            .collect::<Result<Vec<_>, _>>()?;

        let path = dir.join(EMBEDDINGS_FILE);
        let f = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
        let mut reader = BufReader::new(f);
        let mut line = String::new();
        reader.read_line(&mut line).map_err(|e| io_err(&path, e))?;
        let header: EmbeddingHeader = serde_json::from_str(&line).map_err(|e| io_err(&path, e))?;
        if header.count != pairs.len() {
            return Err(io_err(
                &path,
                format!("{} vectors for {} records", header.count, pairs.len()),
            ));
        }
        let mut raw = Vec::new();
        reader.read_to_end(&mut raw).map_err(|e| io_err(&path, e))?;
        if raw.len() != header.count * header.dim * 4 {
            return Err(io_err(&path, "matrix size does not match header"));
        }
        let floats: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let records = pairs
            .into_par_iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(ExampleRecord {
                    normalized_ast: cross_domain(&p.id, &p.sql)?,
                    embedding: floats[i * header.dim..(i + 1) * header.dim].to_vec(),
                    id: p.id,
                    question: p.question,
                    sql: p.sql,
                    db_id: p.db_id,
                })
            })
            .collect::<Result<Vec<_>, ExampleError>>()?;
        Ok(ExampleIndex {
            records,
            embedder_id: header.embedder_id,
            dim: header.dim,
        })
    }

    /// Embeds a question with `embedder`, which must be the index's embedder.
    pub fn embed_query(
        &self,
        embedder: &dyn Embedder,
        key: &str,
        question: &str,
    ) -> Result<Vec<f32>, ExampleError> {
        if embedder.id() != self.embedder_id {
            return Err(ExampleError::EmbedderMismatch {
                expected: self.embedder_id.clone(),
                found: embedder.id().to_string(),
            });
        }
        embedder.embed(key, question)
    }

    /// Record indices and cosine similarities, best first, ties by id.
    pub fn retrieve_by_vector(
        &self,
        query: &[f32],
        pool: usize,
    ) -> Result<Vec<(usize, f64)>, ExampleError> {
        self.retrieve_where(query, pool, |_| true)
    }

    /// As [`Self::retrieve_by_vector`], over the records accepted by `keep`.
    pub fn retrieve_where(
        &self,
        query: &[f32],
        pool: usize,
        keep: impl Fn(&ExampleRecord) -> bool,
    ) -> Result<Vec<(usize, f64)>, ExampleError> {
        if self.records.is_empty() {
            return Err(ExampleError::EmptyIndex);
        }
        if query.len() != self.dim {
            return Err(ExampleError::Dimension {
                id: "query".into(),
                got: query.len(),
                expected: self.dim,
            });
        }
        let mut ranked: Vec<(usize, f64)> = self
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| keep(r))
            .map(|(i, r)| {
                let dot: f64 = r
                    .embedding
                    .iter()
                    .zip(query)
                    .map(|(a, b)| *a as f64 * *b as f64)
                    .sum();
                (i, dot)
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.records[a.0].id.cmp(&self.records[b.0].id))
        });
        ranked.truncate(pool);
        Ok(ranked)
    }

    pub fn retrieve_by_question(
        &self,
        embedder: &dyn Embedder,
        key: &str,
        question: &str,
        pool: usize,
    ) -> Result<Vec<&ExampleRecord>, ExampleError> {
        let v = self.embed_query(embedder, key, question)?;
        Ok(self
            .retrieve_by_vector(&v, pool)?
            .into_iter()
            .map(|(i, _)| &self.records[i])
            .collect())
    }

    /// Re-ranks the `pool` nearest questions by AST similarity to the
    /// approximated query and keeps the best `e`.
    pub fn select_examples(
        &self,
        query: &[f32],
        approx_sql: &str,
        e: usize,
        pool: usize,
    ) -> Result<SelectionResult, ExampleError> {
        self.select_examples_where(query, approx_sql, e, pool, |_| true)
    }

    /// As [`Self::select_examples`], over the records accepted by `keep`.
    pub fn select_examples_where(
        &self,
        query: &[f32],
        approx_sql: &str,
        e: usize,
        pool: usize,
        keep: impl Fn(&ExampleRecord) -> bool,
    ) -> Result<SelectionResult, ExampleError> {
        let candidates = self.retrieve_where(query, pool, keep)?;
        let pool_size = candidates.len();
        let approx = normalize_sql(approx_sql, NormalizationMode::CrossDomain).ok();
        let cfg = MatcherConfig::default();
        let mut scored: Vec<ChosenExample> = candidates
            .par_iter()
            .enumerate()
            .map(|(rank, &(i, _))| {
                let r = &self.records[i];
                let ast_score = approx.as_ref().map_or(0.0, |a| {
                    similarity_of(&diff_trees(&a.root, &r.normalized_ast.root, &cfg)).score
                });
                ChosenExample {
                    id: r.id.clone(),
                    question: r.question.clone(),
                    sql: r.sql.clone(),
                    ast_score,
                    question_rank: rank,
                }
            })
            .collect();
        if approx.is_some() {
            scored.sort_by(|a, b| {
                b.ast_score
                    .total_cmp(&a.ast_score)
                    .then(a.question_rank.cmp(&b.question_rank))
                    .then_with(|| a.id.cmp(&b.id))
            });
        }
        scored.truncate(e);
        scored.reverse();
        Ok(SelectionResult {
            chosen: scored,
            pool_size,
            question_only: approx.is_none(),
        })
    }
}
