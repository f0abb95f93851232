//! Sources of approximated queries.

use std::collections::HashMap;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::http::JsonEndpoint;
use crate::schema::{ColumnId, SchemaCatalog};
use crate::split::{
    aggregate_labels, split_catalog, SchemaSplit, SplitError, SplitLabeling, SspLabeling,
};

pub struct ApproxRequest<'a> {
    pub sample_id: &'a str,
    pub question: &'a str,
    pub catalog: &'a SchemaCatalog,
    pub gold_sql: Option<&'a str>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApproxError {
    #[error("approximator unavailable: {0}")]
    Unavailable(String),
    #[error("no approximated query for sample {0}")]
    LookupMiss(String),
    #[error(transparent)]
    Split(#[from] SplitError),
}

pub trait Approximator: Send + Sync {
    fn approximate(&self, req: &ApproxRequest<'_>) -> Result<String, ApproxError>;
}

/// Returns the gold query.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleApproximator;

impl Approximator for OracleApproximator {
    fn approximate(&self, req: &ApproxRequest<'_>) -> Result<String, ApproxError> {
        req.gold_sql.map(str::to_string).ok_or_else(|| {
            ApproxError::Unavailable(format!("sample {} has no gold query", req.sample_id))
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionLine {
    pub sample_id: String,
    pub sql: String,
}

/// Precomputed predictions keyed by sample id.
#[derive(Debug, Clone, Default)]
pub struct FileApproximator {
    predictions: HashMap<String, String>,
}

impl FileApproximator {
    pub fn from_jsonl(path: &Path) -> Result<Self, ApproxError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ApproxError::Unavailable(format!("{}: {e}", path.display())))?;
        let mut predictions = HashMap::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let p: PredictionLine = serde_json::from_str(line).map_err(|e| {
                ApproxError::Unavailable(format!("{}:{}: {e}", path.display(), i + 1))
            })?;
            predictions.insert(p.sample_id, p.sql);
        }
        Ok(FileApproximator { predictions })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        FileApproximator {
            predictions: pairs.into_iter().collect(),
        }
    }
}

impl Approximator for FileApproximator {
    fn approximate(&self, req: &ApproxRequest<'_>) -> Result<String, ApproxError> {
        self.predictions
            .get(req.sample_id)
            .cloned()
            .ok_or_else(|| ApproxError::LookupMiss(req.sample_id.to_string()))
    }
}

#[derive(Serialize)]
struct RemoteRequest<'a> {
    question: &'a str,
    db_id: &'a str,
    schema: &'a SchemaCatalog,
}

#[derive(Deserialize)]
struct RemoteResponse {
    sql: String,
}

/// Parser served over HTTP: `{question, db_id, schema}` to `{sql}`.
#[derive(Debug, Clone)]
pub struct RemoteApproximator {
    endpoint: JsonEndpoint,
}

impl RemoteApproximator {
    pub fn new(url: &str, timeout: Duration, retries: u32) -> Self {
        RemoteApproximator {
            endpoint: JsonEndpoint::new(url, timeout, retries, None),
        }
    }
}

impl Approximator for RemoteApproximator {
    fn approximate(&self, req: &ApproxRequest<'_>) -> Result<String, ApproxError> {
        let body = RemoteRequest {
            question: req.question,
            db_id: &req.catalog.db_id,
            schema: req.catalog,
        };
        self.endpoint
            .post::<_, RemoteResponse>(&body)
            .map(|r| r.sql)
            .map_err(|e| ApproxError::Unavailable(e.to_string()))
    }
}

/// Labels schema splits and turns aggregated labels into SQL.
pub trait LabelSource: Send + Sync {
    fn label(
        &self,
        req: &ApproxRequest<'_>,
        split_index: usize,
        split: &SchemaSplit,
    ) -> Result<SspLabeling, ApproxError>;
    fn construct_sql(
        &self,
        req: &ApproxRequest<'_>,
        labels: &SspLabeling,
    ) -> Result<String, ApproxError>;
}

/// Runs a label source over the splits of a schema.
pub struct SplitLabelApproximator<L> {
    pub source: L,
    pub width: usize,
}

impl<L: LabelSource> SplitLabelApproximator<L> {
    pub fn labels(&self, req: &ApproxRequest<'_>) -> Result<SspLabeling, ApproxError> {
        let splits = split_catalog(req.question, req.catalog, self.width)?;
        let per_split = splits
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(SplitLabeling {
                    split: i,
                    labels: self.source.label(req, i, s)?,
                })
            })
            .collect::<Result<Vec<_>, ApproxError>>()?;
        let columns: Vec<ColumnId> = (0..req.catalog.columns.len()).map(ColumnId).collect();
        Ok(aggregate_labels(&per_split, &columns)?)
    }
}

impl<L: LabelSource> Approximator for SplitLabelApproximator<L> {
    fn approximate(&self, req: &ApproxRequest<'_>) -> Result<String, ApproxError> {
        let labels = self.labels(req)?;
        self.source.construct_sql(req, &labels)
    }
}
