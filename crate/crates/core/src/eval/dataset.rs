use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::schema::{CatalogStore, SchemaError, DEFAULT_VALUE_CAP};
use crate::sql::{normalize_sql, NormalizationMode, SqlError};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
    Extra,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSample {
    pub id: String,
    pub db_id: String,
    pub question: String,
    pub gold_sql: String,
    pub difficulty: Difficulty,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("sample {id} references unknown database {db_id}")]
    SchemaRef { id: String, db_id: String },
    #[error("sample {id}: {source}")]
    Parse { id: String, source: SqlError },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Sample file name inside the dataset directory.
    pub samples_file: String,
    /// Abort on the first invalid sample instead of skipping it.
    pub strict: bool,
    pub value_cap: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            samples_file: "dev.json".into(),
            strict: false,
            value_cap: DEFAULT_VALUE_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<DatasetSample>,
    pub catalogs: CatalogStore,
    /// Samples skipped in non-strict mode.
    pub rejected: Vec<DatasetError>,
}

pub const TABLES_FILE: &str = "tables.json";
pub const VALUES_FILE: &str = "values.json";
pub const DIFFICULTY_FILE: &str = "difficulty.json";

#[derive(Deserialize)]
struct RawSample {
    db_id: String,
    question: String,
    query: String,
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Width of zero-padded sample ids.
fn id_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len().max(4)
}

/// Loads a Spider-layout directory: `tables.json`, the samples file and the
/// optional `values.json` and `difficulty.json` sidecars.
pub fn ingest(dir: &Path, opts: &IngestOptions) -> Result<Dataset, DatasetError> {
    let mut catalogs = CatalogStore::from_spider_file(&dir.join(TABLES_FILE))?;
    let values = dir.join(VALUES_FILE);
    if values.exists() {
        catalogs.load_values(&values, opts.value_cap)?;
    }
    let path = dir.join(&opts.samples_file);
    let raw: Vec<RawSample> =
        serde_json::from_str(&read(&path)?).map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
    let difficulty_path = dir.join(DIFFICULTY_FILE);
    let difficulty: BTreeMap<String, Difficulty> = if difficulty_path.exists() {
        serde_json::from_str(&read(&difficulty_path)?).map_err(|e| DatasetError::Io {
            path: difficulty_path.display().to_string(),
            message: e.to_string(),
        })?
    } else {
        BTreeMap::new()
    };

    let width = id_width(raw.len());
    let mut samples = Vec::with_capacity(raw.len());
    let mut rejected = Vec::new();
    for (i, r) in raw.into_iter().enumerate() {
        let id = format!("{i:0width$}");
        let check = if catalogs.get(&r.db_id).is_none() {
            Err(DatasetError::SchemaRef {
                id: id.clone(),
                db_id: r.db_id.clone(),
            })
        } else {
            normalize_sql(&r.query, NormalizationMode::InDomain)
                .map(|_| ())
                .map_err(|source| DatasetError::Parse {
                    id: id.clone(),
                    source,
                })
        };
        match check {
            Ok(()) => samples.push(DatasetSample {
                difficulty: difficulty.get(&id).copied().unwrap_or_default(),
                id,
                db_id: r.db_id,
                question: r.question,
                gold_sql: r.query,
            }),
            Err(e) if opts.strict => return Err(e),
            Err(e) => rejected.push(e),
        }
    }
    Ok(Dataset {
        samples,
        catalogs,
        rejected,
    })
}

/// Samples as retrievable example pairs, ids prefixed with `prefix`.
pub fn example_pairs(
    samples: &[DatasetSample],
    prefix: &str,
) -> Vec<crate::example_store::ExamplePair> {
    samples
        .iter()
        .map(|s| crate::example_store::ExamplePair {
            id: format!("{prefix}{}", s.id),
            question: s.question.clone(),
            sql: s.gold_sql.clone(),
            db_id: Some(s.db_id.clone()),
        })
        .collect()
}
