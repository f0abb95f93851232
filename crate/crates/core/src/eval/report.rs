use serde::{Deserialize, Serialize};

use super::dataset::Difficulty;
use super::metrics::AstBucket;
use crate::schema::Provenance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedColumnName {
    pub name: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedSchema {
    pub tables: Vec<String>,
    pub columns: Vec<SelectedColumnName>,
    pub values: Vec<(String, Vec<String>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub id: String,
    pub ast_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub db_id: String,
    pub difficulty: Difficulty,
    pub approx_sql: Option<String>,
    /// The approximated query was missing or unparseable and a fallback was used.
    pub approx_failed: bool,
    pub schema_splits: usize,
    pub sub_schema: Option<SelectedSchema>,
    pub examples: Vec<ExampleScore>,
    pub examples_question_only: bool,
    pub prompt_hash: Option<String>,
    pub response: Option<String>,
    pub prediction: Option<String>,
    pub em_proxy: bool,
    pub recalled: bool,
    pub shortening: f64,
    pub mean_example_score: Option<f64>,
    pub errors: Vec<String>,
}

impl SampleRecord {
    /// A sample that produced no prediction.
    pub fn failed(&self) -> bool {
        self.prediction.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub bucket: AstBucket,
    pub samples: usize,
    pub em_proxy_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub samples: usize,
    pub failed: usize,
    pub recall_pct: f64,
    pub mean_shortening_pct: f64,
    pub em_proxy_pct: f64,
    pub buckets: Vec<BucketRow>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl Aggregates {
    pub fn compute(records: &[SampleRecord]) -> Self {
        let n = records.len();
        let shortening: f64 = records.iter().map(|r| r.shortening).sum();
        let buckets = AstBucket::ALL
            .iter()
            .map(|&bucket| {
                let inside: Vec<&SampleRecord> = records
                    .iter()
                    .filter(|r| r.mean_example_score.map(AstBucket::of) == Some(bucket))
                    .collect();
                BucketRow {
                    bucket,
                    samples: inside.len(),
                    em_proxy_pct: pct(inside.iter().filter(|r| r.em_proxy).count(), inside.len()),
                }
            })
            .collect();
        Aggregates {
            samples: n,
            failed: records.iter().filter(|r| r.failed()).count(),
            recall_pct: pct(records.iter().filter(|r| r.recalled).count(), n),
            mean_shortening_pct: if n == 0 {
                0.0
            } else {
                100.0 * shortening / n as f64
            },
            em_proxy_pct: pct(records.iter().filter(|r| r.em_proxy).count(), n),
            buckets,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<SampleRecord>,
    pub aggregates: Aggregates,
}

impl RunReport {
    pub fn new(mut records: Vec<SampleRecord>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let aggregates = Aggregates::compute(&records);
        RunReport {
            records,
            aggregates,
        }
    }

    /// Whether the stored aggregates match a recomputation from the records.
    pub fn is_consistent(&self) -> bool {
        Aggregates::compute(&self.records) == self.aggregates
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.records.is_empty() {
            0.0
        } else {
            self.aggregates.failed as f64 / self.records.len() as f64
        }
    }

    pub fn summary(&self) -> String {
        let a = &self.aggregates;
        let mut out = String::new();
        out.push_str(&format!("samples         {:>8}\n", a.samples));
        out.push_str(&format!("failed          {:>8}\n", a.failed));
        out.push_str(&format!("recall %        {:>8.1}\n", a.recall_pct));
        out.push_str(&format!("shortening %    {:>8.1}\n", a.mean_shortening_pct));
        out.push_str(&format!("EM proxy %      {:>8.1}\n", a.em_proxy_pct));
        out.push_str("\nexample AST interval   samples   EM proxy %\n");
        for row in &a.buckets {
            out.push_str(&format!(
                "{:<20} {:>9} {:>12.1}\n",
                row.bucket.label(),
                row.samples,
                row.em_proxy_pct
            ));
        }
        out
    }
}
