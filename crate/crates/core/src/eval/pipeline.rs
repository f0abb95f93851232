use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;

use super::config::{ApproximatorMode, EmbedderKind, LlmBackend, RunConfig};
use super::dataset::{ingest, Dataset, DatasetError, DatasetSample, IngestOptions};
use super::metrics::{em_proxy, recall, shortening};
use super::report::{ExampleScore, RunReport, SampleRecord, SelectedColumnName, SelectedSchema};
use crate::approx::{
    ApproxRequest, Approximator, FileApproximator, OracleApproximator, RemoteApproximator,
};
use crate::bm25::Bm25Params;
use crate::example_store::{
    Embedder, ExampleError, ExampleIndex, HashingEmbedder, PrecomputedEmbedder, RemoteEmbedder,
    SelectionResult,
};
use crate::llm::{
    complete, prompt_key, LlmClient, RecordingClient, RemoteChat, RemoteChatConfig, ReplayCache,
};
use crate::prompt::{render_prompt, PromptBundle, PromptOptions};
use crate::schema::{
    query_elements, select_sub_schema, CatalogStore, ColumnIndex, SchemaCatalog, SelectionMode,
    SubSchema, MAX_DYNAMIC_K,
};
use crate::split::split_catalog;
use crate::sql::{normalize_sql, NormalizationMode};
use crate::values::{attach, select_values};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub selection: SelectionMode,
    pub bm25: Bm25Params,
    pub values_per_column: usize,
    pub prompt: PromptOptions,
    pub examples: usize,
    pub pool: usize,
    pub exclude_same_db: bool,
    pub split_width: usize,
    pub cross_lingual: bool,
    pub workers: usize,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            selection: SelectionMode::HybridDynamic,
            bm25: Bm25Params::default(),
            values_per_column: crate::values::DEFAULT_VALUES_PER_COLUMN,
            prompt: PromptOptions::default(),
            examples: crate::example_store::DEFAULT_EXAMPLES,
            pool: crate::example_store::DEFAULT_POOL,
            exclude_same_db: false,
            split_width: crate::split::DEFAULT_SPLIT_WIDTH,
            cross_lingual: false,
            workers: 4,
        }
    }
}

/// Everything a run needs, borrowed.
pub struct Pipeline<'a> {
    pub catalogs: &'a CatalogStore,
    pub approximator: &'a dyn Approximator,
    pub llm: &'a dyn LlmClient,
    pub examples: Option<(&'a ExampleIndex, &'a dyn Embedder)>,
    pub settings: PipelineSettings,
    column_indexes: BTreeMap<String, ColumnIndex>,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        catalogs: &'a CatalogStore,
        approximator: &'a dyn Approximator,
        llm: &'a dyn LlmClient,
        examples: Option<(&'a ExampleIndex, &'a dyn Embedder)>,
        settings: PipelineSettings,
    ) -> Self {
        let column_indexes = catalogs
            .iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|c| (c.db_id.clone(), ColumnIndex::build(c, settings.bm25)))
            .collect();
        Pipeline {
            catalogs,
            approximator,
            llm,
            examples,
            settings,
            column_indexes,
        }
    }

    /// Runs every sample on a pool of `settings.workers` threads.
    pub fn run(&self, samples: &[DatasetSample]) -> RunReport {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.settings.workers.max(1))
            .build()
            .expect("thread pool");
        let records = pool.install(|| samples.par_iter().map(|s| self.run_sample(s)).collect());
        RunReport::new(records)
    }

    pub fn run_sample(&self, sample: &DatasetSample) -> SampleRecord {
        let (mut rec, bundle) = self.prepare(sample);
        let Some(bundle) = bundle else {
            return rec;
        };
        match complete(self.llm, &bundle) {
            Ok(c) => {
                rec.em_proxy = em_proxy(&c.sql, &sample.gold_sql);
                rec.response = Some(c.raw);
                rec.prediction = Some(c.sql);
            }
            Err(crate::llm::CompleteError::Extraction { raw }) => {
                rec.errors.push("no SQL in response".into());
                rec.response = Some(raw);
            }
            Err(e) => rec.errors.push(format!("llm: {e}")),
        }
        rec
    }

    /// The prompt a sample would send, without calling the model.
    pub fn prompt_for(&self, sample: &DatasetSample) -> Option<PromptBundle> {
        self.prepare(sample).1
    }

    fn prepare(&self, sample: &DatasetSample) -> (SampleRecord, Option<PromptBundle>) {
        let mut rec = SampleRecord {
            id: sample.id.clone(),
            db_id: sample.db_id.clone(),
            difficulty: sample.difficulty,
            approx_sql: None,
            approx_failed: false,
            schema_splits: 0,
            sub_schema: None,
            examples: Vec::new(),
            examples_question_only: false,
            prompt_hash: None,
            response: None,
            prediction: None,
            em_proxy: false,
            recalled: false,
            shortening: 0.0,
            mean_example_score: None,
            errors: Vec::new(),
        };
        let Some(catalog) = self.catalogs.get(&sample.db_id) else {
            rec.errors
                .push(format!("unknown database {}", sample.db_id));
            return (rec, None);
        };
        rec.schema_splits = split_catalog(&sample.question, catalog, self.settings.split_width)
            .map_or(0, |s| s.len());

        let req = ApproxRequest {
            sample_id: &sample.id,
            question: &sample.question,
            catalog,
            gold_sql: Some(&sample.gold_sql),
        };
        match self.approximator.approximate(&req) {
            Ok(sql) => rec.approx_sql = Some(sql),
            Err(e) => rec.errors.push(format!("approximator: {e}")),
        }
        let approx = rec
            .approx_sql
            .as_deref()
            .filter(|s| normalize_sql(s, NormalizationMode::InDomain).is_ok());
        rec.approx_failed = approx.is_none();

        let sub = match self.sub_schema(catalog, &sample.question, approx) {
            Ok(sub) => sub,
            Err(e) => {
                rec.errors.push(e);
                return (rec, None);
            }
        };
        if let Ok(gold) = query_elements(catalog, &sample.gold_sql) {
            rec.recalled = recall(&sub, &gold);
        }
        rec.shortening = shortening(&sub, catalog);
        rec.sub_schema = Some(describe(catalog, &sub));

        let selection = match self.select_examples(sample, approx.unwrap_or("")) {
            Ok(sel) => sel,
            Err(e) => {
                rec.errors.push(format!("examples: {e}"));
                return (rec, None);
            }
        };
        rec.examples_question_only = selection.question_only && !selection.chosen.is_empty();
        rec.examples = selection
            .chosen
            .iter()
            .map(|c| ExampleScore {
                id: c.id.clone(),
                ast_score: c.ast_score,
            })
            .collect();
        if !selection.chosen.is_empty() && !selection.question_only {
            let total: f64 = selection.chosen.iter().map(|c| c.ast_score).sum();
            rec.mean_example_score = Some(total / selection.chosen.len() as f64);
        }

        let bundle = match render_prompt(
            catalog,
            &sub,
            &selection,
            &sample.question,
            &sample.db_id,
            &self.settings.prompt,
        ) {
            Ok(b) => b,
            Err(e) => {
                rec.errors.push(format!("prompt: {e}"));
                return (rec, None);
            }
        };
        rec.prompt_hash = Some(prompt_key(&bundle.text));
        (rec, Some(bundle))
    }

    fn sub_schema(
        &self,
        catalog: &SchemaCatalog,
        question: &str,
        approx: Option<&str>,
    ) -> Result<SubSchema, String> {
        let mut mode = if self.settings.cross_lingual {
            SelectionMode::Full
        } else {
            self.settings.selection
        };
        if approx.is_none()
            && matches!(
                mode,
                SelectionMode::ApproxOnly | SelectionMode::HybridDynamic
            )
        {
            mode = SelectionMode::Bm25TopK(MAX_DYNAMIC_K);
        }
        let index = &self.column_indexes[&catalog.db_id];
        let mut sub = select_sub_schema(catalog, index, question, approx, mode)
            .map_err(|e| format!("schema: {e}"))?;
        if !self.settings.cross_lingual {
            let values = select_values(catalog, &sub, question, self.settings.values_per_column);
            attach(&mut sub, &values);
        }
        Ok(sub)
    }

    fn select_examples(
        &self,
        sample: &DatasetSample,
        approx: &str,
    ) -> Result<SelectionResult, ExampleError> {
        let Some((index, embedder)) = self.examples else {
            return Ok(SelectionResult {
                chosen: Vec::new(),
                pool_size: 0,
                question_only: false,
            });
        };
        let v = index.embed_query(embedder, &sample.id, &sample.question)?;
        let exclude = self.settings.exclude_same_db;
        index.select_examples_where(
            &v,
            approx,
            self.settings.examples,
            self.settings.pool,
            |r| !(exclude && r.db_id.as_deref() == Some(sample.db_id.as_str())),
        )
    }
}

fn describe(catalog: &SchemaCatalog, sub: &SubSchema) -> SelectedSchema {
    let col_name = |c| {
        let col = catalog.column(c);
        format!("{}.{}", catalog.table(col.table).name, col.name)
    };
    SelectedSchema {
        tables: sub
            .tables
            .iter()
            .map(|t| catalog.table(*t).name.clone())
            .collect(),
        columns: sub
            .columns
            .iter()
            .map(|s| SelectedColumnName {
                name: col_name(s.column),
                provenance: s.provenance,
            })
            .collect(),
        values: sub
            .values
            .iter()
            .map(|(c, v)| (col_name(*c), v.clone()))
            .collect(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Examples(#[from] ExampleError),
    #[error(transparent)]
    Approximator(#[from] crate::approx::ApproxError),
    #[error(transparent)]
    Llm(#[from] crate::llm::LlmError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Result of a configured run.
pub struct RunOutcome {
    pub report: RunReport,
    pub dataset: Dataset,
    pub network_calls: usize,
}

pub fn settings_from(cfg: &RunConfig) -> PipelineSettings {
    PipelineSettings {
        selection: cfg.selection.mode(),
        bm25: cfg.bm25.params(),
        values_per_column: cfg.values.topk,
        prompt: PromptOptions {
            max_value_chars: cfg.values.max_chars,
        },
        examples: cfg.examples.e,
        pool: cfg.examples.pool,
        exclude_same_db: cfg.examples.exclude_same_db,
        split_width: cfg.split.r,
        cross_lingual: cfg.cross_lingual,
        workers: cfg.workers,
    }
}

pub fn build_embedder(cfg: &RunConfig) -> Result<Box<dyn Embedder>, PipelineError> {
    let ex = &cfg.examples;
    Ok(match ex.embedder {
        EmbedderKind::Hashing => Box::new(HashingEmbedder::new(ex.dim)),
        EmbedderKind::Precomputed => {
            let path = ex.vectors.as_deref().expect("validated");
            Box::new(PrecomputedEmbedder::from_jsonl(&embedder_name(path), path)?)
        }
        EmbedderKind::Remote => Box::new(RemoteEmbedder::new(
            ex.url.as_deref().expect("validated"),
            ex.model.as_deref().expect("validated"),
            ex.token_env.as_deref().and_then(|v| std::env::var(v).ok()),
            Duration::from_secs(cfg.llm.timeout_secs),
            cfg.llm.retries,
        )),
    })
}

/// Identifier of a precomputed embedder: the vector file's stem.
pub fn embedder_name(path: &Path) -> String {
    format!(
        "precomputed:{}",
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    )
}

fn build_approximator(cfg: &RunConfig) -> Result<Box<dyn Approximator>, PipelineError> {
    let a = &cfg.approximator;
    Ok(match a.mode {
        ApproximatorMode::Oracle => Box::new(OracleApproximator),
        ApproximatorMode::File => Box::new(FileApproximator::from_jsonl(
            a.path.as_deref().expect("validated"),
        )?),
        ApproximatorMode::Remote => Box::new(RemoteApproximator::new(
            a.url.as_deref().expect("validated"),
            Duration::from_secs(a.timeout_secs),
            a.retries,
        )),
    })
}

fn build_llm(cfg: &RunConfig) -> Result<Box<dyn LlmClient>, PipelineError> {
    let l = &cfg.llm;
    let remote = || {
        RemoteChat::new(&RemoteChatConfig {
            url: l.url.clone().expect("validated"),
            model: l.model.clone().expect("validated"),
            max_tokens: l.max_tokens,
            token_env: Some(l.token_env.clone()),
            timeout_secs: l.timeout_secs,
            retries: l.retries,
            max_in_flight: l.max_in_flight,
        })
    };
    Ok(match l.backend {
        LlmBackend::Replay => Box::new(ReplayCache::open(l.cache.as_deref().expect("validated"))?),
        LlmBackend::Remote => Box::new(remote()),
        LlmBackend::Record => Box::new(RecordingClient {
            inner: remote(),
            cache: ReplayCache::open(l.cache.as_deref().expect("validated"))?,
        }),
    })
}

/// Loads everything named by the config, runs the pipeline and writes the report.
pub fn run_config(cfg: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let dataset = ingest(
        &cfg.dataset,
        &IngestOptions {
            samples_file: cfg.samples.clone(),
            strict: cfg.strict,
            value_cap: cfg.values.cap,
        },
    )?;
    let approximator = build_approximator(cfg)?;
    let llm = build_llm(cfg)?;
    let index = cfg.index.as_deref().map(ExampleIndex::load).transpose()?;
    let embedder = match &index {
        Some(_) => Some(build_embedder(cfg)?),
        None => None,
    };
    let examples = index.as_ref().zip(embedder.as_deref());
    let pipeline = Pipeline::new(
        &dataset.catalogs,
        approximator.as_ref(),
        llm.as_ref(),
        examples,
        settings_from(cfg),
    );
    let report = pipeline.run(&dataset.samples);
    write_file(&cfg.output, report.to_json().as_bytes())?;
    let network_calls = llm.network_calls();
    Ok(RunOutcome {
        report,
        dataset,
        network_calls,
    })
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let err = |e: std::io::Error| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(err)?;
    }
    std::fs::write(path, bytes).map_err(err)
}

/// Predictions in the official scorer's layout, one query per line in
/// sample order, plus the matching gold file (`query<TAB>db_id`).
/// Samples without a prediction get a placeholder so lines stay aligned.
pub fn export_official(
    report: &RunReport,
    samples: &[DatasetSample],
    pred: &Path,
    gold: Option<&Path>,
) -> Result<(), PipelineError> {
    let by_id: BTreeMap<&str, &SampleRecord> =
        report.records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut p = String::new();
    let mut g = String::new();
    for s in samples {
        let sql = by_id
            .get(s.id.as_str())
            .and_then(|r| r.prediction.as_deref())
            .unwrap_or(PLACEHOLDER_PREDICTION);
        p.push_str(&one_line(sql));
        p.push('\n');
        g.push_str(&format!("{}\t{}\n", one_line(&s.gold_sql), s.db_id));
    }
    write_file(pred, p.as_bytes())?;
    if let Some(gold) = gold {
        write_file(gold, g.as_bytes())?;
    }
    Ok(())
}

pub const PLACEHOLDER_PREDICTION: &str = "SELECT 1";

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Reads a report written by a run.
pub fn load_report(path: &Path) -> Result<RunReport, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
