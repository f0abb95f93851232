//! Datasets, metrics and the end-to-end runner.

mod config;
mod dataset;
mod metrics;
mod pipeline;
mod report;

pub use config::{
    ApproximatorConfig, ApproximatorMode, Bm25Config, ConfigError, EmbedderKind, ExamplesConfig,
    LlmBackend, LlmConfig, RunConfig, SelectionConfig, SelectionKind, SplitConfig, ValuesConfig,
};
pub use dataset::{
    example_pairs, ingest, Dataset, DatasetError, DatasetSample, Difficulty, IngestOptions,
};
pub use metrics::{em_proxy, recall, shortening, AstBucket};
pub use pipeline::{
    build_embedder, embedder_name, export_official, load_report, run_config, settings_from,
    write_file, Pipeline, PipelineError, PipelineSettings, RunOutcome, PLACEHOLDER_PREDICTION,
};
pub use report::{
    Aggregates, BucketRow, ExampleScore, RunReport, SampleRecord, SelectedColumnName,
    SelectedSchema,
};
