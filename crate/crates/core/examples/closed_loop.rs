//! End-to-end run driven by a config file: oracle approximator, a hashing
//! example index and a replay cache whose answers are the gold queries. Writes
//! the report, rescores it and exports files for the official scorer.

use std::path::Path;

use text2sql_rag::approx::OracleApproximator;
use text2sql_rag::eval::{
    example_pairs, export_official, ingest, load_report, run_config, settings_from, IngestOptions,
    Pipeline, RunConfig,
};
use text2sql_rag::example_store::{ExampleIndex, HashingEmbedder};
use text2sql_rag::llm::ReplayCache;

fn main() -> anyhow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/spider_dev");
    let work = tempfile::tempdir()?;
    let dir = work.path();

    let ds = ingest(&data, &IngestOptions::default())?;
    let embedder = HashingEmbedder::new(256);
    ExampleIndex::build(&example_pairs(&ds.samples[..300], "pool-"), &embedder)?
        .save(&dir.join("index"))?;

    let config = format!(
        r#"
dataset = "{}"
index = "index"
output = "out/report.json"

[approximator]
mode = "oracle"

[examples]
pool = 50
exclude_same_db = true

[llm]
backend = "replay"
cache = "cache.jsonl"
"#,
        data.display()
    );
    std::fs::write(dir.join("run.toml"), config)?;
    let cfg = RunConfig::load(&dir.join("run.toml"))?;

    // Record the gold query as the answer to every prompt the run will send.
    let index = ExampleIndex::load(cfg.index.as_deref().unwrap())?;
    let cache = ReplayCache::open(cfg.llm.cache.as_deref().unwrap())?;
    let staging = ReplayCache::in_memory();
    let p = Pipeline::new(
        &ds.catalogs,
        &OracleApproximator,
        &staging,
        Some((&index, &embedder)),
        settings_from(&cfg),
    );
    for s in &ds.samples {
        if let Some(b) = p.prompt_for(s) {
            cache.insert(&b.text, &format!("```sql\n{}\n```", s.gold_sql))?;
        }
    }
    drop(cache);

    let outcome = run_config(&cfg)?;
    print!("{}", outcome.report.summary());
    println!("network calls {}", outcome.network_calls);

    let reloaded = load_report(&cfg.output)?;
    assert!(reloaded.is_consistent());
    export_official(
        &reloaded,
        &outcome.dataset.samples,
        &dir.join("pred.sql"),
        Some(&dir.join("gold.sql")),
    )?;
    let first = std::fs::read_to_string(dir.join("pred.sql"))?;
    println!(
        "first prediction: {}",
        first.lines().next().unwrap_or_default()
    );
    Ok(())
}
