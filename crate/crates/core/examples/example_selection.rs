//! Build an example index from half of the dev set, save and reload it, then
//! pick few-shot examples for a question from the other half.

use std::path::Path;

use text2sql_rag::eval::{example_pairs, ingest, IngestOptions};
use text2sql_rag::example_store::{ExampleIndex, HashingEmbedder};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/spider_dev");
    let ds = ingest(&dir, &IngestOptions::default())?;
    let (pool, tests) = ds.samples.split_at(ds.samples.len() / 2);

    let embedder = HashingEmbedder::new(256);
    let index = ExampleIndex::build(&example_pairs(pool, "pool-"), &embedder)?;
    let out = tempfile::tempdir()?;
    index.save(out.path())?;
    let index = ExampleIndex::load(out.path())?;
    println!("{} examples, embedder {}", index.len(), index.embedder_id);

    let sample = &tests[3];
    println!(
        "question: {}\napprox:   {}\n",
        sample.question, sample.gold_sql
    );
    let v = index.embed_query(&embedder, &sample.id, &sample.question)?;
    let picked = index.select_examples_where(&v, &sample.gold_sql, 5, 100, |r| {
        r.db_id.as_deref() != Some(&sample.db_id)
    })?;
    for c in &picked.chosen {
        println!("{:.3}  rank {:>3}  {}", c.ast_score, c.question_rank, c.sql);
    }
    Ok(())
}
