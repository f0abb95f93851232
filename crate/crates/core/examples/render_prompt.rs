//! Render a prompt for one dev question and complete it through a replay
//! cache, extracting the SQL from a chatty response.

use std::path::Path;

use text2sql_rag::bm25::Bm25Params;
use text2sql_rag::eval::{ingest, IngestOptions};
use text2sql_rag::example_store::SelectionResult;
use text2sql_rag::llm::{complete, extract_sql, ReplayCache};
use text2sql_rag::prompt::{render_prompt, PromptOptions};
use text2sql_rag::schema::{select_sub_schema, ColumnIndex, SelectionMode};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/spider_dev");
    let ds = ingest(&dir, &IngestOptions::default())?;
    let s = &ds.samples[100];
    let catalog = ds.catalogs.get(&s.db_id).unwrap();
    let index = ColumnIndex::build(catalog, Bm25Params::default());
    let sub = select_sub_schema(
        catalog,
        &index,
        &s.question,
        Some(&s.gold_sql),
        SelectionMode::HybridDynamic,
    )?;
    let none = SelectionResult {
        chosen: Vec::new(),
        pool_size: 0,
        question_only: false,
    };
    let bundle = render_prompt(
        catalog,
        &sub,
        &none,
        &s.question,
        &s.db_id,
        &PromptOptions::default(),
    )?;
    println!("{}\n", bundle.text);

    let cache = ReplayCache::in_memory();
    cache.insert(
        &bundle.text,
        &format!(
            "Here is the query:\n```sql\n{};\n```\nIt counts rows.",
            s.gold_sql
        ),
    )?;
    let done = complete(&cache, &bundle)?;
    println!("extracted: {}", done.sql);
    println!(
        "from prose: {:?}",
        extract_sql("The answer is SELECT 1 FROM t; hope it helps")
    );
    Ok(())
}
