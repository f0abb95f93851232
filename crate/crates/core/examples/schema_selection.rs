//! Compare selection modes on the dev set: recall of gold elements and
//! schema shortening, with the gold query standing in for the approximation.

use std::collections::BTreeMap;
use std::path::Path;

use text2sql_rag::bm25::Bm25Params;
use text2sql_rag::eval::{ingest, recall, shortening, IngestOptions};
use text2sql_rag::schema::{query_elements, select_sub_schema, ColumnIndex, SelectionMode};

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/spider_dev");
    let ds = ingest(&dir, &IngestOptions::default())?;
    let indexes: BTreeMap<&str, ColumnIndex> = ds
        .catalogs
        .iter()
        .map(|c| {
            (
                c.db_id.as_str(),
                ColumnIndex::build(c, Bm25Params::default()),
            )
        })
        .collect();

    let s = &ds.samples[42];
    let catalog = ds.catalogs.get(&s.db_id).unwrap();
    let sub = select_sub_schema(
        catalog,
        &indexes[s.db_id.as_str()],
        &s.question,
        Some(&s.gold_sql),
        SelectionMode::HybridDynamic,
    )?;
    println!("{}\n{}", s.question, s.gold_sql);
    for c in &sub.columns {
        let col = catalog.column(c.column);
        println!(
            "  {:<30} {:?}",
            format!("{}.{}", catalog.table(col.table).name, col.name),
            c.provenance
        );
    }
    println!();

    println!("{:<16} {:>8} {:>12}", "mode", "recall", "shortening");
    for mode in [
        SelectionMode::ApproxOnly,
        SelectionMode::Bm25TopK(10),
        SelectionMode::Bm25TopK(20),
        SelectionMode::HybridDynamic,
        SelectionMode::Full,
    ] {
        let (mut hit, mut short) = (0, 0.0);
        for s in &ds.samples {
            let catalog = ds.catalogs.get(&s.db_id).unwrap();
            let sub = select_sub_schema(
                catalog,
                &indexes[s.db_id.as_str()],
                &s.question,
                Some(&s.gold_sql),
                mode,
            )?;
            hit += usize::from(recall(&sub, &query_elements(catalog, &s.gold_sql)?));
            short += shortening(&sub, catalog);
        }
        let n = ds.samples.len() as f64;
        println!(
            "{:<16} {:>8.1} {:>12.1}",
            format!("{mode:?}"),
            100.0 * hit as f64 / n,
            100.0 * short / n
        );
    }
    Ok(())
}
