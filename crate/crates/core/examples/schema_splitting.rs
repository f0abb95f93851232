//! Split a wide schema into bounded windows, label each window with a toy
//! keyword labeler and build a query from the merged labels.

use std::path::Path;

use text2sql_rag::approx::{
    ApproxError, ApproxRequest, Approximator, LabelSource, SplitLabelApproximator,
};
use text2sql_rag::eval::{ingest, IngestOptions};
use text2sql_rag::schema::{ColumnId, TableId};
use text2sql_rag::split::{split_catalog, SchemaSplit, SspLabeling};
use text2sql_rag::text::tokenize;

/// Marks columns whose name shares a stem with the question.
struct KeywordLabeler;

impl LabelSource for KeywordLabeler {
    fn label(
        &self,
        req: &ApproxRequest<'_>,
        _split_index: usize,
        split: &SchemaSplit,
    ) -> Result<SspLabeling, ApproxError> {
        let q = tokenize(req.question);
        let mut out = SspLabeling::default();
        for c in split.columns.clone() {
            let col = req.catalog.column(ColumnId(c));
            let hit = tokenize(&col.semantic_name).iter().any(|t| q.contains(t));
            out.column_labels
                .insert(ColumnId(c), if hit { "select" } else { "none" }.into());
            if hit {
                out.table_labels.insert(col.table, "from".into());
            }
        }
        Ok(out)
    }

    fn construct_sql(
        &self,
        req: &ApproxRequest<'_>,
        labels: &SspLabeling,
    ) -> Result<String, ApproxError> {
        let cols: Vec<&str> = labels
            .column_labels
            .iter()
            .filter(|(_, l)| *l == "select")
            .map(|(c, _)| req.catalog.column(*c).name.as_str())
            .collect();
        let table = labels
            .table_labels
            .keys()
            .next()
            .copied()
            .unwrap_or(TableId(0));
        let list = if cols.is_empty() {
            "*".to_string()
        } else {
            cols.join(", ")
        };
        Ok(format!(
            "SELECT {list} FROM {}",
            req.catalog.table(table).name
        ))
    }
}

fn main() -> anyhow::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/spider_dev");
    let ds = ingest(&dir, &IngestOptions::default())?;
    let catalog = ds.catalogs.iter().max_by_key(|c| c.columns.len()).unwrap();
    let sample = ds
        .samples
        .iter()
        .find(|s| s.db_id == catalog.db_id)
        .unwrap();

    for width in [16, 64] {
        let splits = split_catalog(&sample.question, catalog, width)?;
        println!(
            "{} columns, width {width}: {} splits",
            catalog.columns.len(),
            splits.len()
        );
        for s in &splits {
            println!("  {:?} {}", s.columns, s.completion_token.as_str());
        }
    }

    let approx = SplitLabelApproximator {
        source: KeywordLabeler,
        width: 16,
    };
    let req = ApproxRequest {
        sample_id: &sample.id,
        question: &sample.question,
        catalog,
        gold_sql: None,
    };
    println!("\n{}\n-> {}", sample.question, approx.approximate(&req)?);
    Ok(())
}
