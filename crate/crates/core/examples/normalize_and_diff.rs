//! Normalize two queries and print the edit script between them.
//!
//! cargo run --example normalize_and_diff -- "SELECT a FROM t" "SELECT count(*) FROM t GROUP BY b"

use text2sql_rag::sql::{diff, normalize_sql, similarity, EditOp, NormalizationMode};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let source = args.next().unwrap_or_else(|| {
        "SELECT T2.name, count(*) FROM orders AS T1 JOIN products AS T2 ON T1.product_id = T2.id GROUP BY T2.name".into()
    });
    let target = args
        .next()
        .unwrap_or_else(|| "SELECT name FROM highschooler WHERE grade = 10".into());

    for mode in [NormalizationMode::InDomain, NormalizationMode::CrossDomain] {
        let a = normalize_sql(&source, mode)?;
        let b = normalize_sql(&target, mode)?;
        println!("{mode:?}");
        println!("  source  {}", a.render());
        println!("  target  {}", b.render());
        let script = diff(&a, &b)?;
        for op in &script.ops {
            if !matches!(op, EditOp::Alignment { .. }) {
                println!("    {}", serde_json::to_string(op)?);
            }
        }
        let s = similarity(&a, &b)?;
        println!(
            "  similarity {:.3} ({} alignments / {} ops)\n",
            s.score, s.n_alignments, s.n_total_ops
        );
        assert_eq!(script.apply(&a.root)?, b.root);
    }
    Ok(())
}
