mod common;

use common::oracle::{best_ratio, disagreements};
use text2sql_rag::sql::{diff, normalize_sql, similarity, NormalizationMode, OpCounts};

#[test]
fn matcher_reaches_the_exhaustive_optimum() {
    let bad = disagreements();
    assert!(bad.is_empty(), "{bad:#?}");
}

fn op_counts(a: &str, b: &str) -> OpCounts {
    let x = NormalizationMode::CrossDomain;
    diff(&normalize_sql(a, x).unwrap(), &normalize_sql(b, x).unwrap())
        .unwrap()
        .counts()
}

#[test]
fn where_clause_is_inserted() {
    let c = op_counts("SELECT a FROM t", "SELECT a FROM t WHERE b = 1");
    assert_eq!(
        (c.alignment, c.insert, c.delete, c.update, c.moves),
        (4, 4, 0, 0, 0)
    );
    assert_eq!(
        best_ratio(
            &normalize_sql("SELECT a FROM t", NormalizationMode::CrossDomain)
                .unwrap()
                .root,
            &normalize_sql(
                "SELECT a FROM t WHERE b = 1",
                NormalizationMode::CrossDomain
            )
            .unwrap()
            .root,
        ),
        (4, 8)
    );
}

#[test]
fn select_column_moves_into_group_by() {
    let c = op_counts("SELECT a FROM t", "SELECT count(*) FROM t GROUP BY b");
    assert_eq!(
        (c.alignment, c.insert, c.delete, c.update, c.moves),
        (3, 3, 0, 0, 1)
    );
    let s = similarity(
        &normalize_sql("SELECT a FROM t", NormalizationMode::CrossDomain).unwrap(),
        &normalize_sql(
            "SELECT count(*) FROM t GROUP BY b",
            NormalizationMode::CrossDomain,
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!((s.n_alignments, s.n_total_ops), (3, 7));
}
