use std::collections::BTreeMap;

use proptest::prelude::*;
use text2sql_rag::schema::{ColumnId, TableId};
use text2sql_rag::split::{
    aggregate_labels, split_schema, CompletionToken, SplitLabeling, SspLabeling,
};

fn columns(n: usize) -> Vec<Vec<String>> {
    (0..n)
        .map(|i| vec![format!("col{i}"), "text".into()])
        .collect()
}

/// Partition, split count and completion token for every total in 1..=200 and width in 1..=64.
pub fn partition_failures() -> Vec<String> {
    let mut bad = Vec::new();
    let q = vec!["how".to_string(), "many".into()];
    let tables = vec![vec!["t".to_string()]];
    for total in 1..=200usize {
        let cols = columns(total);
        for r in 1..=64usize {
            let splits = split_schema(&q, &cols, &tables, r).unwrap();
            let rejoined: Vec<Vec<String>> =
                splits.iter().flat_map(|s| s.column_slice.clone()).collect();
            let mut next = 0;
            let mut contiguous = true;
            for s in &splits {
                contiguous &= s.columns.start == next
                    && !s.columns.is_empty()
                    && s.columns.len() <= r
                    && s.column_slice == cols[s.columns.clone()]
                    && s.question_tokens == q
                    && s.table_tokens == tables;
                next = s.columns.end;
            }
            let full = splits.len() == 1;
            let flags = splits
                .iter()
                .all(|s| (s.completion_token == CompletionToken::FullSchema) == full);
            if splits.len() != total.div_ceil(r)
                || rejoined != cols
                || !contiguous
                || next != total
                || !flags
            {
                bad.push(format!("total {total} width {r}"));
            }
        }
    }
    bad
}

/// Table label with the most votes; ties go to the label first seen in split order.
pub fn majority(per_split: &[SplitLabeling], table: TableId) -> Option<String> {
    let mut order: Vec<&SplitLabeling> = per_split.iter().collect();
    order.sort_by_key(|s| s.split);
    let mut seen: Vec<(String, usize)> = Vec::new();
    for s in order {
        if let Some(l) = s.labels.table_labels.get(&table) {
            match seen.iter_mut().find(|(x, _)| x == l) {
                Some(e) => e.1 += 1,
                None => seen.push((l.clone(), 1)),
            }
        }
    }
    let top = seen.iter().map(|e| e.1).max()?;
    seen.into_iter().find(|e| e.1 == top).map(|e| e.0)
}

pub fn labelings() -> impl Strategy<Value = (Vec<SplitLabeling>, Vec<usize>)> {
    (1..6usize, 1..12usize)
        .prop_flat_map(|(n_splits, n_cols)| {
            let per_split = prop::collection::vec(
                (
                    prop::collection::vec(
                        prop::sample::select(vec!["sel", "where", "none"]),
                        n_cols,
                    ),
                    prop::collection::btree_map(
                        0..4usize,
                        prop::sample::select(vec!["a", "b", "c"]),
                        0..4,
                    ),
                ),
                n_splits,
            );
            (
                per_split,
                Just(n_splits).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle()),
            )
        })
        .prop_map(|(raw, perm)| {
            let n = raw.len();
            let splits = raw
                .into_iter()
                .enumerate()
                .map(|(i, (cols, tables))| {
                    let width = cols.len().div_ceil(n).max(1);
                    SplitLabeling {
                        split: i,
                        labels: SspLabeling {
                            column_labels: cols
                                .iter()
                                .enumerate()
                                .skip(i * width)
                                .take(width)
                                .map(|(c, l)| (ColumnId(c), l.to_string()))
                                .collect(),
                            table_labels: tables
                                .into_iter()
                                .map(|(t, l)| (TableId(t), l.to_string()))
                                .collect(),
                        },
                    }
                })
                .collect();
            (splits, perm)
        })
}

/// Aggregation under a reordering of the splits, checked against the vote-count oracle.
pub fn check_aggregation(splits: &[SplitLabeling], perm: &[usize]) -> Result<(), String> {
    let present: Vec<ColumnId> = splits
        .iter()
        .flat_map(|s| s.labels.column_labels.keys().copied())
        .collect();
    let base = aggregate_labels(splits, &present).map_err(|e| e.to_string())?;
    let shuffled: Vec<SplitLabeling> = perm.iter().map(|&i| splits[i].clone()).collect();
    if aggregate_labels(&shuffled, &present).as_ref() != Ok(&base) {
        return Err(format!("order dependent: {perm:?}"));
    }
    let expected: BTreeMap<TableId, String> = (0..4)
        .filter_map(|t| majority(splits, TableId(t)).map(|l| (TableId(t), l)))
        .collect();
    if base.table_labels != expected {
        return Err(format!("tables {:?} != {expected:?}", base.table_labels));
    }
    let first_wins = splits.iter().all(|s| {
        s.labels
            .column_labels
            .iter()
            .all(|(c, l)| &base.column_labels[c] == l)
    });
    if !first_wins {
        return Err("column labels".into());
    }
    Ok(())
}
