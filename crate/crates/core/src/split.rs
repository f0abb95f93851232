//! Schema splitting for bounded-context approximators and vote-based
//! aggregation of per-split labels.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::schema::{ColumnId, SchemaCatalog, TableId};

pub const DEFAULT_SPLIT_WIDTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionToken {
    FullSchema,
    PartSchema,
}

impl CompletionToken {
    pub fn as_str(self) -> &'static str {
        match self {
            CompletionToken::FullSchema => "[full_schema]",
            CompletionToken::PartSchema => "[part_schema]",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaSplit {
    pub question_tokens: Vec<String>,
    pub completion_token: CompletionToken,
    /// Positions of this split's columns in the flattened column list.
    pub columns: Range<usize>,
    pub column_slice: Vec<Vec<String>>,
    pub table_tokens: Vec<Vec<String>>,
}

impl SchemaSplit {
    /// Flat token sequence: question, completion token, columns, tables.
    pub fn tokens(&self, separator: Option<&str>) -> Vec<String> {
        let mut out = self.question_tokens.clone();
        out.push(self.completion_token.as_str().to_string());
        for (i, group) in self.column_slice.iter().enumerate() {
            if let (Some(sep), true) = (separator, i > 0) {
                out.push(sep.to_string());
            }
            out.extend(group.iter().cloned());
        }
        out.extend(self.table_tokens.iter().flatten().cloned());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("split width must be at least 1")]
    InvalidWidth,
    #[error("schema has no columns")]
    NoColumns,
    #[error("column {0:?} has no label after aggregation")]
    MissingColumn(ColumnId),
}

/// Splits the flattened columns into consecutive groups of at most `width`.
pub fn split_schema(
    question_tokens: &[String],
    column_tokens: &[Vec<String>],
    table_tokens: &[Vec<String>],
    width: usize,
) -> Result<Vec<SchemaSplit>, SplitError> {
    if width < 1 {
        return Err(SplitError::InvalidWidth);
    }
    if column_tokens.is_empty() {
        return Err(SplitError::NoColumns);
    }
    let flag = if column_tokens.len() > width {
        CompletionToken::PartSchema
    } else {
        CompletionToken::FullSchema
    };
    Ok((0..column_tokens.len())
        .step_by(width)
        .map(|start| {
            let end = (start + width).min(column_tokens.len());
            SchemaSplit {
                question_tokens: question_tokens.to_vec(),
                completion_token: flag,
                columns: start..end,
                column_slice: column_tokens[start..end].to_vec(),
                table_tokens: table_tokens.to_vec(),
            }
        })
        .collect())
}

/// Splits a catalog, using raw column and table names as token groups.
pub fn split_catalog(
    question: &str,
    catalog: &SchemaCatalog,
    width: usize,
) -> Result<Vec<SchemaSplit>, SplitError> {
    let q: Vec<String> = question.split_whitespace().map(str::to_lowercase).collect();
    let columns: Vec<Vec<String>> = catalog
        .columns
        .iter()
        .map(|c| vec![c.name.clone()])
        .collect();
    let tables: Vec<Vec<String>> = catalog
        .tables
        .iter()
        .map(|t| vec![t.name.clone()])
        .collect();
    split_schema(&q, &columns, &tables, width)
}

/// Labels of schema elements; the label vocabulary is opaque.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SspLabeling {
    pub column_labels: BTreeMap<ColumnId, String>,
    pub table_labels: BTreeMap<TableId, String>,
}

/// Labels produced for one split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLabeling {
    pub split: usize,
    pub labels: SspLabeling,
}

/// Merges per-split labelings. Column labels are unioned (earlier splits
/// win on conflict); each table takes its most frequent label, ties going to
/// the label seen in the earliest split. Repeated submissions of a split
/// index count once.
pub fn aggregate_labels(
    per_split: &[SplitLabeling],
    columns: &[ColumnId],
) -> Result<SspLabeling, SplitError> {
    let mut ordered: Vec<&SplitLabeling> = per_split.iter().collect();
    ordered.sort_by_key(|s| s.split);
    ordered.dedup_by_key(|s| s.split);

    let mut out = SspLabeling::default();
    for s in &ordered {
        for (c, l) in &s.labels.column_labels {
            out.column_labels.entry(*c).or_insert_with(|| l.clone());
        }
    }
    if let Some(&missing) = columns.iter().find(|c| !out.column_labels.contains_key(c)) {
        return Err(SplitError::MissingColumn(missing));
    }

    // (votes, first split index) per table and label
    let mut tally: BTreeMap<TableId, BTreeMap<&str, (usize, usize)>> = BTreeMap::new();
    for s in &ordered {
        for (t, l) in &s.labels.table_labels {
            let e = tally
                .entry(*t)
                .or_default()
                .entry(l.as_str())
                .or_insert((0, s.split));
            e.0 += 1;
        }
    }
    for (t, votes) in tally {
        let (label, _) = votes
            .into_iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .expect("non-empty tally");
        out.table_labels.insert(t, label.to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(n: usize) -> Vec<Vec<String>> {
        (1..=n).map(|i| vec![format!("c{i}")]).collect()
    }

    #[test]
    fn five_columns_width_two() {
        let s = split_schema(&["q".into()], &toks(5), &[vec!["t".into()]], 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[2].column_slice, [vec!["c5".to_string()]]);
        assert!(s
            .iter()
            .all(|x| x.completion_token == CompletionToken::PartSchema));
        assert_eq!(s[0].tokens(None), ["q", "[part_schema]", "c1", "c2", "t"]);
    }

    #[test]
    fn boundary_is_full_schema() {
        let s = split_schema(&[], &toks(64), &[], 64).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].completion_token, CompletionToken::FullSchema);
        assert_eq!(
            split_schema(&[], &toks(1), &[], 0),
            Err(SplitError::InvalidWidth)
        );
    }

    fn labeling(split: usize, cols: &[(usize, &str)], table: &str) -> SplitLabeling {
        SplitLabeling {
            split,
            labels: SspLabeling {
                column_labels: cols
                    .iter()
                    .map(|(c, l)| (ColumnId(*c), l.to_string()))
                    .collect(),
                table_labels: [(TableId(0), table.to_string())].into(),
            },
        }
    }

    #[test]
    fn majority_and_earliest_tie() {
        let cols = [ColumnId(0), ColumnId(1), ColumnId(2)];
        let three = [
            labeling(0, &[(0, "x")], "A"),
            labeling(1, &[(1, "y")], "B"),
            labeling(2, &[(2, "z")], "A"),
        ];
        assert_eq!(
            aggregate_labels(&three, &cols).unwrap().table_labels[&TableId(0)],
            "A"
        );
        let tie = [
            labeling(1, &[(1, "y"), (2, "z")], "B"),
            labeling(0, &[(0, "x")], "A"),
        ];
        assert_eq!(
            aggregate_labels(&tie, &cols).unwrap().table_labels[&TableId(0)],
            "A"
        );
        let dup = [
            labeling(0, &[(0, "x")], "A"),
            labeling(1, &[(1, "y"), (2, "z")], "B"),
            labeling(1, &[(1, "y"), (2, "z")], "B"),
        ];
        assert_eq!(
            aggregate_labels(&dup, &cols).unwrap().table_labels[&TableId(0)],
            "A"
        );
        assert_eq!(
            aggregate_labels(&three[..2], &cols),
            Err(SplitError::MissingColumn(ColumnId(2)))
        );
    }
}
