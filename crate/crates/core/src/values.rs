//! Representative column values matched against the question.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::schema::{ColumnId, ColumnType, SchemaCatalog, SubSchema};
use crate::text::tokenize;

pub const DEFAULT_VALUES_PER_COLUMN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSelection {
    pub column: ColumnId,
    pub values: Vec<String>,
    /// Whether any value shares a stem with the question.
    pub matched: bool,
}

/// Picks up to `per_column` values for every selected non-numeric column.
/// Values sharing stems with the question come first (more shared stems
/// first, then lexicographic); remaining slots are filled with the other
/// values in catalog order.
pub fn select_values(
    catalog: &SchemaCatalog,
    sub: &SubSchema,
    question: &str,
    per_column: usize,
) -> BTreeMap<ColumnId, ValueSelection> {
    let q: BTreeSet<String> = tokenize(question).into_iter().collect();
    let mut out = BTreeMap::new();
    for c in sub.column_ids() {
        let col = catalog.column(c);
        if col.ty == ColumnType::Number || col.values.is_empty() {
            continue;
        }
        let mut distinct: Vec<&String> = Vec::new();
        for v in &col.values {
            if !distinct.contains(&v) {
                distinct.push(v);
            }
        }
        let mut scored: Vec<(usize, &String)> = distinct
            .iter()
            .map(|v| {
                let shared = tokenize(v)
                    .into_iter()
                    .collect::<BTreeSet<_>>()
                    .intersection(&q)
                    .count();
                (shared, *v)
            })
            .filter(|(s, _)| *s > 0)
            .collect();
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        let matched = !scored.is_empty();
        let mut values: Vec<String> = scored
            .iter()
            .take(per_column)
            .map(|(_, v)| (*v).clone())
            .collect();
        for v in &distinct {
            if values.len() >= per_column {
                break;
            }
            if !values.contains(v) {
                values.push((*v).clone());
            }
        }
        out.insert(
            c,
            ValueSelection {
                column: c,
                values,
                matched,
            },
        );
    }
    out
}

/// Copies selected values into the sub-schema.
pub fn attach(sub: &mut SubSchema, selections: &BTreeMap<ColumnId, ValueSelection>) {
    sub.values = selections
        .iter()
        .map(|(c, s)| (*c, s.values.clone()))
        .collect();
}
