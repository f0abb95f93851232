//! Prompt rendering.

use serde::{Deserialize, Serialize};

use crate::example_store::SelectionResult;
use crate::schema::{ColumnId, SchemaCatalog, SubSchema, TableId};

pub const DEFAULT_MAX_VALUE_CHARS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub text: String,
    pub sub: SubSchema,
    pub examples: SelectionResult,
    pub question: String,
    pub db_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("sub-schema of {found} used for a prompt on {expected}")]
    InconsistentBundle { expected: String, found: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptOptions {
    /// Values longer than this many characters are cut.
    pub max_value_chars: usize,
}

impl Default for PromptOptions {
    fn default() -> Self {
        PromptOptions {
            max_value_chars: DEFAULT_MAX_VALUE_CHARS,
        }
    }
}

/// Whether `semantic` only restates `raw` up to case and underscores.
pub fn derivable(raw: &str, semantic: &str) -> bool {
    let raw = raw.to_lowercase();
    let semantic = semantic.to_lowercase();
    semantic == raw || semantic == raw.replace('_', " ") || semantic == raw.replace('_', "")
}

fn quote(s: &str) -> String {
    s.replace('\'', "''")
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// COMMENT text for a column, if one is needed.
pub fn column_comment(
    raw: &str,
    semantic: &str,
    values: &[String],
    opts: &PromptOptions,
) -> Option<String> {
    if derivable(raw, semantic) && values.is_empty() {
        return None;
    }
    let mut comment = semantic.to_string();
    if !values.is_empty() {
        let shown: Vec<String> = values
            .iter()
            .map(|v| one_line(v).chars().take(opts.max_value_chars).collect())
            .collect();
        comment.push_str(&format!(" (e.g. {})", shown.join(", ")));
    }
    Some(comment)
}

fn render_table(
    catalog: &SchemaCatalog,
    sub: &SubSchema,
    t: TableId,
    opts: &PromptOptions,
) -> String {
    let table = catalog.table(t);
    let columns: Vec<ColumnId> = sub
        .column_ids()
        .into_iter()
        .filter(|&c| catalog.column(c).table == t)
        .collect();
    let mut lines: Vec<String> = columns
        .iter()
        .map(|&c| {
            let col = catalog.column(c);
            let empty = Vec::new();
            let values = sub.values.get(&c).unwrap_or(&empty);
            match column_comment(&col.name, &col.semantic_name, values, opts) {
                Some(comment) => format!(
                    "{} {} COMMENT '{}'",
                    col.name,
                    col.ty.as_str(),
                    quote(&comment)
                ),
                None => format!("{} {}", col.name, col.ty.as_str()),
            }
        })
        .collect();
    let keys: Vec<&str> = catalog
        .primary_keys_of(t)
        .filter(|k| sub.has_column(*k))
        .map(|k| catalog.column(k).name.as_str())
        .collect();
    if !keys.is_empty() {
        lines.push(format!("PRIMARY KEY ({})", keys.join(", ")));
    }
    for &(from, to) in &catalog.foreign_keys {
        if catalog.column(from).table == t && sub.has_column(from) && sub.has_column(to) {
            let target = catalog.column(to);
            lines.push(format!(
                "FOREIGN KEY ({}) REFERENCES {}({})",
                catalog.column(from).name,
                catalog.table(target.table).name,
                target.name
            ));
        }
    }
    let body: Vec<String> = lines.iter().map(|l| format!("    {l}")).collect();
    let mut out = format!("CREATE TABLE {}(\n{})", table.name, body.join(",\n"));
    if !derivable(&table.name, &table.semantic_name) {
        out.push_str(&format!(" COMMENT '{}'", quote(&table.semantic_name)));
    }
    out.push(';');
    out
}

pub fn render_prompt(
    catalog: &SchemaCatalog,
    sub: &SubSchema,
    examples: &SelectionResult,
    question: &str,
    db_id: &str,
    opts: &PromptOptions,
) -> Result<PromptBundle, PromptError> {
    for found in [&sub.db_id, &catalog.db_id] {
        if found != db_id {
            return Err(PromptError::InconsistentBundle {
                expected: db_id.to_string(),
                found: found.clone(),
            });
        }
    }
    let mut text = format!("# Given SQLite database schema {db_id}:\n");
    for &t in &sub.tables {
        text.push_str(&render_table(catalog, sub, t, opts));
        text.push('\n');
    }
    text.push_str("\n# Your task is to translate Question into SQL.\n");
    if !examples.chosen.is_empty() {
        text.push_str("# Some examples are provided based on similar problems:\n");
        for ex in &examples.chosen {
            text.push_str(&format!(
                "Question: {}\nSQL: {}\n",
                one_line(&ex.question),
                one_line(&ex.sql)
            ));
        }
    }
    text.push_str(&format!(
        "\n# Complete the following SQL for schema {db_id}:\nQuestion: {}\nSQL:",
        one_line(question)
    ));
    Ok(PromptBundle {
        text,
        sub: sub.clone(),
        examples: examples.clone(),
        question: question.to_string(),
        db_id: db_id.to_string(),
    })
}
