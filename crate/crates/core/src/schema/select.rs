use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bm25::{Bm25, Bm25Params};
use crate::sql::{normalize_sql, NormalizationMode};
use crate::text::tokenize;

use super::refs::{query_elements, unique_column_count};
use super::{ColumnId, SchemaCatalog, SchemaError, TableId};

/// Why a column is part of a sub-schema, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ApproxQuery,
    Bm25,
    KeyCompletion,
    Unpruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "k")]
pub enum SelectionMode {
    /// The k best BM25 columns.
    Bm25TopK(usize),
    /// Elements of the approximated query only.
    ApproxOnly,
    /// Approximated-query elements, BM25 top-k with k from the query, and key completion.
    HybridDynamic,
    /// The whole catalog.
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectedColumn {
    pub column: ColumnId,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubSchema {
    pub db_id: String,
    pub tables: Vec<TableId>,
    /// Sorted by column id.
    pub columns: Vec<SelectedColumn>,
    pub values: BTreeMap<ColumnId, Vec<String>>,
}

impl SubSchema {
    pub fn full(catalog: &SchemaCatalog) -> Self {
        let mut b = Builder::default();
        for i in 0..catalog.columns.len() {
            b.add(catalog, ColumnId(i), Provenance::Unpruned);
        }
        b.finish(catalog)
    }

    pub fn has_table(&self, t: TableId) -> bool {
        self.tables.binary_search(&t).is_ok()
    }

    pub fn has_column(&self, c: ColumnId) -> bool {
        self.columns.binary_search_by_key(&c, |s| s.column).is_ok()
    }

    pub fn column_ids(&self) -> Vec<ColumnId> {
        self.columns.iter().map(|s| s.column).collect()
    }

    pub fn provenance(&self, c: ColumnId) -> Option<Provenance> {
        self.columns
            .binary_search_by_key(&c, |s| s.column)
            .ok()
            .map(|i| self.columns[i].provenance)
    }

    /// Selected elements as "table" and "table.column" names, for comparing
    /// sub-schemas of different catalogs.
    pub fn element_names(&self, catalog: &SchemaCatalog) -> BTreeSet<String> {
        let tables = self
            .tables
            .iter()
            .map(|t| catalog.table(*t).name.to_lowercase());
        let columns = self.columns.iter().map(|s| {
            let c = catalog.column(s.column);
            format!("{}.{}", catalog.table(c.table).name, c.name).to_lowercase()
        });
        tables.chain(columns).collect()
    }
}

#[derive(Default)]
struct Builder {
    columns: BTreeMap<ColumnId, Provenance>,
    tables: BTreeSet<TableId>,
}

impl Builder {
    fn add(&mut self, catalog: &SchemaCatalog, c: ColumnId, p: Provenance) {
        let e = self.columns.entry(c).or_insert(p);
        *e = (*e).min(p);
        self.tables.insert(catalog.column(c).table);
    }

    fn finish(self, catalog: &SchemaCatalog) -> SubSchema {
        SubSchema {
            db_id: catalog.db_id.clone(),
            tables: self.tables.into_iter().collect(),
            columns: self
                .columns
                .into_iter()
                .map(|(column, provenance)| SelectedColumn { column, provenance })
                .collect(),
            values: BTreeMap::new(),
        }
    }
}

/// Token document of one column: table name, column name and values.
pub fn column_document(catalog: &SchemaCatalog, c: ColumnId) -> Vec<String> {
    let col = catalog.column(c);
    let mut tokens = tokenize(&catalog.table(col.table).semantic_name);
    tokens.extend(tokenize(&col.semantic_name));
    for v in &col.values {
        tokens.extend(tokenize(v));
    }
    tokens
}

/// BM25 index with one document per column of a catalog.
#[derive(Debug, Clone)]
pub struct ColumnIndex {
    bm25: Bm25,
    documents: Vec<Vec<String>>,
}

impl ColumnIndex {
    pub fn build(catalog: &SchemaCatalog, params: Bm25Params) -> Self {
        let documents: Vec<Vec<String>> = (0..catalog.columns.len())
            .map(|i| column_document(catalog, ColumnId(i)))
            .collect();
        ColumnIndex {
            bm25: Bm25::new(&documents, params),
            documents,
        }
    }

    pub fn documents(&self) -> &[Vec<String>] {
        &self.documents
    }

    /// Columns by descending score; ties keep catalog order.
    pub fn score(&self, question: &str) -> Vec<(ColumnId, f64)> {
        self.bm25
            .rank(&tokenize(question))
            .into_iter()
            .map(|(i, s)| (ColumnId(i), s))
            .collect()
    }
}

pub const MIN_DYNAMIC_K: usize = 6;
pub const MAX_DYNAMIC_K: usize = 20;

/// Retrieval depth for a query touching `unique_columns` distinct columns.
pub fn dynamic_k_for(unique_columns: usize) -> usize {
    (unique_columns * 3 / 2).clamp(MIN_DYNAMIC_K, MAX_DYNAMIC_K)
}

pub fn dynamic_k(approx_sql: &str) -> Result<usize, SchemaError> {
    let ast = normalize_sql(approx_sql, NormalizationMode::InDomain)?;
    Ok(dynamic_k_for(unique_column_count(&ast)))
}

pub fn select_sub_schema(
    catalog: &SchemaCatalog,
    index: &ColumnIndex,
    question: &str,
    approx_sql: Option<&str>,
    mode: SelectionMode,
) -> Result<SubSchema, SchemaError> {
    let mut b = Builder::default();
    match mode {
        SelectionMode::Full => return Ok(SubSchema::full(catalog)),
        SelectionMode::Bm25TopK(k) => {
            add_bm25(&mut b, catalog, index, question, k);
            complete_keys(&mut b, catalog);
        }
        SelectionMode::ApproxOnly => {
            let sql = approx_sql.ok_or(SchemaError::MissingApproximation)?;
            let elems = query_elements(catalog, sql)?;
            for &c in &elems.columns {
                b.add(catalog, c, Provenance::ApproxQuery);
            }
            for t in elems.bare_tables(catalog) {
                add_table_keys(&mut b, catalog, t);
            }
        }
        SelectionMode::HybridDynamic => {
            let sql = approx_sql.ok_or(SchemaError::MissingApproximation)?;
            let elems = query_elements(catalog, sql)?;
            for &c in &elems.columns {
                b.add(catalog, c, Provenance::ApproxQuery);
            }
            for t in elems.bare_tables(catalog) {
                add_table_keys(&mut b, catalog, t);
            }
            add_bm25(&mut b, catalog, index, question, dynamic_k(sql)?);
            complete_keys(&mut b, catalog);
        }
    }
    Ok(b.finish(catalog))
}

fn add_bm25(
    b: &mut Builder,
    catalog: &SchemaCatalog,
    index: &ColumnIndex,
    question: &str,
    k: usize,
) {
    for (c, _) in index.score(question).into_iter().take(k) {
        b.add(catalog, c, Provenance::Bm25);
    }
}

/// Primary keys of a table, or its first column when it declares none.
fn add_table_keys(b: &mut Builder, catalog: &SchemaCatalog, t: TableId) {
    let mut keys = catalog.primary_keys_of(t).peekable();
    if keys.peek().is_none() {
        if let Some(first) = catalog.table_columns(t).next() {
            b.add(catalog, first, Provenance::KeyCompletion);
        }
        return;
    }
    for k in keys.collect::<Vec<_>>() {
        b.add(catalog, k, Provenance::KeyCompletion);
    }
}

/// Adds primary keys of selected tables and foreign keys between them.
fn complete_keys(b: &mut Builder, catalog: &SchemaCatalog) {
    let tables: Vec<TableId> = b.tables.iter().copied().collect();
    for &t in &tables {
        for k in catalog.primary_keys_of(t).collect::<Vec<_>>() {
            b.add(catalog, k, Provenance::KeyCompletion);
        }
    }
    for &(from, to) in &catalog.foreign_keys {
        if b.tables.contains(&catalog.column(from).table)
            && b.tables.contains(&catalog.column(to).table)
        {
            b.add(catalog, from, Provenance::KeyCompletion);
            b.add(catalog, to, Provenance::KeyCompletion);
        }
    }
}
