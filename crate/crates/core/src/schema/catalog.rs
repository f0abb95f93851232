use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SchemaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableId(pub usize);

/// Index into the catalog's flattened column list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ColumnId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnType {
    Text,
    Number,
    Time,
    Boolean,
    Others,
}

impl ColumnType {
    fn parse(s: &str) -> Self {
        match s.to_ascii_lowercase().as_str() {
            "text" => ColumnType::Text,
            "number" => ColumnType::Number,
            "time" => ColumnType::Time,
            "boolean" => ColumnType::Boolean,
            _ => ColumnType::Others,
        }
    }

    /// Type keyword used in CREATE TABLE rendering.
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Text => "text",
            ColumnType::Number => "number",
            ColumnType::Time => "time",
            ColumnType::Boolean => "boolean",
            ColumnType::Others => "others",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub semantic_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub table: TableId,
    pub name: String,
    pub semantic_name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
    #[serde(default)]
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaCatalog {
    pub db_id: String,
    pub tables: Vec<Table>,
    pub columns: Vec<Column>,
    pub primary_keys: Vec<ColumnId>,
    pub foreign_keys: Vec<(ColumnId, ColumnId)>,
}

/// One entry of a Spider `tables.json` file.
#[derive(Debug, Clone, Deserialize)]
pub struct SpiderSchema {
    pub db_id: String,
    pub table_names_original: Vec<String>,
    #[serde(default)]
    pub table_names: Vec<String>,
    pub column_names_original: Vec<(i64, String)>,
    #[serde(default)]
    pub column_names: Vec<(i64, String)>,
    pub column_types: Vec<String>,
    #[serde(default)]
    pub primary_keys: Vec<KeyIndex>,
    #[serde(default)]
    pub foreign_keys: Vec<(usize, usize)>,
}

/// A primary key entry: single column, or a composite list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum KeyIndex {
    Single(usize),
    Composite(Vec<usize>),
}

/// Column values per database: db_id -> "table.column" -> distinct values.
pub type ValuesSidecar = BTreeMap<String, BTreeMap<String, Vec<String>>>;

pub const DEFAULT_VALUE_CAP: usize = 1000;

impl SchemaCatalog {
    pub fn from_spider(raw: &SpiderSchema) -> Result<Self, SchemaError> {
        let invalid = |msg: String| SchemaError::InvalidCatalog {
            db_id: raw.db_id.clone(),
            message: msg,
        };
        let tables: Vec<Table> = raw
            .table_names_original
            .iter()
            .enumerate()
            .map(|(i, name)| Table {
                name: name.clone(),
                semantic_name: raw
                    .table_names
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| name.clone()),
            })
            .collect();
        if raw.column_types.len() != raw.column_names_original.len() {
            return Err(invalid(
                "column_types and column_names_original differ in length".into(),
            ));
        }
        // Spider lists a `*` pseudo-column at position 0 with table index -1.
        let mut global: Vec<Option<ColumnId>> = Vec::with_capacity(raw.column_names_original.len());
        let mut columns = Vec::new();
        for (i, (t, name)) in raw.column_names_original.iter().enumerate() {
            if *t < 0 {
                global.push(None);
                continue;
            }
            let t = *t as usize;
            if t >= tables.len() {
                return Err(invalid(format!("column {name} references table {t}")));
            }
            global.push(Some(ColumnId(columns.len())));
            let semantic = raw
                .column_names
                .get(i)
                .map(|(_, s)| s.clone())
                .unwrap_or_else(|| name.clone());
            columns.push(Column {
                table: TableId(t),
                name: name.clone(),
                semantic_name: semantic,
                ty: ColumnType::parse(&raw.column_types[i]),
                values: Vec::new(),
            });
        }
        let resolve = |i: usize| {
            global
                .get(i)
                .copied()
                .flatten()
                .ok_or_else(|| invalid(format!("key references column index {i}")))
        };
        let mut primary_keys = Vec::new();
        for key in &raw.primary_keys {
            match key {
                KeyIndex::Single(i) => primary_keys.push(resolve(*i)?),
                KeyIndex::Composite(is) => {
                    for i in is {
                        primary_keys.push(resolve(*i)?);
                    }
                }
            }
        }
        primary_keys.sort();
        primary_keys.dedup();
        let foreign_keys = raw
            .foreign_keys
            .iter()
            .map(|(a, b)| Ok((resolve(*a)?, resolve(*b)?)))
            .collect::<Result<Vec<_>, SchemaError>>()?;
        let catalog = SchemaCatalog {
            db_id: raw.db_id.clone(),
            tables,
            columns,
            primary_keys,
            foreign_keys,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<(), SchemaError> {
        let invalid = |message: String| SchemaError::InvalidCatalog {
            db_id: self.db_id.clone(),
            message,
        };
        if self.tables.is_empty() {
            return Err(invalid("no tables".into()));
        }
        for (t, table) in self.tables.iter().enumerate() {
            if self.table_columns(TableId(t)).next().is_none() {
                return Err(invalid(format!("table {} has no columns", table.name)));
            }
        }
        let n = self.columns.len();
        let keys = self
            .primary_keys
            .iter()
            .chain(self.foreign_keys.iter().flat_map(|(a, b)| [a, b]));
        for k in keys {
            if k.0 >= n {
                return Err(invalid(format!("key column {} out of range", k.0)));
            }
        }
        Ok(())
    }

    pub fn column(&self, id: ColumnId) -> &Column {
        &self.columns[id.0]
    }

    pub fn table(&self, id: TableId) -> &Table {
        &self.tables[id.0]
    }

    pub fn table_columns(&self, table: TableId) -> impl Iterator<Item = ColumnId> + '_ {
        self.columns
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.table == table)
            .map(|(i, _)| ColumnId(i))
    }

    pub fn find_table(&self, name: &str) -> Option<TableId> {
        self.tables
            .iter()
            .position(|t| t.name.eq_ignore_ascii_case(name))
            .map(TableId)
    }

    pub fn find_column(&self, table: TableId, name: &str) -> Option<ColumnId> {
        self.table_columns(table)
            .find(|&c| self.columns[c.0].name.eq_ignore_ascii_case(name))
    }

    pub fn primary_keys_of(&self, table: TableId) -> impl Iterator<Item = ColumnId> + '_ {
        self.primary_keys
            .iter()
            .copied()
            .filter(move |&c| self.columns[c.0].table == table)
    }

    /// Fills column values from a sidecar entry keyed by "table.column",
    /// keeping at most `cap` distinct values per column in sidecar order.
    pub fn attach_values(&mut self, values: &BTreeMap<String, Vec<String>>, cap: usize) {
        for col in &mut self.columns {
            col.values.clear();
        }
        for (key, vals) in values {
            let Some((t, c)) = key.split_once('.') else {
                continue;
            };
            let Some(t) = self.find_table(t) else {
                continue;
            };
            let Some(c) = self.find_column(t, c) else {
                continue;
            };
            let col = &mut self.columns[c.0];
            for v in vals {
                if col.values.len() >= cap {
                    break;
                }
                if !col.values.contains(v) {
                    col.values.push(v.clone());
                }
            }
        }
    }

    /// Copy of the catalog keeping only the given tables and columns.
    pub fn restrict(&self, tables: &[TableId], columns: &[ColumnId]) -> SchemaCatalog {
        let mut tables = tables.to_vec();
        tables.sort();
        tables.dedup();
        let table_map: BTreeMap<TableId, TableId> = tables
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, TableId(i)))
            .collect();
        let mut keep: Vec<ColumnId> = columns
            .iter()
            .copied()
            .filter(|c| table_map.contains_key(&self.columns[c.0].table))
            .collect();
        keep.sort();
        keep.dedup();
        let col_map: BTreeMap<ColumnId, ColumnId> = keep
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, ColumnId(i)))
            .collect();
        SchemaCatalog {
            db_id: self.db_id.clone(),
            tables: table_map.keys().map(|t| self.tables[t.0].clone()).collect(),
            columns: keep
                .iter()
                .map(|c| {
                    let mut col = self.columns[c.0].clone();
                    col.table = table_map[&col.table];
                    col
                })
                .collect(),
            primary_keys: self
                .primary_keys
                .iter()
                .filter_map(|c| col_map.get(c).copied())
                .collect(),
            foreign_keys: self
                .foreign_keys
                .iter()
                .filter_map(|(a, b)| Some((*col_map.get(a)?, *col_map.get(b)?)))
                .collect(),
        }
    }

    pub fn element_count(&self) -> usize {
        self.tables.len() + self.columns.len()
    }
}

/// Catalogs keyed by database id.
#[derive(Debug, Clone, Default)]
pub struct CatalogStore {
    catalogs: BTreeMap<String, SchemaCatalog>,
}

impl CatalogStore {
    pub fn from_spider_file(path: &Path) -> Result<Self, SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|e| SchemaError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let raw: Vec<SpiderSchema> =
            serde_json::from_str(&text).map_err(|e| SchemaError::Format {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        let mut store = CatalogStore::default();
        for r in &raw {
            store.insert(SchemaCatalog::from_spider(r)?);
        }
        Ok(store)
    }

    pub fn load_values(&mut self, path: &Path, cap: usize) -> Result<(), SchemaError> {
        let text = std::fs::read_to_string(path).map_err(|e| SchemaError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let sidecar: ValuesSidecar =
            serde_json::from_str(&text).map_err(|e| SchemaError::Format {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        for (db, values) in &sidecar {
            if let Some(cat) = self.catalogs.get_mut(db) {
                cat.attach_values(values, cap);
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, catalog: SchemaCatalog) {
        self.catalogs.insert(catalog.db_id.clone(), catalog);
    }

    pub fn get(&self, db_id: &str) -> Option<&SchemaCatalog> {
        self.catalogs.get(db_id)
    }

    pub fn len(&self) -> usize {
        self.catalogs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.catalogs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SchemaCatalog> {
        self.catalogs.values()
    }
}
