//! Database catalogs and hybrid sub-schema selection.

mod catalog;
mod refs;
mod select;

pub use catalog::{
    CatalogStore, Column, ColumnId, ColumnType, KeyIndex, SchemaCatalog, SpiderSchema, Table,
    TableId, ValuesSidecar, DEFAULT_VALUE_CAP,
};
pub use refs::{elements_of, query_elements, unique_column_count, QueryElements};
pub use select::{
    column_document, dynamic_k, dynamic_k_for, select_sub_schema, ColumnIndex, Provenance,
    SelectedColumn, SelectionMode, SubSchema, MAX_DYNAMIC_K, MIN_DYNAMIC_K,
};

use crate::sql::SqlError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchemaError {
    #[error("invalid catalog {db_id}: {message}")]
    InvalidCatalog { db_id: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed {path}: {message}")]
    Format { path: String, message: String },
    #[error("selection mode needs an approximated query")]
    MissingApproximation,
    #[error(transparent)]
    Sql(#[from] SqlError),
}
