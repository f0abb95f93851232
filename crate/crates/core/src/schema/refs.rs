use std::collections::BTreeSet;

use crate::sql::{normalize_sql, AstNode, NodeKind, NormalizationMode, NormalizedAst};

use super::{ColumnId, SchemaCatalog, SchemaError, TableId};

/// Schema elements a query touches.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryElements {
    pub tables: BTreeSet<TableId>,
    pub columns: BTreeSet<ColumnId>,
    /// Identifier texts that matched nothing in the catalog.
    pub unresolved: Vec<String>,
}

impl QueryElements {
    /// Tables referenced without any of their columns.
    pub fn bare_tables(&self, catalog: &SchemaCatalog) -> Vec<TableId> {
        self.tables
            .iter()
            .copied()
            .filter(|&t| !self.columns.iter().any(|&c| catalog.column(c).table == t))
            .collect()
    }
}

/// Resolves the tables and columns of `sql` against `catalog`.
pub fn query_elements(catalog: &SchemaCatalog, sql: &str) -> Result<QueryElements, SchemaError> {
    let ast = normalize_sql(sql, NormalizationMode::InDomain)?;
    Ok(elements_of(catalog, &ast))
}

pub fn elements_of(catalog: &SchemaCatalog, ast: &NormalizedAst) -> QueryElements {
    let mut out = QueryElements::default();
    walk(catalog, &ast.root, &mut Vec::new(), &mut out);
    out.unresolved.sort();
    out.unresolved.dedup();
    out
}

fn walk(
    catalog: &SchemaCatalog,
    node: &AstNode,
    scopes: &mut Vec<Vec<TableId>>,
    out: &mut QueryElements,
) {
    if node.kind != NodeKind::Select {
        for child in &node.children {
            walk(catalog, child, scopes, out);
        }
        return;
    }
    let mut own = Vec::new();
    let mut nested = Vec::new();
    collect_own(node, &mut own, &mut nested);

    let mut scope = Vec::new();
    for leaf in own.iter().filter(|n| n.kind == NodeKind::IdentifierTable) {
        match catalog.find_table(&leaf.text) {
            Some(t) => {
                scope.push(t);
                out.tables.insert(t);
            }
            None => out.unresolved.push(leaf.text.clone()),
        }
    }
    scopes.push(scope);
    for leaf in &own {
        match leaf.kind {
            NodeKind::IdentifierColumn => resolve_column(catalog, &leaf.text, scopes, out),
            NodeKind::Star => {
                if let Some((q, _)) = leaf.text.rsplit_once('.') {
                    match catalog.find_table(q) {
                        Some(t) => {
                            out.tables.insert(t);
                        }
                        None => out.unresolved.push(leaf.text.clone()),
                    }
                }
            }
            _ => {}
        }
    }
    for sub in nested {
        walk(catalog, sub, scopes, out);
    }
    scopes.pop();
}

fn collect_own<'a>(node: &'a AstNode, own: &mut Vec<&'a AstNode>, nested: &mut Vec<&'a AstNode>) {
    for child in &node.children {
        if child.kind == NodeKind::Subquery {
            nested.push(child);
        } else if child.is_leaf() {
            own.push(child);
        } else {
            collect_own(child, own, nested);
        }
    }
}

fn resolve_column(
    catalog: &SchemaCatalog,
    text: &str,
    scopes: &[Vec<TableId>],
    out: &mut QueryElements,
) {
    if let Some((q, c)) = text.rsplit_once('.') {
        if let Some(col) = catalog
            .find_table(q)
            .and_then(|t| catalog.find_column(t, c))
        {
            out.tables.insert(catalog.column(col).table);
            out.columns.insert(col);
        } else {
            out.unresolved.push(text.to_string());
        }
        return;
    }
    // Innermost scope first, then enclosing ones.
    let found = scopes
        .iter()
        .rev()
        .find_map(|scope| scope.iter().find_map(|&t| catalog.find_column(t, text)));
    match found {
        Some(col) => {
            out.columns.insert(col);
        }
        None => out.unresolved.push(text.to_string()),
    }
}

/// Number of distinct column identifiers in an in-domain normalized tree.
pub fn unique_column_count(ast: &NormalizedAst) -> usize {
    ast.root
        .preorder()
        .into_iter()
        .filter(|n| n.kind == NodeKind::IdentifierColumn)
        .map(|n| n.text.as_str())
        .collect::<BTreeSet<_>>()
        .len()
}
