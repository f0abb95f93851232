use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ast::{AstNode, NodeKind, SqlAst};
use super::render::render;
use super::SqlError;

/// Text every identifier and literal leaf carries after masking.
pub const MASK: &str = "_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// Identifiers and values masked; for unseen target databases.
    CrossDomain,
    /// Identifiers kept; JOIN sources and ON operands sorted.
    InDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedAst {
    pub root: AstNode,
    pub mode: NormalizationMode,
}

impl NormalizedAst {
    pub fn render(&self) -> String {
        render(&self.root)
    }

    /// Re-wraps the normalized tree as a plain AST.
    pub fn to_sql_ast(&self) -> SqlAst {
        SqlAst::new(self.root.clone())
    }
}

/// Runs the normalization steps in order: unify identifiers, resolve
/// aliases, then either reorder joins (in-domain) or mask (cross-domain).
pub fn normalize(ast: &SqlAst, mode: NormalizationMode) -> Result<NormalizedAst, SqlError> {
    let mut root = ast.root.clone();
    unify_identifiers(&mut root);
    resolve_aliases(&mut root)?;
    match mode {
        NormalizationMode::InDomain => reorder_joins(&mut root),
        NormalizationMode::CrossDomain => mask(&mut root),
    }
    Ok(NormalizedAst { root, mode })
}

pub fn normalize_sql(sql: &str, mode: NormalizationMode) -> Result<NormalizedAst, SqlError> {
    normalize(&super::parse_sql(sql)?, mode)
}

/// Applies `f` to every node owned by the query scope rooted at `node`,
/// without entering nested subqueries.
fn for_each_own(node: &mut AstNode, f: &mut impl FnMut(&mut AstNode)) {
    f(node);
    for child in &mut node.children {
        if child.kind != NodeKind::Subquery {
            for_each_own(child, f);
        }
    }
}

/// Visits each select node of the statement with its own scope semantics.
fn visit_selects(
    node: &mut AstNode,
    f: &mut impl FnMut(&mut AstNode) -> Result<(), SqlError>,
) -> Result<(), SqlError> {
    if node.kind == NodeKind::Select {
        f(node)?;
        visit_nested(node, f)
    } else {
        node.children
            .iter_mut()
            .try_for_each(|child| visit_selects(child, f))
    }
}

fn visit_nested(
    node: &mut AstNode,
    f: &mut impl FnMut(&mut AstNode) -> Result<(), SqlError>,
) -> Result<(), SqlError> {
    for child in &mut node.children {
        if child.kind == NodeKind::Subquery {
            visit_selects(child, f)?;
        } else {
            visit_nested(child, f)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
enum Source {
    Table { name: String, alias: Option<String> },
    Subquery { alias: Option<String> },
}

impl Source {
    fn names(&self, name: &str) -> bool {
        match self {
            Source::Table { name: t, alias } => t == name || alias.as_deref() == Some(name),
            Source::Subquery { alias } => alias.as_deref() == Some(name),
        }
    }
}

fn sources(select: &AstNode) -> Vec<Source> {
    let Some(from) = select.child(NodeKind::From) else {
        return Vec::new();
    };
    from.children
        .iter()
        .map(|c| {
            if c.kind == NodeKind::Join {
                &c.children[0]
            } else {
                c
            }
        })
        .map(|src| match src.kind {
            NodeKind::Alias => match src.children[0].kind {
                NodeKind::IdentifierTable => Source::Table {
                    name: src.children[0].text.clone(),
                    alias: Some(src.text.clone()),
                },
                _ => Source::Subquery {
                    alias: Some(src.text.clone()),
                },
            },
            NodeKind::IdentifierTable => Source::Table {
                name: src.text.clone(),
                alias: None,
            },
            _ => Source::Subquery { alias: None },
        })
        .collect()
}

fn split_qualifier(text: &str) -> Option<(&str, &str)> {
    text.split_once('.')
}

/// Step 1: lowercase identifiers; drop qualifiers that can only refer to the
/// single source of their scope.
fn unify_identifiers(root: &mut AstNode) {
    let mut lower = |n: &mut AstNode| {
        if n.kind.is_identifier() || n.kind == NodeKind::Star {
            n.text = n.text.to_lowercase();
        }
    };
    lower_all(root, &mut lower);
    let _ = visit_selects(root, &mut |select| {
        let srcs = sources(select);
        if srcs.len() != 1 {
            return Ok(());
        }
        let only = srcs[0].clone();
        for_each_own(select, &mut |n| {
            if n.kind == NodeKind::IdentifierColumn {
                if let Some((q, c)) = split_qualifier(&n.text) {
                    if only.names(q) {
                        n.text = c.to_string();
                    }
                }
            }
        });
        Ok(())
    });
}

fn lower_all(node: &mut AstNode, f: &mut impl FnMut(&mut AstNode)) {
    f(node);
    for c in &mut node.children {
        lower_all(c, f);
    }
}

#[derive(Debug, Clone)]
struct Scope {
    sources: Vec<Source>,
}

impl Scope {
    /// Resolves a qualifier to its replacement: `Some(table)` for a table or
    /// table alias, `None` for a subquery alias (qualifier dropped).
    fn lookup(&self, q: &str) -> Option<Option<String>> {
        self.sources.iter().find(|s| s.names(q)).map(|s| match s {
            Source::Table { name, .. } => Some(name.clone()),
            Source::Subquery { .. } => None,
        })
    }
}

/// Step 2: delete alias-creating nodes; rewrite every reference to the
/// aliased subtree.
fn resolve_aliases(root: &mut AstNode) -> Result<(), SqlError> {
    let mut stack = Vec::new();
    resolve_query(root, &mut stack)
}

fn resolve_query(node: &mut AstNode, stack: &mut Vec<Scope>) -> Result<(), SqlError> {
    match node.kind {
        NodeKind::Select => resolve_select(node, stack),
        _ => {
            for child in &mut node.children {
                resolve_query(child, stack)?;
            }
            Ok(())
        }
    }
}

fn resolve_select(select: &mut AstNode, stack: &mut Vec<Scope>) -> Result<(), SqlError> {
    let scope = Scope {
        sources: sources(select),
    };
    stack.push(scope);

    let mut error = None;
    for_each_own(select, &mut |n| {
        if error.is_some() {
            return;
        }
        if matches!(n.kind, NodeKind::IdentifierColumn | NodeKind::Star) {
            if let Some((q, c)) = split_qualifier(&n.text) {
                let resolved = stack.iter().rev().find_map(|s| s.lookup(q));
                match resolved {
                    Some(Some(table)) => n.text = format!("{table}.{c}"),
                    Some(None) => n.text = c.to_string(),
                    None => error = Some(SqlError::UnresolvableAlias(q.to_string())),
                }
            }
        }
    });
    if let Some(e) = error {
        stack.pop();
        return Err(e);
    }

    // projection aliases: name -> aliased expression
    let split = select
        .children
        .iter()
        .position(|c| c.kind.is_clause())
        .unwrap_or(select.children.len());
    let mut projected: HashMap<String, AstNode> = HashMap::new();
    for item in &mut select.children[..split] {
        if item.kind == NodeKind::Alias {
            let expr = item.children.remove(0);
            projected.insert(item.text.clone(), expr.clone());
            *item = expr;
        }
    }
    if !projected.is_empty() {
        for clause in &mut select.children[split..] {
            if matches!(
                clause.kind,
                NodeKind::GroupBy | NodeKind::Having | NodeKind::OrderBy
            ) {
                for_each_own(clause, &mut |n| {
                    if n.kind == NodeKind::IdentifierColumn {
                        if let Some(expr) = projected.get(&n.text) {
                            *n = expr.clone();
                        }
                    }
                });
            }
        }
    }

    // table and subquery aliases in FROM
    if let Some(from) = select.child_mut(NodeKind::From) {
        for c in &mut from.children {
            let src = if c.kind == NodeKind::Join {
                &mut c.children[0]
            } else {
                c
            };
            if src.kind == NodeKind::Alias {
                *src = src.children.remove(0);
            }
        }
    }

    let result = resolve_nested(select, stack);
    stack.pop();
    result
}

fn resolve_nested(node: &mut AstNode, stack: &mut Vec<Scope>) -> Result<(), SqlError> {
    for child in &mut node.children {
        if child.kind == NodeKind::Subquery {
            resolve_query(&mut child.children[0], stack)?;
        } else {
            resolve_nested(child, stack)?;
        }
    }
    Ok(())
}

const INNER_JOINS: &[&str] = &["join", "inner join", ",", "cross join"];

/// Step 3 (in-domain): canonical order of joined sources and ON operands.
fn reorder_joins(root: &mut AstNode) {
    reorder_in(root);
}

fn reorder_in(node: &mut AstNode) {
    for child in &mut node.children {
        reorder_in(child);
    }
    if node.kind != NodeKind::From || node.children.len() < 2 {
        return;
    }
    let all_inner = node.children[1..]
        .iter()
        .all(|j| INNER_JOINS.contains(&j.text.as_str()));
    if !all_inner {
        return;
    }
    let mut srcs: Vec<AstNode> = Vec::with_capacity(node.children.len());
    srcs.push(node.children[0].clone());
    for j in &node.children[1..] {
        srcs.push(j.children[0].clone());
    }
    srcs.sort_by_cached_key(render);

    let mut conds: Vec<AstNode> = Vec::new();
    for j in &mut node.children[1..] {
        if let Some(on) = j.child_mut(NodeKind::On) {
            for e in &mut on.children {
                order_equalities(e);
            }
            conds.push(on.children[0].clone());
        }
    }
    conds.sort_by_cached_key(render);

    let mut srcs = srcs.into_iter();
    let mut conds = conds.into_iter();
    node.children[0] = srcs.next().expect("from has a source");
    for j in &mut node.children[1..] {
        j.children[0] = srcs.next().expect("one source per join");
        if let Some(on) = j.child_mut(NodeKind::On) {
            on.children[0] = conds.next().expect("one condition per ON");
        }
    }
}

fn order_equalities(e: &mut AstNode) {
    match (e.kind, e.text.as_str()) {
        (NodeKind::Operator, "and" | "or") => {
            for c in &mut e.children {
                order_equalities(c);
            }
        }
        (NodeKind::Operator, "=")
            if e.children.len() == 2 && render(&e.children[1]) < render(&e.children[0]) =>
        {
            e.children.swap(0, 1);
        }
        _ => {}
    }
}

/// Step 4 (cross-domain): every identifier and literal leaf becomes `_`.
fn mask(node: &mut AstNode) {
    match node.kind {
        NodeKind::IdentifierTable | NodeKind::IdentifierColumn | NodeKind::Literal => {
            node.text = MASK.to_string();
        }
        NodeKind::Star => node.text = "*".to_string(),
        _ => {}
    }
    for c in &mut node.children {
        mask(c);
    }
}
