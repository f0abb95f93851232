//! Canonical single-line rendering: uppercase keywords, single spaces,
//! parentheses only where the tree shape needs them.

use super::ast::{AstNode, NodeKind};

pub fn render(node: &AstNode) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

fn precedence(node: &AstNode) -> u8 {
    if node.kind != NodeKind::Operator {
        return 9;
    }
    match (node.text.as_str(), node.children.len()) {
        ("or", _) => 1,
        ("and", _) => 2,
        ("not", 1) => 3,
        ("-", 1) => 8,
        ("+" | "-" | "||", _) => 6,
        ("*" | "/" | "%", _) => 7,
        ("exists" | "not exists", _) => 9,
        _ => 4,
    }
}

fn write_operand(node: &AstNode, min: u8, out: &mut String) {
    if precedence(node) < min {
        out.push('(');
        write_node(node, out);
        out.push(')');
    } else {
        write_node(node, out);
    }
}

fn write_list(nodes: &[AstNode], out: &mut String) {
    for (i, n) in nodes.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_node(n, out);
    }
}

fn write_identifier(text: &str, out: &mut String) {
    for (i, part) in text.split('.').enumerate() {
        if i > 0 {
            out.push('.');
        }
        let plain = !part.is_empty()
            && part
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_' || !c.is_ascii())
            && part
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || !c.is_ascii());
        if plain || part == "*" {
            out.push_str(part);
        } else {
            out.push('`');
            out.push_str(&part.replace('`', "``"));
            out.push('`');
        }
    }
}

fn write_node(node: &AstNode, out: &mut String) {
    match node.kind {
        NodeKind::Select => {
            out.push_str("SELECT ");
            if !node.text.is_empty() {
                out.push_str(&node.text.to_ascii_uppercase());
                out.push(' ');
            }
            let split = node
                .children
                .iter()
                .position(|c| c.kind.is_clause())
                .unwrap_or(node.children.len());
            write_list(&node.children[..split], out);
            for clause in &node.children[split..] {
                out.push(' ');
                write_node(clause, out);
            }
        }
        NodeKind::From => {
            out.push_str("FROM ");
            for (i, c) in node.children.iter().enumerate() {
                if i > 0 && c.kind == NodeKind::Join && c.text != "," {
                    out.push(' ');
                }
                write_node(c, out);
            }
        }
        NodeKind::Join => {
            if node.text == "," {
                out.push_str(", ");
            } else {
                out.push_str(&node.text.to_ascii_uppercase());
                out.push(' ');
            }
            for (i, c) in node.children.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_node(c, out);
            }
        }
        NodeKind::On => {
            out.push_str("ON ");
            write_list(&node.children, out);
        }
        NodeKind::Where => {
            out.push_str("WHERE ");
            write_list(&node.children, out);
        }
        NodeKind::GroupBy => {
            out.push_str("GROUP BY ");
            write_list(&node.children, out);
        }
        NodeKind::Having => {
            out.push_str("HAVING ");
            write_list(&node.children, out);
        }
        NodeKind::OrderBy => {
            out.push_str("ORDER BY ");
            write_list(&node.children, out);
        }
        NodeKind::Limit => {
            out.push_str("LIMIT ");
            write_node(&node.children[0], out);
            if let Some(offset) = node.children.get(1) {
                out.push_str(" OFFSET ");
                write_node(offset, out);
            }
        }
        NodeKind::SetOp => {
            write_node(&node.children[0], out);
            out.push(' ');
            out.push_str(&node.text.to_ascii_uppercase());
            out.push(' ');
            write_node(&node.children[1], out);
        }
        NodeKind::Function => {
            out.push_str(&node.text.to_ascii_uppercase());
            out.push('(');
            write_list(&node.children, out);
            out.push(')');
        }
        NodeKind::IdentifierTable | NodeKind::IdentifierColumn => write_identifier(&node.text, out),
        NodeKind::Star => out.push_str(if node.text.is_empty() {
            "*"
        } else {
            &node.text
        }),
        NodeKind::Literal => {
            if node.text == "null" {
                out.push_str("NULL");
            } else {
                out.push_str(&node.text);
            }
        }
        NodeKind::Alias => {
            write_node(&node.children[0], out);
            out.push_str(" AS ");
            write_identifier(&node.text, out);
        }
        NodeKind::Subquery => {
            out.push('(');
            write_node(&node.children[0], out);
            out.push(')');
        }
        NodeKind::Operator => write_operator(node, out),
    }
}

fn write_operator(node: &AstNode, out: &mut String) {
    let prec = precedence(node);
    let op = node.text.as_str();
    let kids = &node.children;
    match (op, kids.len()) {
        ("asc" | "desc", 1) => {
            write_node(&kids[0], out);
            out.push(' ');
            out.push_str(&op.to_ascii_uppercase());
        }
        ("distinct", 1) => {
            out.push_str("DISTINCT ");
            write_node(&kids[0], out);
        }
        ("not", 1) => {
            out.push_str("NOT ");
            write_operand(&kids[0], prec, out);
        }
        ("-", 1) => {
            out.push('-');
            write_operand(&kids[0], prec, out);
        }
        ("exists" | "not exists", 1) => {
            out.push_str(&op.to_ascii_uppercase());
            out.push(' ');
            write_node(&kids[0], out);
        }
        ("between" | "not between", 3) => {
            write_operand(&kids[0], prec + 1, out);
            out.push(' ');
            out.push_str(&op.to_ascii_uppercase());
            out.push(' ');
            write_operand(&kids[1], prec + 1, out);
            out.push_str(" AND ");
            write_operand(&kids[2], prec + 1, out);
        }
        ("in" | "not in", _) => {
            write_operand(&kids[0], prec + 1, out);
            out.push(' ');
            out.push_str(&op.to_ascii_uppercase());
            out.push(' ');
            if kids.len() == 2 && kids[1].kind == NodeKind::Subquery {
                write_node(&kids[1], out);
            } else {
                out.push('(');
                write_list(&kids[1..], out);
                out.push(')');
            }
        }
        _ => {
            // binary, left associative
            write_operand(&kids[0], prec, out);
            out.push(' ');
            if op.chars().all(|c| c.is_ascii_alphabetic() || c == ' ') {
                out.push_str(&op.to_ascii_uppercase());
            } else {
                out.push_str(op);
            }
            out.push(' ');
            if let Some(right) = kids.get(1) {
                write_operand(right, prec + 1, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_sql;
    use super::*;

    fn canon(sql: &str) -> String {
        render(&parse_sql(sql).unwrap().root)
    }

    #[test]
    fn keywords_upper_single_spaces() {
        assert_eq!(
            canon("select  T1.name ,count(*) from   a as T1 join b on T1.x=b.y group by T1.name"),
            "SELECT T1.name, COUNT(*) FROM a AS T1 JOIN b ON T1.x = b.y GROUP BY T1.name"
        );
    }

    #[test]
    fn default_sort_direction_is_explicit() {
        assert_eq!(
            canon("SELECT a FROM t ORDER BY a"),
            "SELECT a FROM t ORDER BY a ASC"
        );
    }

    #[test]
    fn parentheses_follow_tree_shape() {
        assert_eq!(
            canon("SELECT a FROM t WHERE (a = 1 OR b = 2) AND c - (d - e) > 0"),
            "SELECT a FROM t WHERE (a = 1 OR b = 2) AND c - (d - e) > 0"
        );
    }

    #[test]
    fn comma_joins_and_strings() {
        assert_eq!(
            canon("SELECT a FROM t, u WHERE b = \"x\""),
            "SELECT a FROM t, u WHERE b = 'x'"
        );
    }
}
