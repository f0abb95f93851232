use std::fmt;

use serde::{Deserialize, Serialize};

/// Node taxonomy of the SQL trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Select,
    From,
    Join,
    On,
    Where,
    GroupBy,
    Having,
    OrderBy,
    Limit,
    SetOp,
    Function,
    IdentifierTable,
    IdentifierColumn,
    Alias,
    Literal,
    Operator,
    Star,
    Subquery,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Select => "select",
            NodeKind::From => "from",
            NodeKind::Join => "join",
            NodeKind::On => "on",
            NodeKind::Where => "where",
            NodeKind::GroupBy => "group-by",
            NodeKind::Having => "having",
            NodeKind::OrderBy => "order-by",
            NodeKind::Limit => "limit",
            NodeKind::SetOp => "set-op",
            NodeKind::Function => "function",
            NodeKind::IdentifierTable => "identifier-table",
            NodeKind::IdentifierColumn => "identifier-column",
            NodeKind::Alias => "alias",
            NodeKind::Literal => "literal",
            NodeKind::Operator => "operator",
            NodeKind::Star => "star",
            NodeKind::Subquery => "subquery",
        }
    }

    /// Kinds whose text is an identifier (lowercased during normalization).
    pub fn is_identifier(self) -> bool {
        matches!(
            self,
            NodeKind::IdentifierTable | NodeKind::IdentifierColumn | NodeKind::Alias
        )
    }

    /// Clause kinds that hang directly below a `select` node.
    pub fn is_clause(self) -> bool {
        matches!(
            self,
            NodeKind::From
                | NodeKind::Where
                | NodeKind::GroupBy
                | NodeKind::Having
                | NodeKind::OrderBy
                | NodeKind::Limit
        )
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One node of a SQL tree.
///
/// Leaves (identifiers, literals, stars) carry their text. A few inner kinds
/// carry a label as well: function names (`count`), operators (`=`, `and`,
/// `asc`), join flavours (`join`, `left join`, `,`), set operators and
/// `distinct` on a select node. All other inner nodes have empty text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn leaf(kind: NodeKind, text: impl Into<String>) -> Self {
        AstNode {
            kind,
            text: text.into(),
            children: Vec::new(),
        }
    }

    pub fn inner(kind: NodeKind, children: Vec<AstNode>) -> Self {
        AstNode {
            kind,
            text: String::new(),
            children,
        }
    }

    pub fn labeled(kind: NodeKind, text: impl Into<String>, children: Vec<AstNode>) -> Self {
        AstNode {
            kind,
            text: text.into(),
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Number of nodes in the subtree rooted here.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(AstNode::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(AstNode::depth).max().unwrap_or(0)
    }

    /// Pre-order traversal.
    pub fn preorder(&self) -> Vec<&AstNode> {
        let mut out = Vec::with_capacity(self.size());
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    pub fn child(&self, kind: NodeKind) -> Option<&AstNode> {
        self.children.iter().find(|c| c.kind == kind)
    }

    pub fn child_mut(&mut self, kind: NodeKind) -> Option<&mut AstNode> {
        self.children.iter_mut().find(|c| c.kind == kind)
    }

    /// Checks the structural invariants: leaves carry text (or are stars),
    /// and kinds that need children have them.
    pub fn validate(&self) -> Result<(), String> {
        for node in self.preorder() {
            let needs_children = matches!(
                node.kind,
                NodeKind::Select
                    | NodeKind::From
                    | NodeKind::Join
                    | NodeKind::On
                    | NodeKind::Where
                    | NodeKind::GroupBy
                    | NodeKind::Having
                    | NodeKind::OrderBy
                    | NodeKind::Limit
                    | NodeKind::SetOp
                    | NodeKind::Alias
                    | NodeKind::Subquery
                    | NodeKind::Operator
            );
            if needs_children && node.children.is_empty() {
                return Err(format!("{} node without children", node.kind));
            }
            if node.is_leaf() && node.text.is_empty() && node.kind != NodeKind::Star {
                return Err(format!("{} leaf without text", node.kind));
            }
        }
        Ok(())
    }
}

/// Dialect accepted by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dialect {
    #[default]
    GenericSqlite,
}

/// A parsed statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqlAst {
    pub root: AstNode,
    #[serde(default)]
    pub dialect: Dialect,
}

impl SqlAst {
    pub fn new(root: AstNode) -> Self {
        SqlAst {
            root,
            dialect: Dialect::GenericSqlite,
        }
    }

    pub fn render(&self) -> String {
        super::render::render(&self.root)
    }
}
