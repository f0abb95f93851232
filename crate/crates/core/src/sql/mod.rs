//! SQL parsing, canonical rendering, normalization and tree differencing.

mod ast;
mod diff;
mod lexer;
mod normalize;
mod parser;
mod render;

pub use ast::{AstNode, Dialect, NodeKind, SqlAst};
pub use diff::{
    bigram_dice, diff, diff_trees, similarity, similarity_of, ApplyError, AstSimilarity, EditOp,
    EditScript, MatcherConfig, OpCounts,
};
pub use normalize::{normalize, normalize_sql, NormalizationMode, NormalizedAst, MASK};
pub use parser::parse_sql;
pub use render::render;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SqlError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported construct `{construct}` at offset {offset}")]
    Unsupported { offset: usize, construct: String },
    #[error("alias `{0}` does not resolve to any source in scope")]
    UnresolvableAlias(String),
    #[error("trees were normalized in different modes")]
    ModeMismatch,
}
