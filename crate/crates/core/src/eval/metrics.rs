use serde::{Deserialize, Serialize};

use crate::schema::{QueryElements, SchemaCatalog, SubSchema};
use crate::sql::{normalize_sql, NormalizationMode};

/// True when every table and column of the gold query is selected.
pub fn recall(sub: &SubSchema, gold: &QueryElements) -> bool {
    gold.tables.iter().all(|&t| sub.has_table(t)) && gold.columns.iter().all(|&c| sub.has_column(c))
}

/// Share of tables and columns left out of the sub-schema.
pub fn shortening(sub: &SubSchema, catalog: &SchemaCatalog) -> f64 {
    let total = catalog.element_count();
    if total == 0 {
        return 0.0;
    }
    let kept = sub.tables.len() + sub.columns.len();
    (total - kept) as f64 / total as f64
}

/// Exact-match proxy: equal in-domain normalized trees. Unparseable
/// predictions never match.
pub fn em_proxy(pred: &str, gold: &str) -> bool {
    match (
        normalize_sql(pred, NormalizationMode::InDomain),
        normalize_sql(gold, NormalizationMode::InDomain),
    ) {
        (Ok(p), Ok(g)) => p == g,
        _ => false,
    }
}

/// Intervals of mean example similarity, highest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AstBucket {
    #[serde(rename = "[0.95,1.0]")]
    From095,
    #[serde(rename = "[0.9,0.95)")]
    From090,
    #[serde(rename = "[0.85,0.9)")]
    From085,
    #[serde(rename = "[0.8,0.85)")]
    From080,
    #[serde(rename = "[0,0.8)")]
    Below080,
}

impl AstBucket {
    pub const ALL: [AstBucket; 5] = [
        AstBucket::From095,
        AstBucket::From090,
        AstBucket::From085,
        AstBucket::From080,
        AstBucket::Below080,
    ];

    pub fn of(score: f64) -> Self {
        if score >= 0.95 {
            AstBucket::From095
        } else if score >= 0.9 {
            AstBucket::From090
        } else if score >= 0.85 {
            AstBucket::From085
        } else if score >= 0.8 {
            AstBucket::From080
        } else {
            AstBucket::Below080
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AstBucket::From095 => "[0.95,1.0]",
            AstBucket::From090 => "[0.9,0.95)",
            AstBucket::From085 => "[0.85,0.9)",
            AstBucket::From080 => "[0.8,0.85)",
            AstBucket::Below080 => "[0,0.8)",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bucket_edges() {
        assert_eq!(AstBucket::of(0.93), AstBucket::From090);
        assert_eq!(AstBucket::of(0.95), AstBucket::From095);
        assert_eq!(AstBucket::of(1.0), AstBucket::From095);
        assert_eq!(AstBucket::of(0.8), AstBucket::From080);
        assert_eq!(AstBucket::of(0.0), AstBucket::Below080);
    }

    #[test]
    fn em_proxy_ignores_aliases() {
        assert!(em_proxy(
            "SELECT T1.name FROM singer AS T1 JOIN concert AS T2 ON T1.id = T2.sid",
            "SELECT a.name FROM singer AS a JOIN concert AS b ON a.id = b.sid"
        ));
        assert!(!em_proxy("SELECT a FROM t WHERE b = 1", "SELECT a FROM t"));
        assert!(!em_proxy("I cannot answer", "SELECT a FROM t"));
    }
}
