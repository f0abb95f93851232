use proptest::prelude::*;
use text2sql_rag::sql::{diff, normalize, normalize_sql, similarity, NormalizationMode};

pub const MODES: [NormalizationMode; 2] =
    [NormalizationMode::CrossDomain, NormalizationMode::InDomain];
pub const COLUMNS: [&str; 5] = ["name", "age", "stadium_id", "year", "capacity"];
pub const AGGS: [&str; 4] = ["count", "max", "min", "avg"];

#[derive(Debug, Clone)]
pub struct Shape {
    pub join: bool,
    pub aliased: bool,
    pub select: Vec<(Option<usize>, usize, usize)>,
    pub filter: Option<(usize, usize, Literal)>,
    pub group: Option<usize>,
    pub order: Option<(usize, bool, u8)>,
}

#[derive(Debug, Clone)]
pub enum Literal {
    Number(u16),
    Text(&'static str),
}

pub fn shape() -> impl Strategy<Value = Shape> {
    let item = (
        proptest::option::of(0..AGGS.len()),
        0..COLUMNS.len(),
        0..2usize,
    );
    let literal = prop_oneof![
        any::<u16>().prop_map(Literal::Number),
        prop::sample::select(vec!["France", "rock", "x"]).prop_map(Literal::Text),
    ];
    (
        any::<bool>(),
        any::<bool>(),
        prop::collection::vec(item, 1..3),
        proptest::option::of((0..COLUMNS.len(), 0..3usize, literal)),
        proptest::option::of(0..COLUMNS.len()),
        proptest::option::of((0..COLUMNS.len(), any::<bool>(), 1..10u8)),
    )
        .prop_map(|(join, aliased, select, filter, group, order)| Shape {
            join,
            aliased: aliased || join,
            select,
            filter,
            group,
            order,
        })
}

impl Shape {
    pub fn has_text_literal(&self) -> bool {
        matches!(self.filter, Some((_, _, Literal::Text(_))))
    }

    pub fn sql(&self, aliases: [&str; 2]) -> String {
        let tables = ["singer", "concert"];
        let source = |i: usize| if self.join { i } else { 0 };
        let col = |c: usize, side: usize| {
            if self.aliased {
                format!("{}.{}", aliases[source(side)], COLUMNS[c])
            } else {
                COLUMNS[c].to_string()
            }
        };
        let items: Vec<String> = self
            .select
            .iter()
            .map(|&(agg, c, side)| match agg {
                Some(0) => "count(*)".to_string(),
                Some(a) => format!("{}({})", AGGS[a], col(c, side)),
                None => col(c, side),
            })
            .collect();
        let mut q = format!("SELECT {} FROM {}", items.join(", "), tables[0]);
        if self.aliased {
            q += &format!(" AS {}", aliases[0]);
        }
        if self.join {
            q += &format!(
                " JOIN {} AS {} ON {}.stadium_id = {}.stadium_id",
                tables[1], aliases[1], aliases[0], aliases[1]
            );
        }
        if let Some((c, op, lit)) = &self.filter {
            let lit = match lit {
                Literal::Number(n) => n.to_string(),
                Literal::Text(t) => format!("'{t}'"),
            };
            q += &format!(" WHERE {} {} {lit}", col(*c, 0), ["=", ">", "<"][*op]);
        }
        if let Some(c) = self.group {
            q += &format!(" GROUP BY {}", col(c, 1));
        }
        if let Some((c, desc, n)) = self.order {
            q += &format!(
                " ORDER BY {} {} LIMIT {n}",
                col(c, 0),
                if desc { "DESC" } else { "ASC" }
            );
        }
        q
    }
}

/// Idempotence, self-similarity, alias and case invariance for one query.
pub fn check_single(s: &Shape) -> Result<(), String> {
    let q = s.sql(["T1", "T2"]);
    let renamed = s.sql(["a", "b"]);
    for mode in MODES {
        let n = normalize_sql(&q, mode).map_err(|e| format!("{q}: {e}"))?;
        if normalize(&n.to_sql_ast(), mode).as_ref() != Ok(&n) {
            return Err(format!("idempotence {mode:?}: {q}"));
        }
        if mode == NormalizationMode::InDomain
            && normalize_sql(&n.render(), mode).as_ref() != Ok(&n)
        {
            return Err(format!("text round trip: {q}"));
        }
        let own = similarity(&n, &n).unwrap();
        if own.score != 1.0 || own.n_alignments != n.root.size() {
            return Err(format!("self similarity {mode:?}: {q}"));
        }
        let r = normalize_sql(&renamed, mode).map_err(|e| format!("{renamed}: {e}"))?;
        if similarity(&n, &r).unwrap().score != 1.0 {
            return Err(format!("alias {mode:?}: {q} / {renamed}"));
        }
        if mode == NormalizationMode::CrossDomain || !s.has_text_literal() {
            let upper = normalize_sql(&q.to_uppercase(), mode).map_err(|e| format!("{q}: {e}"))?;
            if similarity(&n, &upper).unwrap().score != 1.0 {
                return Err(format!("case {mode:?}: {q}"));
            }
        }
    }
    Ok(())
}

/// Score range and script soundness for one pair.
pub fn check_pair(a: &Shape, b: &Shape) -> Result<(), String> {
    let (qa, qb) = (a.sql(["T1", "T2"]), b.sql(["T1", "T2"]));
    for mode in MODES {
        let na = normalize_sql(&qa, mode).unwrap();
        let nb = normalize_sql(&qb, mode).unwrap();
        let sim = similarity(&na, &nb).unwrap();
        if !(0.0..=1.0).contains(&sim.score) {
            return Err(format!("range {mode:?}: {qa} / {qb}"));
        }
        let script = diff(&na, &nb).unwrap();
        if script.apply(&na.root).as_ref() != Ok(&nb.root) {
            return Err(format!("soundness {mode:?}: {qa} -> {qb}"));
        }
    }
    Ok(())
}

pub const SAME_SKELETON: [&str; 2] = [
    "SELECT T2.name, T2.capacity FROM concert AS T1 JOIN stadium AS T2 ON T1.stadium_id = T2.stadium_id WHERE T1.year >= 2014",
    "SELECT name FROM highschooler WHERE grade = 10",
];

pub fn same_skeleton_similarity() -> f64 {
    let x = NormalizationMode::CrossDomain;
    let a = normalize_sql(SAME_SKELETON[0], x).unwrap();
    let b = normalize_sql(SAME_SKELETON[1], x).unwrap();
    similarity(&a, &b).unwrap().score
}
