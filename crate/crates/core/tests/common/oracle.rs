//! Exhaustive search over every admissible matching.

use std::collections::HashMap;

use text2sql_rag::sql::{normalize_sql, similarity, AstNode, NormalizationMode};

struct Flat<'a> {
    nodes: Vec<&'a AstNode>,
    parent: Vec<Option<usize>>,
    end: Vec<usize>,
    leaves: Vec<Vec<usize>>,
}

fn flatten(root: &AstNode) -> Flat<'_> {
    fn go<'a>(n: &'a AstNode, parent: Option<usize>, f: &mut Flat<'a>) -> usize {
        let id = f.nodes.len();
        f.nodes.push(n);
        f.parent.push(parent);
        f.end.push(0);
        for c in &n.children {
            go(c, Some(id), f);
        }
        f.end[id] = f.nodes.len();
        id
    }
    let mut f = Flat {
        nodes: Vec::new(),
        parent: Vec::new(),
        end: Vec::new(),
        leaves: Vec::new(),
    };
    go(root, None, &mut f);
    f.leaves = (0..f.nodes.len())
        .map(|i| {
            (i..f.end[i])
                .filter(|&j| f.nodes[j].children.is_empty())
                .collect()
        })
        .collect();
    f
}

fn dice(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let grams = |s: &str| -> Vec<String> {
        let c: Vec<char> = s.chars().collect();
        c.windows(2).map(|w| w.iter().collect()).collect()
    };
    let (ga, gb) = (grams(a), grams(b));
    if ga.is_empty() || gb.is_empty() {
        return 0.0;
    }
    let mut pool: HashMap<&String, i32> = HashMap::new();
    for g in &gb {
        *pool.entry(g).or_default() += 1;
    }
    let mut common = 0;
    for g in &ga {
        if let Some(n) = pool.get_mut(g).filter(|n| **n > 0) {
            *n -= 1;
            common += 1;
        }
    }
    2.0 * common as f64 / (ga.len() + gb.len()) as f64
}

fn counts(s: &Flat, t: &Flat, m: &[Option<usize>]) -> (usize, usize) {
    let mut align = 0;
    let mut total = 0;
    let mut hit = vec![false; t.nodes.len()];
    for (i, mi) in m.iter().enumerate() {
        match *mi {
            None => total += 1,
            Some(j) => {
                hit[j] = true;
                let same_parent = match (s.parent[i], t.parent[j]) {
                    (None, None) => true,
                    (Some(p), Some(q)) => m[p] == Some(q),
                    _ => false,
                };
                let same_text = s.nodes[i].text == t.nodes[j].text;
                total += usize::from(!same_parent) + usize::from(!same_text);
                if same_parent && same_text {
                    align += 1;
                    total += 1;
                }
            }
        }
    }
    total += hit.iter().filter(|h| !**h).count();
    (align, total)
}

fn admissible(s: &Flat, t: &Flat, m: &[Option<usize>]) -> bool {
    m.iter().enumerate().all(|(i, mi)| match *mi {
        None => true,
        Some(_) if i == 0 => true,
        Some(j) if s.nodes[i].children.is_empty() => {
            dice(&s.nodes[i].text, &t.nodes[j].text) >= 0.6
        }
        Some(j) => {
            let inside = s.leaves[i]
                .iter()
                .filter(|&&l| m[l].is_some_and(|x| j <= x && x < t.end[j]))
                .count();
            inside as f64 / s.leaves[i].len().max(t.leaves[j].len()) as f64 >= 0.6
        }
    })
}

/// Best (alignments, total) over all admissible one-to-one matchings.
pub fn best_ratio(a: &AstNode, b: &AstNode) -> (usize, usize) {
    let s = flatten(a);
    let t = flatten(b);
    let mut m = vec![None; s.nodes.len()];
    let mut used = vec![false; t.nodes.len()];
    let mut best = (0, 1);
    fn search(
        i: usize,
        s: &Flat,
        t: &Flat,
        m: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut (usize, usize),
    ) {
        if i == s.nodes.len() {
            if admissible(s, t, m) {
                let (al, tot) = counts(s, t, m);
                if al * best.1 > best.0 * tot {
                    *best = (al, tot);
                }
            }
            return;
        }
        m[i] = None;
        search(i + 1, s, t, m, used, best);
        let leaf = s.nodes[i].children.is_empty();
        for j in 0..t.nodes.len() {
            let ok = !used[j]
                && s.nodes[i].kind == t.nodes[j].kind
                && leaf == t.nodes[j].children.is_empty()
                && (i == 0) == (j == 0);
            if ok {
                used[j] = true;
                m[i] = Some(j);
                search(i + 1, s, t, m, used, best);
                used[j] = false;
            }
        }
        m[i] = None;
    }
    search(0, &s, &t, &mut m, &mut used, &mut best);
    best
}

pub const PAIRS: [(&str, &str, NormalizationMode); 25] = {
    use NormalizationMode::{CrossDomain as X, InDomain as I};
    [
        ("SELECT a FROM t", "SELECT a FROM t WHERE b = 1", X),
        ("SELECT a FROM t", "SELECT count(*) FROM t GROUP BY b", X),
        ("SELECT a FROM t", "SELECT a FROM t", X),
        ("SELECT a, b FROM t", "SELECT a FROM t", X),
        (
            "SELECT a FROM t WHERE b = 1",
            "SELECT a FROM t WHERE b > 1",
            X,
        ),
        (
            "SELECT a FROM t ORDER BY b DESC LIMIT 1",
            "SELECT a FROM t ORDER BY b LIMIT 1",
            X,
        ),
        (
            "SELECT a FROM t UNION SELECT b FROM s",
            "SELECT a FROM t INTERSECT SELECT b FROM s",
            X,
        ),
        ("SELECT a FROM t JOIN s ON t.x = s.y", "SELECT a FROM t", X),
        ("SELECT count(*) FROM t", "SELECT max(a) FROM t", X),
        (
            "SELECT a FROM t WHERE b IN (SELECT c FROM s)",
            "SELECT a FROM t",
            X,
        ),
        (
            "SELECT a FROM t GROUP BY a HAVING count(*) > 1",
            "SELECT a FROM t GROUP BY a",
            X,
        ),
        ("SELECT DISTINCT a FROM t", "SELECT a FROM t", X),
        (
            "SELECT a FROM t WHERE b = 1 AND c = 2",
            "SELECT a FROM t WHERE b = 1",
            X,
        ),
        (
            "SELECT avg(a), min(a) FROM t",
            "SELECT min(a), avg(a) FROM t",
            X,
        ),
        (
            "SELECT a FROM t ORDER BY a LIMIT 3",
            "SELECT a FROM t LIMIT 3",
            X,
        ),
        ("SELECT name FROM singer", "SELECT name FROM song", I),
        ("SELECT name FROM singer", "SELECT title FROM singer", I),
        (
            "SELECT name, age FROM singer",
            "SELECT age, name FROM singer",
            I,
        ),
        (
            "SELECT name FROM singer WHERE age > 20",
            "SELECT name FROM singer WHERE age < 20",
            I,
        ),
        (
            "SELECT count(*) FROM singer",
            "SELECT count(*) FROM singers",
            I,
        ),
        (
            "SELECT country FROM singer GROUP BY country",
            "SELECT country, count(*) FROM singer GROUP BY country",
            I,
        ),
        (
            "SELECT name FROM stadium ORDER BY capacity DESC",
            "SELECT name FROM stadium ORDER BY capacity",
            I,
        ),
        (
            "SELECT max(age) FROM people",
            "SELECT min(age) FROM people",
            I,
        ),
        (
            "SELECT a FROM t WHERE b = 'x'",
            "SELECT a FROM t WHERE b = 'y'",
            I,
        ),
        (
            "SELECT name FROM t WHERE id = 1",
            "SELECT id FROM t WHERE name = 1",
            I,
        ),
    ]
};

/// Pairs where the matcher's alignment ratio differs from the exhaustive optimum.
pub fn disagreements() -> Vec<String> {
    let mut out = Vec::new();
    for (i, (a, b, mode)) in PAIRS.iter().enumerate() {
        let na = normalize_sql(a, *mode).unwrap();
        let nb = normalize_sql(b, *mode).unwrap();
        assert!(
            na.root.size() <= 12 && nb.root.size() <= 12,
            "pair {i} too large"
        );
        let got = similarity(&na, &nb).unwrap();
        let (al, tot) = best_ratio(&na.root, &nb.root);
        if got.n_alignments * tot != al * got.n_total_ops {
            out.push(format!(
                "pair {i}: matcher {}/{} oracle {al}/{tot}",
                got.n_alignments, got.n_total_ops
            ));
        }
    }
    out
}
