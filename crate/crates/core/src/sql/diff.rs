//! Change Distilling tree differencing over normalized SQL trees.
//!
//! Matching runs in three phases: roots of equal kind are paired, leaves are
//! paired greedily by bigram similarity of their text, and inner nodes are
//! paired greedily by the share of matched leaves below them. The edit
//! script is then read off the matching.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::ast::{AstNode, NodeKind};
use super::normalize::NormalizedAst;
use super::SqlError;

/// Thresholds of the matcher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatcherConfig {
    /// Minimum bigram Dice similarity for two leaves to match.
    pub leaf_threshold: f64,
    /// Minimum share of matched leaves for two inner nodes to match.
    pub inner_threshold: f64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            leaf_threshold: 0.6,
            inner_threshold: 0.6,
        }
    }
}

/// One tree edit. Node ids are pre-order indices into the source or the
/// target tree; `parent` and `position` locate the node in the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum EditOp {
    Insert {
        target: usize,
        kind: NodeKind,
        text: String,
        parent: Option<usize>,
        position: usize,
    },
    Delete {
        source: usize,
    },
    Update {
        source: usize,
        target: usize,
        from: String,
        to: String,
        position: usize,
    },
    Move {
        source: usize,
        target: usize,
        parent: Option<usize>,
        position: usize,
    },
    Alignment {
        source: usize,
        target: usize,
        position: usize,
    },
}

impl EditOp {
    pub fn is_alignment(&self) -> bool {
        matches!(self, EditOp::Alignment { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub insert: usize,
    pub delete: usize,
    pub update: usize,
    pub moves: usize,
    pub alignment: usize,
}

impl OpCounts {
    pub fn total(&self) -> usize {
        self.insert + self.delete + self.update + self.moves + self.alignment
    }
}

impl EditScript {
    pub fn counts(&self) -> OpCounts {
        let mut c = OpCounts::default();
        for op in &self.ops {
            match op {
                EditOp::Insert { .. } => c.insert += 1,
                EditOp::Delete { .. } => c.delete += 1,
                EditOp::Update { .. } => c.update += 1,
                EditOp::Move { .. } => c.moves += 1,
                EditOp::Alignment { .. } => c.alignment += 1,
            }
        }
        c
    }

    /// Applies the script to `source`, producing the tree it describes.
    pub fn apply(&self, source: &AstNode) -> Result<AstNode, ApplyError> {
        apply_script(self, source)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AstSimilarity {
    pub score: f64,
    pub n_alignments: usize,
    pub n_total_ops: usize,
}

/// Diff of two normalized trees; both must share a normalization mode.
pub fn diff(source: &NormalizedAst, target: &NormalizedAst) -> Result<EditScript, SqlError> {
    if source.mode != target.mode {
        return Err(SqlError::ModeMismatch);
    }
    Ok(diff_trees(
        &source.root,
        &target.root,
        &MatcherConfig::default(),
    ))
}

/// Ratio of alignments to all edit operations.
pub fn similarity(
    source: &NormalizedAst,
    target: &NormalizedAst,
) -> Result<AstSimilarity, SqlError> {
    let script = diff(source, target)?;
    Ok(similarity_of(&script))
}

pub fn similarity_of(script: &EditScript) -> AstSimilarity {
    let counts = script.counts();
    let total = counts.total();
    let score = if total == 0 {
        1.0
    } else {
        counts.alignment as f64 / total as f64
    };
    AstSimilarity {
        score,
        n_alignments: counts.alignment,
        n_total_ops: total,
    }
}

/// Pre-order view of a tree.
struct Indexed<'a> {
    nodes: Vec<&'a AstNode>,
    parent: Vec<Option<usize>>,
    position: Vec<usize>,
    size: Vec<usize>,
    leaves: Vec<Vec<usize>>,
}

impl<'a> Indexed<'a> {
    fn new(root: &'a AstNode) -> Self {
        let mut ix = Indexed {
            nodes: Vec::new(),
            parent: Vec::new(),
            position: Vec::new(),
            size: Vec::new(),
            leaves: Vec::new(),
        };
        ix.visit(root, None, 0);
        ix
    }

    fn visit(&mut self, node: &'a AstNode, parent: Option<usize>, position: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(node);
        self.parent.push(parent);
        self.position.push(position);
        self.size.push(1);
        self.leaves.push(Vec::new());
        if node.is_leaf() {
            self.leaves[id].push(id);
        }
        for (i, child) in node.children.iter().enumerate() {
            let c = self.visit(child, Some(id), i);
            self.size[id] += self.size[c];
            let below = std::mem::take(&mut self.leaves[c]);
            self.leaves[id].extend_from_slice(&below);
            self.leaves[c] = below;
        }
        id
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn contains(&self, ancestor: usize, node: usize) -> bool {
        ancestor <= node && node < ancestor + self.size[ancestor]
    }

    fn ancestor_labels(&self, id: usize) -> impl Iterator<Item = (NodeKind, &str)> + '_ {
        std::iter::successors(self.parent[id], move |&p| self.parent[p])
            .map(|p| (self.nodes[p].kind, self.nodes[p].text.as_str()))
    }
}

/// Number of leading ancestor labels two nodes share, nearest first.
fn context(src: &Indexed<'_>, s: usize, dst: &Indexed<'_>, t: usize) -> usize {
    src.ancestor_labels(s)
        .zip(dst.ancestor_labels(t))
        .take_while(|(a, b)| a == b)
        .count()
}

/// Dice coefficient over character bigrams.
pub fn bigram_dice(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let grams = |s: &str| {
        let chars: Vec<char> = s.chars().collect();
        let mut m: HashMap<(char, char), usize> = HashMap::new();
        for w in chars.windows(2) {
            *m.entry((w[0], w[1])).or_default() += 1;
        }
        (m, chars.len().saturating_sub(1))
    };
    let (ga, na) = grams(a);
    let (gb, nb) = grams(b);
    if na == 0 || nb == 0 {
        return 0.0;
    }
    let common: usize = ga
        .iter()
        .map(|(k, &v)| v.min(gb.get(k).copied().unwrap_or(0)))
        .sum();
    2.0 * common as f64 / (na + nb) as f64
}

struct Candidate {
    score: f64,
    context: usize,
    s: usize,
    t: usize,
}

fn best_first(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(b.context.cmp(&a.context))
        .then(a.s.cmp(&b.s))
        .then(a.t.cmp(&b.t))
}

fn matching(s: &Indexed<'_>, t: &Indexed<'_>, cfg: &MatcherConfig) -> Vec<Option<usize>> {
    let mut m_src: Vec<Option<usize>> = vec![None; s.len()];
    let mut m_dst: Vec<Option<usize>> = vec![None; t.len()];

    if s.nodes[0].kind == t.nodes[0].kind {
        m_src[0] = Some(0);
        m_dst[0] = Some(0);
    }

    let mut leaf_pairs = Vec::new();
    for si in (0..s.len()).filter(|&i| s.nodes[i].is_leaf() && m_src[i].is_none()) {
        for ti in (0..t.len()).filter(|&i| t.nodes[i].is_leaf() && m_dst[i].is_none()) {
            if s.nodes[si].kind != t.nodes[ti].kind {
                continue;
            }
            let sim = bigram_dice(&s.nodes[si].text, &t.nodes[ti].text);
            if sim >= cfg.leaf_threshold {
                leaf_pairs.push(Candidate {
                    score: sim,
                    context: context(s, si, t, ti),
                    s: si,
                    t: ti,
                });
            }
        }
    }
    leaf_pairs.sort_by(best_first);
    for c in leaf_pairs {
        if m_src[c.s].is_none() && m_dst[c.t].is_none() {
            m_src[c.s] = Some(c.t);
            m_dst[c.t] = Some(c.s);
        }
    }

    let mut inner_pairs = Vec::new();
    for si in (0..s.len()).filter(|&i| !s.nodes[i].is_leaf() && m_src[i].is_none()) {
        for ti in (0..t.len()).filter(|&i| !t.nodes[i].is_leaf() && m_dst[i].is_none()) {
            if s.nodes[si].kind != t.nodes[ti].kind {
                continue;
            }
            let common = s.leaves[si]
                .iter()
                .filter(|&&l| m_src[l].is_some_and(|m| t.contains(ti, m)))
                .count();
            let ratio = common as f64 / s.leaves[si].len().max(t.leaves[ti].len()) as f64;
            if ratio >= cfg.inner_threshold {
                inner_pairs.push(Candidate {
                    score: ratio,
                    context: context(s, si, t, ti),
                    s: si,
                    t: ti,
                });
            }
        }
    }
    inner_pairs.sort_by(best_first);
    for c in inner_pairs {
        if m_src[c.s].is_none() && m_dst[c.t].is_none() {
            m_src[c.s] = Some(c.t);
            m_dst[c.t] = Some(c.s);
        }
    }
    m_src
}

/// Edit script between two plain trees.
pub fn diff_trees(source: &AstNode, target: &AstNode, cfg: &MatcherConfig) -> EditScript {
    let s = Indexed::new(source);
    let t = Indexed::new(target);
    let m_src = matching(&s, &t, cfg);
    let mut matched_dst = vec![false; t.len()];
    let mut ops = Vec::new();

    for si in 0..s.len() {
        let Some(ti) = m_src[si] else {
            ops.push(EditOp::Delete { source: si });
            continue;
        };
        matched_dst[ti] = true;
        let parents_match = match (s.parent[si], t.parent[ti]) {
            (None, None) => true,
            (Some(ps), Some(pt)) => m_src[ps] == Some(pt),
            _ => false,
        };
        let same_text = s.nodes[si].text == t.nodes[ti].text;
        let position = t.position[ti];
        if !parents_match {
            ops.push(EditOp::Move {
                source: si,
                target: ti,
                parent: t.parent[ti],
                position,
            });
        }
        if !same_text {
            ops.push(EditOp::Update {
                source: si,
                target: ti,
                from: s.nodes[si].text.clone(),
                to: t.nodes[ti].text.clone(),
                position,
            });
        } else if parents_match {
            ops.push(EditOp::Alignment {
                source: si,
                target: ti,
                position,
            });
        }
    }
    for ti in (0..t.len()).filter(|&i| !matched_dst[i]) {
        ops.push(EditOp::Insert {
            target: ti,
            kind: t.nodes[ti].kind,
            text: t.nodes[ti].text.clone(),
            parent: t.parent[ti],
            position: t.position[ti],
        });
    }
    EditScript { ops }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("source node {0} is not covered by the script")]
    Uncovered(usize),
    #[error("source node {0} is placed more than once")]
    Duplicate(usize),
    #[error("target node {0} is produced more than once")]
    DuplicateTarget(usize),
    #[error("node id {0} is out of range")]
    OutOfRange(usize),
    #[error("parent of target node {0} is not produced by the script")]
    Dangling(usize),
    #[error("script does not produce exactly one root")]
    Root,
}

struct Proto {
    kind: NodeKind,
    text: String,
    parent: Option<usize>,
    position: usize,
}

fn apply_script(script: &EditScript, source: &AstNode) -> Result<AstNode, ApplyError> {
    let s = Indexed::new(source);
    let mut image: Vec<Option<usize>> = vec![None; s.len()];
    let mut covered = vec![false; s.len()];
    let mut moved = vec![false; s.len()];
    let check = |id: usize| {
        if id < s.len() {
            Ok(id)
        } else {
            Err(ApplyError::OutOfRange(id))
        }
    };

    for op in &script.ops {
        match op {
            EditOp::Alignment { source, target, .. } | EditOp::Move { source, target, .. } => {
                let si = check(*source)?;
                if covered[si] {
                    return Err(ApplyError::Duplicate(si));
                }
                covered[si] = true;
                image[si] = Some(*target);
                moved[si] = matches!(op, EditOp::Move { .. });
            }
            EditOp::Delete { source } => {
                let si = check(*source)?;
                if covered[si] {
                    return Err(ApplyError::Duplicate(si));
                }
                covered[si] = true;
            }
            EditOp::Update { source, target, .. } => {
                let si = check(*source)?;
                image[si] = Some(*target);
            }
            EditOp::Insert { .. } => {}
        }
    }
    for op in &script.ops {
        if let EditOp::Update { source, .. } = op {
            if !moved[*source] {
                if covered[*source] {
                    return Err(ApplyError::Duplicate(*source));
                }
                covered[*source] = true;
            }
        }
    }
    if let Some(si) = covered.iter().position(|c| !c) {
        return Err(ApplyError::Uncovered(si));
    }

    let mapped_parent = |si: usize| -> Result<Option<usize>, ApplyError> {
        match s.parent[si] {
            None => Ok(None),
            Some(p) => image[p].map(Some).ok_or(ApplyError::Dangling(si)),
        }
    };

    let mut protos: BTreeMap<usize, Proto> = BTreeMap::new();
    let mut put = |id: usize, proto: Proto| -> Result<(), ApplyError> {
        if protos.insert(id, proto).is_some() {
            return Err(ApplyError::DuplicateTarget(id));
        }
        Ok(())
    };
    let mut new_text: HashMap<usize, &str> = HashMap::new();
    for op in &script.ops {
        if let EditOp::Update { source, to, .. } = op {
            new_text.insert(*source, to);
        }
    }
    let text_of = |si: usize| {
        new_text
            .get(&si)
            .map_or_else(|| s.nodes[si].text.clone(), |t| t.to_string())
    };
    for op in &script.ops {
        match op {
            EditOp::Insert {
                target,
                kind,
                text,
                parent,
                position,
            } => put(
                *target,
                Proto {
                    kind: *kind,
                    text: text.clone(),
                    parent: *parent,
                    position: *position,
                },
            )?,
            EditOp::Alignment {
                source,
                target,
                position,
            } => put(
                *target,
                Proto {
                    kind: s.nodes[*source].kind,
                    text: text_of(*source),
                    parent: mapped_parent(*source)?,
                    position: *position,
                },
            )?,
            EditOp::Update {
                source,
                target,
                position,
                ..
            } if !moved[*source] => put(
                *target,
                Proto {
                    kind: s.nodes[*source].kind,
                    text: text_of(*source),
                    parent: mapped_parent(*source)?,
                    position: *position,
                },
            )?,
            EditOp::Move {
                source,
                target,
                parent,
                position,
            } => put(
                *target,
                Proto {
                    kind: s.nodes[*source].kind,
                    text: text_of(*source),
                    parent: *parent,
                    position: *position,
                },
            )?,
            _ => {}
        }
    }

    let mut children: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    let mut roots = Vec::new();
    for (&id, p) in &protos {
        match p.parent {
            None => roots.push(id),
            Some(parent) => {
                if !protos.contains_key(&parent) {
                    return Err(ApplyError::Dangling(id));
                }
                children.entry(parent).or_default().push((p.position, id));
            }
        }
    }
    if roots.len() != 1 {
        return Err(ApplyError::Root);
    }
    fn build(
        id: usize,
        protos: &BTreeMap<usize, Proto>,
        children: &BTreeMap<usize, Vec<(usize, usize)>>,
        depth: usize,
    ) -> Result<AstNode, ApplyError> {
        if depth > protos.len() {
            return Err(ApplyError::Root);
        }
        let p = &protos[&id];
        let mut kids = children.get(&id).cloned().unwrap_or_default();
        kids.sort();
        let mut node = AstNode::labeled(p.kind, p.text.clone(), Vec::with_capacity(kids.len()));
        for (_, k) in kids {
            node.children.push(build(k, protos, children, depth + 1)?);
        }
        Ok(node)
    }
    build(roots[0], &protos, &children, 0)
}
