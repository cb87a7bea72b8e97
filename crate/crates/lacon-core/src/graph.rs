//! Labeled graphs and linear vertex orders.
//!
//! Vertices are addressed by dense indices in declaration order; names are
//! kept alongside for IO and witnesses.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Label carried by the apex vertex added by [`add_apex`].
pub const APEX_LABEL: &str = "APEX";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    #[error("order does not match the vertex set: {0}")]
    OrderMismatch(String),
    #[error("duplicate rank {0}")]
    DuplicateRank(u64),
}

/// Names consist of ASCII letters, digits, `_`, and the copy separator `@`.
pub fn is_valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'@')
}

/// Finite simple graph with named vertices, unary labels and an optional
/// symmetric auxiliary relation (the `sim` relation of copy operations).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    adj: Vec<BTreeSet<usize>>,
    labels: BTreeMap<String, BTreeSet<usize>>,
    sim: Vec<BTreeSet<usize>>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on `names` without edges.
    pub fn with_vertices<S: AsRef<str>>(names: &[S]) -> Result<Self, GraphError> {
        let mut g = Self::new();
        for n in names {
            g.add_vertex(n.as_ref())?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, name: &str) -> Result<usize, GraphError> {
        if !is_valid_name(name) {
            return Err(GraphError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateVertex(name.to_string()));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.adj.push(BTreeSet::new());
        self.sim.push(BTreeSet::new());
        Ok(id)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(self.names[a].clone()));
        }
        self.adj[a].insert(b);
        self.adj[b].insert(a);
        Ok(())
    }

    pub fn add_edge_by_name(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        let (x, y) = (self.require(a)?, self.require(b)?);
        self.add_edge(x, y)
    }

    pub fn add_sim(&mut self, a: usize, b: usize) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(self.names[a].clone()));
        }
        self.sim[a].insert(b);
        self.sim[b].insert(a);
        Ok(())
    }

    pub fn add_sim_by_name(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        let (x, y) = (self.require(a)?, self.require(b)?);
        self.add_sim(x, y)
    }

    pub fn add_label(&mut self, label: &str, v: usize) {
        self.labels.entry(label.to_string()).or_default().insert(v);
    }

    pub fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.vertex(name)
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    /// Stored auxiliary pair (never reflexive).
    pub fn has_sim_pair(&self, a: usize, b: usize) -> bool {
        self.sim[a].contains(&b)
    }

    /// Semantics of the `sim` atom: same origin, which includes identity.
    pub fn sim_related(&self, a: usize, b: usize) -> bool {
        a == b || self.sim[a].contains(&b)
    }

    pub fn has_aux(&self) -> bool {
        self.sim.iter().any(|s| !s.is_empty())
    }

    pub fn has_label(&self, label: &str, v: usize) -> bool {
        self.labels.get(label).is_some_and(|s| s.contains(&v))
    }

    pub fn labels(&self) -> impl Iterator<Item = (&str, &BTreeSet<usize>)> {
        self.labels.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn label_members(&self, label: &str) -> Option<&BTreeSet<usize>> {
        self.labels.get(label)
    }

    /// Sorted label names carried by `v`.
    pub fn labels_of(&self, v: usize) -> Vec<&str> {
        self.labels
            .iter()
            .filter(|(_, s)| s.contains(&v))
            .map(|(k, _)| k.as_str())
            .collect()
    }

    /// Edges as index pairs `(a, b)` with `a < b`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn sim_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sim
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    /// Adjacency lists of the edge relation.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.adj.iter().map(|s| s.iter().copied().collect()).collect()
    }

    /// Adjacency lists of the Gaifman graph (edges together with `sim` pairs).
    pub fn gaifman_adjacency(&self) -> Vec<Vec<usize>> {
        self.adj
            .iter()
            .zip(self.sim.iter())
            .map(|(a, s)| a.union(s).copied().collect())
            .collect()
    }

    /// Edge set keyed by names, each pair sorted lexicographically.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .map(|(a, b)| name_pair(&self.names[a], &self.names[b]))
            .collect()
    }

    /// Compares vertex sets and edge sets by name, ignoring declaration
    /// order, labels and the auxiliary relation. Returns the mismatches.
    pub fn structural_difference(&self, other: &LabeledGraph) -> Vec<String> {
        let mut out = Vec::new();
        let mine: BTreeSet<&str> = self.names.iter().map(String::as_str).collect();
        let theirs: BTreeSet<&str> = other.names.iter().map(String::as_str).collect();
        for v in mine.symmetric_difference(&theirs) {
            out.push(format!("vertex {v}"));
        }
        let (e1, e2) = (self.named_edges(), other.named_edges());
        for (a, b) in e1.symmetric_difference(&e2) {
            out.push(format!("{a}-{b}"));
        }
        out
    }

    pub fn same_structure(&self, other: &LabeledGraph) -> bool {
        self.structural_difference(other).is_empty()
    }

    /// Copy without labels and auxiliary pairs.
    pub fn unlabeled(&self) -> LabeledGraph {
        let mut g = self.clone();
        g.labels.clear();
        for s in &mut g.sim {
            s.clear();
        }
        g
    }

    /// Induced subgraph on the vertices not listed in `names`.
    pub fn remove_vertices<S: AsRef<str>>(&self, names: &[S]) -> Result<LabeledGraph, GraphError> {
        let mut drop = BTreeSet::new();
        for n in names {
            drop.insert(self.require(n.as_ref())?);
        }
        Ok(self.induced(|v| !drop.contains(&v)))
    }

    /// Induced subgraph on vertices accepted by `keep`, in declaration order.
    pub fn induced(&self, keep: impl Fn(usize) -> bool) -> LabeledGraph {
        let mut g = LabeledGraph::new();
        let mut map = alloc::vec![usize::MAX; self.vertex_count()];
        for v in 0..self.vertex_count() {
            if keep(v) {
                map[v] = g.names.len();
                g.add_vertex(&self.names[v]).expect("names are unique");
            }
        }
        for (a, b) in self.edges() {
            if map[a] != usize::MAX && map[b] != usize::MAX {
                g.add_edge(map[a], map[b]).expect("no loops");
            }
        }
        for (a, b) in self.sim_pairs() {
            if map[a] != usize::MAX && map[b] != usize::MAX {
                g.add_sim(map[a], map[b]).expect("no loops");
            }
        }
        for (label, members) in &self.labels {
            for &v in members {
                if map[v] != usize::MAX {
                    g.add_label(label, map[v]);
                }
            }
        }
        g
    }

    /// A vertex name built from `base` that is not yet used.
    pub fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.index.contains_key(&name) {
            name.push('_');
        }
        name
    }

    /// An apex vertex of this graph: carries [`APEX_LABEL`] and is adjacent
    /// to every other vertex.
    pub fn apex(&self) -> Option<usize> {
        let members = self.labels.get(APEX_LABEL)?;
        members
            .iter()
            .copied()
            .find(|&v| self.adj[v].len() + 1 == self.vertex_count())
    }
}

pub(crate) fn name_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Injective ranking of a vertex set, stored densely as an ascending sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearOrder {
    sequence: Vec<String>,
    ranks: BTreeMap<String, usize>,
}

impl LinearOrder {
    /// Order whose ranks are the positions in `sequence`.
    pub fn from_sequence<S: AsRef<str>>(sequence: &[S]) -> Result<Self, GraphError> {
        let mut order = LinearOrder::default();
        for (i, name) in sequence.iter().enumerate() {
            let name = name.as_ref();
            if order.ranks.insert(name.to_string(), i).is_some() {
                return Err(GraphError::DuplicateVertex(name.to_string()));
            }
            order.sequence.push(name.to_string());
        }
        Ok(order)
    }

    /// Normalizes arbitrary injective ranks to `0..n`.
    pub fn from_ranks<I: IntoIterator<Item = (String, u64)>>(ranks: I) -> Result<Self, GraphError> {
        let mut by_rank: BTreeMap<u64, String> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (name, rank) in ranks {
            if !seen.insert(name.clone()) {
                return Err(GraphError::DuplicateVertex(name));
            }
            if by_rank.insert(rank, name).is_some() {
                return Err(GraphError::DuplicateRank(rank));
            }
        }
        let seq: Vec<String> = by_rank.into_values().collect();
        Self::from_sequence(&seq)
    }

    /// Declaration order of `g`.
    pub fn identity(g: &LabeledGraph) -> Self {
        Self::from_sequence(g.names()).expect("graph names are unique")
    }

    /// Lexicographic name order of `g`'s vertices.
    pub fn alphabetical(g: &LabeledGraph) -> Self {
        let mut names = g.names().to_vec();
        names.sort();
        Self::from_sequence(&names).expect("graph names are unique")
    }

    /// Order assigning `ranks[v]` to vertex `v` of `g`.
    pub fn from_rank_vector(g: &LabeledGraph, ranks: &[usize]) -> Self {
        let mut seq: Vec<(usize, &str)> = ranks
            .iter()
            .enumerate()
            .map(|(v, &r)| (r, g.name(v)))
            .collect();
        seq.sort();
        let names: Vec<&str> = seq.into_iter().map(|(_, n)| n).collect();
        Self::from_sequence(&names).expect("graph names are unique")
    }

    pub fn sequence(&self) -> &[String] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn rank(&self, name: &str) -> Option<usize> {
        self.ranks.get(name).copied()
    }

    /// Ranks indexed by the vertex indices of `g`; fails unless the order's
    /// domain is exactly the vertex set of `g`.
    pub fn rank_vector(&self, g: &LabeledGraph) -> Result<Vec<usize>, GraphError> {
        if self.sequence.len() != g.vertex_count() {
            return Err(GraphError::OrderMismatch(format!(
                "order has {} entries, graph has {} vertices",
                self.sequence.len(),
                g.vertex_count()
            )));
        }
        g.names()
            .iter()
            .map(|n| {
                self.rank(n)
                    .ok_or_else(|| GraphError::OrderMismatch(format!("vertex {n} is not ranked")))
            })
            .collect()
    }

    /// The order restricted to names not in `drop`, renormalized.
    pub fn without<S: AsRef<str>>(&self, drop: &[S]) -> Self {
        let drop: BTreeSet<&str> = drop.iter().map(|s| s.as_ref()).collect();
        let seq: Vec<&String> = self
            .sequence
            .iter()
            .filter(|n| !drop.contains(n.as_str()))
            .collect();
        Self::from_sequence(&seq).expect("subsequence stays injective")
    }
}

/// Adds a fresh apex vertex labeled [`APEX_LABEL`], adjacent to every other
/// vertex and ranked below all of them.
pub fn add_apex(
    g: &LabeledGraph,
    order: &LinearOrder,
) -> Result<(LabeledGraph, LinearOrder, String), GraphError> {
    order.rank_vector(g)?;
    let name = g.fresh_name("apex");
    let mut out = g.clone();
    let apex = out.add_vertex(&name)?;
    for v in 0..g.vertex_count() {
        out.add_edge(apex, v)?;
    }
    out.add_label(APEX_LABEL, apex);
    let mut seq = Vec::with_capacity(order.len() + 1);
    seq.push(name.clone());
    seq.extend(order.sequence().iter().cloned());
    Ok((out, LinearOrder::from_sequence(&seq)?, name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn golden() -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(&["a", "b", "c", "d", "e"]).unwrap();
        for (x, y) in [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("c", "e"), ("d", "e")] {
            g.add_edge_by_name(x, y).unwrap();
        }
        g
    }

    #[test]
    fn self_loop_rejected() {
        let mut g = LabeledGraph::with_vertices(&["a"]).unwrap();
        assert_eq!(g.add_edge_by_name("a", "a"), Err(GraphError::SelfLoop("a".into())));
    }

    #[test]
    fn apex_on_k2_is_triangle() {
        let mut g = LabeledGraph::with_vertices(&["a", "b"]).unwrap();
        g.add_edge(0, 1).unwrap();
        let order = LinearOrder::identity(&g);
        let (h, o, apex) = add_apex(&g, &order).unwrap();
        assert_eq!(h.edge_count(), 3);
        assert_eq!(o.rank(&apex), Some(0));
        assert_eq!(o.rank("a"), Some(1));
        assert_eq!(h.apex(), h.vertex(&apex));
        let back = h.remove_vertices(&[apex.as_str()]).unwrap();
        assert_eq!(back, g);
        assert_eq!(o.without(&[apex]), order);
    }

    #[test]
    fn apex_on_single_vertex_is_k2() {
        let g = LabeledGraph::with_vertices(&["a"]).unwrap();
        let (h, o, apex) = add_apex(&g, &LinearOrder::identity(&g)).unwrap();
        assert_eq!(h.edge_count(), 1);
        assert_eq!(o.sequence()[0], apex);
    }

    #[test]
    fn removing_e_from_golden_leaves_four_cycle() {
        let h = golden().remove_vertices(&["e"]).unwrap();
        let expected: BTreeSet<(String, String)> = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
            .iter()
            .map(|(x, y)| name_pair(x, y))
            .collect();
        assert_eq!(h.named_edges(), expected);
        assert_eq!(golden().remove_vertices::<&str>(&[]).unwrap(), golden());
        assert!(golden().remove_vertices(&["z"]).is_err());
    }

    #[test]
    fn rank_normalization() {
        let o = LinearOrder::from_ranks(vec![("b".into(), 40), ("a".into(), 7)]).unwrap();
        assert_eq!(o.sequence(), &["a".to_string(), "b".to_string()]);
        assert!(LinearOrder::from_ranks(vec![("b".into(), 1), ("a".into(), 1)]).is_err());
    }

    #[test]
    fn structural_difference_reports_pairs() {
        let mut h = golden();
        h.add_edge_by_name("a", "e").unwrap();
        assert_eq!(golden().structural_difference(&h), vec!["a-e".to_string()]);
    }
}
