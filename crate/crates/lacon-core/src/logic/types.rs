//! Rank-q types of vertex tuples as hash-consed Hintikka trees.
//!
//! A rank-0 type is the atomic diagram of the tuple. A rank-q type is the
//! rank-(q-1) type of the tuple together with the set of rank-(q-1) types of
//! all one-vertex extensions. Two tuples agree on every formula of quantifier
//! rank at most q exactly when their rank-q types coincide.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Ordering;

use hashbrown::HashMap;

use crate::graph::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TypeError {
    #[error("type rank {rank} exceeds the cap of {cap}")]
    RankCap { rank: u32, cap: u32 },
    #[error("tuple entry {0} is not a vertex")]
    BadVertex(usize),
}

/// Handle to an interned type; only meaningful within its [`TypeTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(u32);

impl TypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Atomic { arity: u32, diagram: Box<[u32]> },
    Compound { rank: u32, arity: u32, base: TypeId, extensions: Box<[TypeId]> },
}

const EQ_BIT: u32 = 1;
const EDGE_BIT: u32 = 2;
const SIM_BIT: u32 = 4;

/// Interner for types and label sets. Types from different graphs share ids
/// when they are equal, so a single table supports cross-graph comparisons.
#[derive(Debug, Default)]
pub struct TypeTable {
    nodes: Vec<Node>,
    lookup: HashMap<Node, TypeId>,
    label_sets: Vec<Vec<String>>,
    label_lookup: HashMap<Vec<String>, u32>,
    order_memo: RefCell<HashMap<(TypeId, TypeId), Ordering>>,
    cap: u32,
}

impl TypeTable {
    /// Table accepting ranks up to `cap`.
    pub fn new(cap: u32) -> Self {
        TypeTable { cap, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rank(&self, id: TypeId) -> u32 {
        match &self.nodes[id.index()] {
            Node::Atomic { .. } => 0,
            Node::Compound { rank, .. } => *rank,
        }
    }

    pub fn arity(&self, id: TypeId) -> u32 {
        match &self.nodes[id.index()] {
            Node::Atomic { arity, .. } | Node::Compound { arity, .. } => *arity,
        }
    }

    fn intern(&mut self, node: Node) -> TypeId {
        if let Some(&id) = self.lookup.get(&node) {
            return id;
        }
        let id = TypeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.lookup.insert(node, id);
        id
    }

    fn label_set(&mut self, labels: Vec<String>) -> u32 {
        if let Some(&id) = self.label_lookup.get(&labels) {
            return id;
        }
        let id = self.label_sets.len() as u32;
        self.label_sets.push(labels.clone());
        self.label_lookup.insert(labels, id);
        id
    }

    /// Binds the table to a graph for repeated type computations.
    pub fn scope<'t, 'g>(&'t mut self, g: &'g LabeledGraph) -> TypeScope<'t, 'g> {
        let vertex_labels = (0..g.vertex_count())
            .map(|v| self.label_set(g.labels_of(v).into_iter().map(String::from).collect()))
            .collect();
        TypeScope { table: self, g, vertex_labels }
    }

    /// Rank-`q` type of `tuple` in `g`.
    pub fn type_of(&mut self, g: &LabeledGraph, tuple: &[usize], q: u32) -> Result<TypeId, TypeError> {
        self.scope(g).type_of(tuple, q)
    }

    /// Total order on types that depends only on their structure.
    pub fn canonical_cmp(&self, a: TypeId, b: TypeId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        if let Some(&o) = self.order_memo.borrow().get(&(a, b)) {
            return o;
        }
        let o = match (&self.nodes[a.index()], &self.nodes[b.index()]) {
            (Node::Atomic { arity: x, diagram: d }, Node::Atomic { arity: y, diagram: e }) => {
                x.cmp(y).then_with(|| self.diagram_cmp(d, e))
            }
            (Node::Atomic { .. }, Node::Compound { .. }) => Ordering::Less,
            (Node::Compound { .. }, Node::Atomic { .. }) => Ordering::Greater,
            (
                Node::Compound { rank: r1, arity: x, base: b1, extensions: e1 },
                Node::Compound { rank: r2, arity: y, base: b2, extensions: e2 },
            ) => r1
                .cmp(r2)
                .then(x.cmp(y))
                .then_with(|| self.canonical_cmp(*b1, *b2))
                .then_with(|| {
                    let (s1, s2) = (self.sorted(e1), self.sorted(e2));
                    for (p, q) in s1.iter().zip(s2.iter()) {
                        let o = self.canonical_cmp(*p, *q);
                        if o != Ordering::Equal {
                            return o;
                        }
                    }
                    s1.len().cmp(&s2.len())
                }),
        };
        self.order_memo.borrow_mut().insert((a, b), o);
        o
    }

    fn diagram_cmp(&self, d: &[u32], e: &[u32]) -> Ordering {
        let (mut i, mut j) = (0, 0);
        let mut row = 0;
        while i < d.len() && j < e.len() {
            let o = self.label_sets[d[i] as usize].cmp(&self.label_sets[e[j] as usize]);
            if o != Ordering::Equal {
                return o;
            }
            let o = d[i + 1..i + 1 + row].cmp(&e[j + 1..j + 1 + row]);
            if o != Ordering::Equal {
                return o;
            }
            i += 1 + row;
            j += 1 + row;
            row += 1;
        }
        d.len().cmp(&e.len())
    }

    /// Sorts ids by [`TypeTable::canonical_cmp`].
    pub fn sorted(&self, ids: &[TypeId]) -> Vec<TypeId> {
        let mut v = ids.to_vec();
        v.sort_by(|a, b| self.canonical_cmp(*a, *b));
        v
    }

    /// Structural copy of a type, independent of this table.
    pub fn export(&self, id: TypeId) -> Arc<RankType> {
        let mut memo = BTreeMap::new();
        self.export_memo(id, &mut memo)
    }

    fn export_memo(&self, id: TypeId, memo: &mut BTreeMap<TypeId, Arc<RankType>>) -> Arc<RankType> {
        if let Some(t) = memo.get(&id) {
            return t.clone();
        }
        let t = match &self.nodes[id.index()] {
            Node::Atomic { arity, diagram } => Arc::new(RankType {
                rank: 0,
                arity: *arity,
                atomic_facts: self.facts(diagram),
                base: None,
                extensions: Vec::new(),
            }),
            Node::Compound { rank, arity, base, extensions } => {
                let base = self.export_memo(*base, memo);
                let mut ext: Vec<Arc<RankType>> = extensions.iter().map(|e| self.export_memo(*e, memo)).collect();
                ext.sort();
                Arc::new(RankType { rank: *rank, arity: *arity, atomic_facts: Vec::new(), base: Some(base), extensions: ext })
            }
        };
        memo.insert(id, t.clone());
        t
    }

    fn facts(&self, diagram: &[u32]) -> Vec<AtomicFact> {
        let mut out = Vec::new();
        let (mut i, mut row) = (0usize, 0u32);
        while i < diagram.len() {
            for l in &self.label_sets[diagram[i] as usize] {
                out.push(AtomicFact::Label(row, l.clone()));
            }
            for j in 0..row {
                let bits = diagram[i + 1 + j as usize];
                if bits & EQ_BIT != 0 {
                    out.push(AtomicFact::Equal(j, row));
                }
                if bits & EDGE_BIT != 0 {
                    out.push(AtomicFact::Edge(j, row));
                }
                if bits & SIM_BIT != 0 {
                    out.push(AtomicFact::Sim(j, row));
                }
            }
            i += 1 + row as usize;
            row += 1;
        }
        out.sort();
        out
    }
}

/// A [`TypeTable`] bound to one graph.
pub struct TypeScope<'t, 'g> {
    table: &'t mut TypeTable,
    g: &'g LabeledGraph,
    vertex_labels: Vec<u32>,
}

impl TypeScope<'_, '_> {
    pub fn table(&self) -> &TypeTable {
        self.table
    }

    /// Rank-`q` type of `tuple`.
    pub fn type_of(&mut self, tuple: &[usize], q: u32) -> Result<TypeId, TypeError> {
        if q > self.table.cap {
            return Err(TypeError::RankCap { rank: q, cap: self.table.cap });
        }
        if let Some(&bad) = tuple.iter().find(|&&v| v >= self.g.vertex_count()) {
            return Err(TypeError::BadVertex(bad));
        }
        let mut stack = Vec::with_capacity(tuple.len() + q as usize);
        let mut diagram = Vec::new();
        for &v in tuple {
            self.push(&mut stack, &mut diagram, v);
        }
        Ok(self.build(&mut stack, &mut diagram, q))
    }

    fn push(&self, stack: &mut Vec<usize>, diagram: &mut Vec<u32>, w: usize) {
        diagram.push(self.vertex_labels[w]);
        for &t in stack.iter() {
            let mut bits = 0;
            if t == w {
                bits |= EQ_BIT;
            }
            if self.g.has_edge(t, w) {
                bits |= EDGE_BIT;
            }
            if self.g.has_sim_pair(t, w) {
                bits |= SIM_BIT;
            }
            diagram.push(bits);
        }
        stack.push(w);
    }

    fn pop(stack: &mut Vec<usize>, diagram: &mut Vec<u32>) {
        stack.pop();
        diagram.truncate(diagram.len() - 1 - stack.len());
    }

    fn build(&mut self, stack: &mut Vec<usize>, diagram: &mut Vec<u32>, q: u32) -> TypeId {
        let arity = stack.len() as u32;
        if q == 0 {
            return self.table.intern(Node::Atomic { arity, diagram: diagram.as_slice().into() });
        }
        let base = self.build(stack, diagram, q - 1);
        let mut ext = Vec::with_capacity(self.g.vertex_count());
        for w in 0..self.g.vertex_count() {
            self.push(stack, diagram, w);
            ext.push(self.build(stack, diagram, q - 1));
            Self::pop(stack, diagram);
        }
        ext.sort_unstable();
        ext.dedup();
        self.table.intern(Node::Compound { rank: q, arity, base, extensions: ext.into_boxed_slice() })
    }
}

/// Atomic relation among tuple positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomicFact {
    Label(u32, String),
    Equal(u32, u32),
    Edge(u32, u32),
    Sim(u32, u32),
}

/// Table-independent type tree; equal values denote equal types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankType {
    pub rank: u32,
    pub arity: u32,
    pub atomic_facts: Vec<AtomicFact>,
    pub base: Option<Arc<RankType>>,
    pub extensions: Vec<Arc<RankType>>,
}

/// Convenience: structural rank-`q` type of `tuple` in `g`.
pub fn type_of(g: &LabeledGraph, tuple: &[usize], q: u32, cap: u32) -> Result<Arc<RankType>, TypeError> {
    let mut table = TypeTable::new(cap);
    let id = table.type_of(g, tuple, q)?;
    Ok(table.export(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> LabeledGraph {
        let names: Vec<String> = (0..n).map(|i| alloc::format!("v{i}")).collect();
        let mut g = LabeledGraph::with_vertices(&names).unwrap();
        for i in 1..n {
            g.add_edge(i - 1, i).unwrap();
        }
        g
    }

    #[test]
    fn symmetric_endpoints_share_types() {
        let p3 = path(3);
        assert_eq!(type_of(&p3, &[0], 2, 3).unwrap(), type_of(&p3, &[2], 2, 3).unwrap());
        assert_ne!(type_of(&p3, &[0], 2, 3).unwrap(), type_of(&p3, &[1], 2, 3).unwrap());
    }

    #[test]
    fn isolated_vertex_differs_at_rank_one() {
        let mut g = path(2);
        g.add_vertex("w").unwrap();
        assert_eq!(type_of(&g, &[0], 0, 3).unwrap(), type_of(&g, &[2], 0, 3).unwrap());
        assert_ne!(type_of(&g, &[0], 1, 3).unwrap(), type_of(&g, &[2], 1, 3).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(type_of(&path(2), &[0], 4, 3), Err(TypeError::RankCap { rank: 4, cap: 3 }));
    }

    #[test]
    fn shared_table_matches_export() {
        let mut table = TypeTable::new(3);
        let a = table.type_of(&path(4), &[0, 3], 2).unwrap();
        let b = table.type_of(&path(5), &[0, 4], 2).unwrap();
        assert_eq!(a == b, table.export(a) == table.export(b));
        assert_eq!(table.canonical_cmp(a, b) == Ordering::Equal, a == b);
    }
}
