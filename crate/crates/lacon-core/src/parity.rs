//! Parity-decompositions: two targets are adjacent exactly when they share
//! an odd number of hidden neighbors. Includes the conversion from
//! lacon-decompositions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::coloring::{OrderedGraph, ReachMode};
use crate::graph::{is_valid_name, GraphError, LabeledGraph, LinearOrder};
use crate::lacon::{Lacon, LaconError};
use crate::report::{Check, Report};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParityError {
    #[error("duplicate vertex `{0}`")]
    Duplicate(String),
    #[error("unknown vertex `{0}`")]
    Unknown(String),
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    #[error("`{0}` and `{1}` are not a target and a hidden vertex")]
    NotBipartite(String, String),
    #[error("target `{target}` has degree {degree}, above the bound {bound}")]
    DegreeBound { target: String, degree: usize, bound: usize },
    #[error("expected an undirected lacon")]
    Directed,
    #[error(transparent)]
    Lacon(#[from] LaconError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Side {
    Target(usize),
    Hidden(usize),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Parity {
    targets: Vec<String>,
    hidden: Vec<String>,
    neighbors: Vec<BitSet>,
    pub degree_bound: usize,
    index: BTreeMap<String, Side>,
}

impl Parity {
    pub fn new(degree_bound: usize) -> Self {
        Parity { degree_bound, ..Parity::default() }
    }

    fn claim(&mut self, name: &str, side: Side) -> Result<(), ParityError> {
        if !is_valid_name(name) {
            return Err(ParityError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(ParityError::Duplicate(name.to_string()));
        }
        self.index.insert(name.to_string(), side);
        Ok(())
    }

    pub fn add_target(&mut self, name: &str) -> Result<usize, ParityError> {
        self.claim(name, Side::Target(self.targets.len()))?;
        self.targets.push(name.to_string());
        Ok(self.targets.len() - 1)
    }

    pub fn add_hidden(&mut self, name: &str) -> Result<usize, ParityError> {
        self.claim(name, Side::Hidden(self.hidden.len()))?;
        self.hidden.push(name.to_string());
        self.neighbors.push(BitSet::new());
        Ok(self.hidden.len() - 1)
    }

    pub fn connect(&mut self, t: usize, h: usize) {
        self.neighbors[h].insert(t);
    }

    pub fn connect_by_name(&mut self, a: &str, b: &str) -> Result<(), ParityError> {
        let side = |n: &str| self.index.get(n).cloned().ok_or_else(|| ParityError::Unknown(n.to_string()));
        match (side(a)?, side(b)?) {
            (Side::Target(t), Side::Hidden(h)) | (Side::Hidden(h), Side::Target(t)) => {
                self.connect(t, h);
                Ok(())
            }
            _ => Err(ParityError::NotBipartite(a.to_string(), b.to_string())),
        }
    }

    /// Drops a hidden vertex by name.
    pub fn remove_hidden(&mut self, name: &str) -> Result<(), ParityError> {
        let Some(Side::Hidden(h)) = self.index.get(name).cloned() else {
            return Err(ParityError::Unknown(name.to_string()));
        };
        self.hidden.remove(h);
        self.neighbors.remove(h);
        self.index.remove(name);
        for side in self.index.values_mut() {
            if let Side::Hidden(k) = side {
                if *k > h {
                    *k -= 1;
                }
            }
        }
        Ok(())
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn hidden(&self) -> &[String] {
        &self.hidden
    }

    pub fn neighbors(&self, h: usize) -> &BitSet {
        &self.neighbors[h]
    }

    pub fn degree(&self, t: usize) -> usize {
        self.neighbors.iter().filter(|n| n.contains(t)).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.targets.len()).map(|t| self.degree(t)).max().unwrap_or(0)
    }

    fn parity_graph(&self) -> LabeledGraph {
        let n = self.targets.len();
        let mut count = vec![vec![0usize; n]; n];
        for nb in &self.neighbors {
            let members: Vec<usize> = nb.iter().collect();
            for (i, &a) in members.iter().enumerate() {
                for &b in &members[i + 1..] {
                    count[a][b] += 1;
                }
            }
        }
        let mut g = LabeledGraph::with_vertices(&self.targets).expect("parity names are valid and unique");
        for a in 0..n {
            for b in a + 1..n {
                if count[a][b] % 2 == 1 {
                    g.add_edge(a, b).expect("targets are distinct");
                }
            }
        }
        g
    }

    /// Graph on the targets with an edge wherever the common hidden
    /// neighborhood has odd size.
    pub fn decode(&self) -> Result<LabeledGraph, ParityError> {
        if let Some(t) = (0..self.targets.len()).find(|&t| self.degree(t) > self.degree_bound) {
            return Err(ParityError::DegreeBound {
                target: self.targets[t].clone(),
                degree: self.degree(t),
                bound: self.degree_bound,
            });
        }
        Ok(self.parity_graph())
    }

    /// Checks the degree bound and, when given, that the parity rule yields
    /// `g`.
    pub fn verify(&self, g: Option<&LabeledGraph>) -> Report {
        let mut report = Report::new();
        let mut degree = Check::new("degree-bound");
        for t in 0..self.targets.len() {
            let d = self.degree(t);
            if d > self.degree_bound {
                degree.fail(format!("{} has degree {d} > {}", self.targets[t], self.degree_bound));
            }
        }
        degree.metric("max_degree", self.max_degree());
        report.push(degree);
        if let Some(g) = g {
            let mut vertices = Check::new("vertex-set");
            let mut edges = Check::new("edges");
            let decoded = self.parity_graph();
            for w in decoded.structural_difference(g) {
                if w.starts_with("vertex ") {
                    vertices.fail(w);
                } else {
                    edges.fail(w);
                }
            }
            report.push(vertices);
            report.push(edges);
        }
        report
    }

    /// Bipartite graph ranked by `order`; targets take indices `0..T` and
    /// hidden vertex `h` takes `T + h`.
    pub fn ordered_graph(&self, order: &LinearOrder) -> Result<OrderedGraph, ParityError> {
        let k = self.targets.len();
        let mut adj = vec![Vec::new(); k + self.hidden.len()];
        for (h, nb) in self.neighbors.iter().enumerate() {
            for t in nb.iter() {
                adj[t].push(k + h);
                adj[k + h].push(t);
            }
        }
        let rank = self
            .targets
            .iter()
            .chain(&self.hidden)
            .map(|n| order.rank(n).ok_or_else(|| ParityError::Unknown(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OrderedGraph::new(adj, rank))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityConverted {
    pub parity: Parity,
    /// Source hidden vertices each output hidden vertex derives from,
    /// strictly ascending in the source order.
    pub memories: Vec<Vec<usize>>,
    /// Output hidden vertices in insertion order, then the targets in the
    /// source order.
    pub order: LinearOrder,
}

/// Parity-decomposition decoding to the same graph as `d`. For each source
/// hidden vertex in ascending order, every earlier output vertex meeting its
/// neighborhood is duplicated on the intersection, which makes the shared
/// counts on that neighborhood even; a label-one vertex then adds one more.
pub fn lacon_to_parity(d: &Lacon) -> Result<ParityConverted, ParityError> {
    if d.is_directed() {
        return Err(ParityError::Directed);
    }
    d.decode()?;
    let mut neighborhoods: Vec<BitSet> = Vec::new();
    let mut memories: Vec<Vec<usize>> = Vec::new();
    for h in d.hidden_ascending() {
        let nh = d.neighbors(h);
        if nh.is_empty() {
            continue;
        }
        let existing = neighborhoods.len();
        for l in 0..existing {
            let shared = neighborhoods[l].intersection(&nh);
            if !shared.is_empty() {
                let mut memory = memories[l].clone();
                memory.push(h);
                neighborhoods.push(shared);
                memories.push(memory);
            }
        }
        if d.label(h) {
            neighborhoods.push(nh);
            memories.push(vec![h]);
        }
    }

    let mut parity = Parity::new(0);
    for t in d.targets() {
        parity.add_target(t)?;
    }
    let mut copies = vec![0usize; d.hidden_count()];
    let mut kept = Vec::new();
    for (nb, memory) in neighborhoods.iter().zip(memories) {
        if nb.is_empty() {
            continue;
        }
        let source = *memory.last().unwrap();
        let mut name = format!("{}_{}", d.hidden()[source], copies[source]);
        copies[source] += 1;
        while parity.index.contains_key(&name) {
            name.push('_');
        }
        let h = parity.add_hidden(&name)?;
        for t in nb.iter() {
            parity.connect(t, h);
        }
        kept.push(memory);
    }
    parity.degree_bound = parity.max_degree();
    let mut seq: Vec<String> = parity.hidden.clone();
    let mut targets: Vec<usize> = (0..d.target_count()).collect();
    targets.sort_by_key(|&t| d.target_rank(t));
    seq.extend(targets.into_iter().map(|t| d.targets()[t].clone()));
    let order = LinearOrder::from_sequence(&seq)?;
    Ok(ParityConverted { parity, memories: kept, order })
}

/// Checks the target degree against `2^col_2 * col_1` and the coloring
/// numbers against `2^col_2` times those of the source for radii
/// `1..=r_max`, together with memory order, memory reachability, copy
/// multiplicity and decode equality.
pub fn check_lemma8_bounds(d: &Lacon, converted: &ParityConverted, r_max: usize) -> Report {
    let mut report = Report::new();
    let before = d.ordered_graph();
    let col1 = before.coloring_number(1, ReachMode::Strong);
    let col2 = before.coloring_number(2, ReachMode::Strong);
    let factor = 2usize.saturating_pow(col2 as u32);
    let p = &converted.parity;

    let mut degree = Check::new("target-degree-bound");
    let bound = factor.saturating_mul(col1);
    if p.max_degree() > bound {
        degree.fail(format!("target degree {} > {factor} * {col1}", p.max_degree()));
    }
    degree.metric("max_degree", p.max_degree());
    degree.metric("bound", bound);
    report.push(degree);

    match p.ordered_graph(&converted.order) {
        Ok(after) => {
            for (mode, name) in [(ReachMode::Strong, "strong-coloring-bound"), (ReachMode::Weak, "weak-coloring-bound")] {
                let mut check = Check::new(name);
                let mut worst = 0.0f64;
                for r in 1..=r_max {
                    let (b, a) = (before.coloring_number(r, mode), after.coloring_number(r, mode));
                    if b > 0 {
                        worst = worst.max(a as f64 / b as f64);
                    }
                    if a > factor.saturating_mul(b) {
                        check.fail(format!("r={r}: {a} > {factor} * {b}"));
                    }
                }
                check.metric("col2", col2);
                check.metric("factor", factor);
                check.metric("max_ratio", worst);
                report.push(check);
            }
        }
        Err(e) => {
            let mut check = Check::new("strong-coloring-bound");
            check.fail(e.to_string());
            report.push(check);
        }
    }

    let mut memory = Check::new("memories");
    let mut counts = vec![0usize; d.hidden_count()];
    let k = d.target_count();
    for (h, m) in converted.memories.iter().enumerate() {
        let name = &p.hidden()[h];
        let Some(&last) = m.last() else {
            memory.fail(format!("{name}: empty memory"));
            continue;
        };
        counts[last] += 1;
        if m.windows(2).any(|w| d.hidden_rank(w[0]) >= d.hidden_rank(w[1])) {
            memory.fail(format!("{name}: memory is not strictly ascending"));
        }
        let reach = before.strong_reach(k + last, 2);
        if m.iter().any(|&s| !reach.contains(&(k + s))) {
            memory.fail(format!("{name}: memory leaves the 2-reach set of {}", d.hidden()[last]));
        }
    }
    report.push(memory);

    let mut multiplicity = Check::new("copy-multiplicity");
    for (h, &c) in counts.iter().enumerate() {
        if c > factor {
            multiplicity.fail(format!("{} has {c} copies, above {factor}", d.hidden()[h]));
        }
    }
    multiplicity.metric("max_copies", counts.iter().copied().max().unwrap_or(0));
    report.push(multiplicity);

    let mut decode = Check::new("decode-preserved");
    match (d.decode(), p.decode()) {
        (Ok(a), Ok(b)) => {
            for w in a.structural_difference(&b) {
                decode.fail(w);
            }
        }
        (Err(e), _) => decode.fail(e.to_string()),
        (_, Err(e)) => decode.fail(e.to_string()),
    }
    report.push(decode);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lacon::tests::{golden_graph, golden_lacon, random_undirected};
    use proptest::prelude::*;

    fn golden_parity(bound: usize) -> Parity {
        let mut p = Parity::new(bound);
        for t in ["a", "b", "c", "d", "e"] {
            p.add_target(t).unwrap();
        }
        for (h, ns) in [("h1", &["a", "b"][..]), ("h2", &["b", "d"][..]), ("h3", &["a", "c"][..]), ("h4", &["c", "d", "e"][..])] {
            p.add_hidden(h).unwrap();
            for t in ns {
                p.connect_by_name(t, h).unwrap();
            }
        }
        p
    }

    #[test]
    fn golden_parity_decodes_and_verifies() {
        let p = golden_parity(2);
        assert!(p.decode().unwrap().same_structure(&golden_graph()));
        assert!(p.verify(Some(&golden_graph())).passed());
    }

    #[test]
    fn degree_bound_one_fails_on_a() {
        let p = golden_parity(1);
        let r = p.verify(Some(&golden_graph()));
        let check = r.check("degree-bound").unwrap();
        assert!(!check.passed);
        assert!(check.witnesses[0].starts_with("a has degree 2"));
        assert!(matches!(p.decode(), Err(ParityError::DegreeBound { .. })));
    }

    #[test]
    fn dropping_h4_fails_on_its_pairs() {
        let mut p = golden_parity(2);
        p.remove_hidden("h4").unwrap();
        let r = p.verify(Some(&golden_graph()));
        assert_eq!(r.check("edges").unwrap().witnesses, ["c-d", "c-e", "d-e"]);
    }

    #[test]
    fn one_or_two_shared_hidden_vertices() {
        let mut p = Parity::new(2);
        for t in ["p", "q", "r"] {
            p.add_target(t).unwrap();
        }
        p.add_hidden("x").unwrap();
        for t in ["p", "q", "r"] {
            p.connect_by_name(t, "x").unwrap();
        }
        assert_eq!(p.decode().unwrap().edge_count(), 3);
        p.add_hidden("y").unwrap();
        for t in ["p", "q", "r"] {
            p.connect_by_name(t, "y").unwrap();
        }
        assert_eq!(p.decode().unwrap().edge_count(), 0);
    }

    #[test]
    fn k2_lacon_gives_one_hidden_vertex() {
        let mut l = Lacon::undirected();
        l.add_target("v1").unwrap();
        l.add_target("v2").unwrap();
        l.add_hidden("h", true).unwrap();
        l.connect(0, 0).unwrap();
        l.connect(1, 0).unwrap();
        let c = lacon_to_parity(&l).unwrap();
        assert_eq!(c.parity.hidden().len(), 1);
        assert_eq!(c.parity.neighbors(0).len(), 2);
        assert_eq!(c.parity.decode().unwrap().edge_count(), 1);
        assert!(check_lemma8_bounds(&l, &c, 4).passed());
    }

    #[test]
    fn label_zero_lacon_gives_no_hidden_vertices() {
        let mut l = Lacon::undirected();
        l.add_target("v1").unwrap();
        l.add_target("v2").unwrap();
        l.add_hidden("h", false).unwrap();
        l.connect(0, 0).unwrap();
        l.connect(1, 0).unwrap();
        let c = lacon_to_parity(&l).unwrap();
        assert!(c.parity.hidden().is_empty());
        assert_eq!(c.parity.decode().unwrap().edge_count(), 0);
    }

    #[test]
    fn golden_lacon_converts() {
        let l = golden_lacon();
        let c = lacon_to_parity(&l).unwrap();
        assert!(c.parity.decode().unwrap().same_structure(&golden_graph()));
        let r = check_lemma8_bounds(&l, &c, 4);
        assert!(r.passed(), "{:?}", r.failures());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn conversion_preserves_decode(
            targets in 1usize..=6,
            hidden in 1usize..=5,
            bits in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let l = random_undirected(targets, &bits, hidden);
            let c = lacon_to_parity(&l).unwrap();
            let r = check_lemma8_bounds(&l, &c, 4);
            prop_assert!(r.passed(), "{:?}", r.failures());
        }
    }
}
