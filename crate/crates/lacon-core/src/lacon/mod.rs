//! Lacon-decompositions: a bipartite graph of targets and labeled hidden
//! vertices under a linear order, decoded through dominant vertices.

mod build;
mod convert;

pub use build::{build_directed_lacon, BuildOptions, BuiltLacon, DEFAULT_ESCALATION};
pub use convert::{check_lemma5_bounds, directed_to_undirected, directed_to_undirected_pruned, Converted};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::coloring::OrderedGraph;
use crate::graph::{is_valid_name, GraphError, LabeledGraph, LinearOrder};
use crate::logic::types::TypeError;
use crate::logic::EvalError;
use crate::report::{Check, Report};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaconError {
    #[error("duplicate vertex `{0}`")]
    Duplicate(String),
    #[error("unknown vertex `{0}`")]
    Unknown(String),
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    #[error("`{0}` and `{1}` are not a target and a hidden vertex")]
    NotBipartite(String, String),
    #[error("{0} is not allowed in this kind of lacon")]
    WrongKind(&'static str),
    #[error("order does not match the vertex set: {0}")]
    Order(String),
    #[error("targets `{0}` and `{1}` have no common hidden neighbor")]
    NoCommonNeighbor(String, String),
    #[error("type rank {rank} is below the formula's quantifier rank {formula_rank}")]
    RankBelowFormula { rank: u32, formula_rank: u32 },
    #[error("the graph has vertices labeled APEX but no apex vertex")]
    ApexLabelInUse,
    #[error("expected a {0} lacon")]
    ExpectedKind(&'static str),
    #[error("hidden vertex labels disagree at type rank {rank}: {witness}")]
    LabelConflict { rank: u32, witness: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Connections between hidden vertices and targets, stored per hidden vertex
/// as sets of target indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arcs {
    Undirected(Vec<BitSet>),
    /// `inbound[h]` holds targets with an arc into `h`, `outbound[h]` the
    /// targets that `h` points to.
    Directed { inbound: Vec<BitSet>, outbound: Vec<BitSet> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    Target(usize),
    Hidden(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lacon {
    targets: Vec<String>,
    hidden: Vec<String>,
    labels: Vec<bool>,
    arcs: Arcs,
    target_rank: Vec<usize>,
    hidden_rank: Vec<usize>,
    index: BTreeMap<String, Vertex>,
}

impl Lacon {
    pub fn undirected() -> Self {
        Self::with_arcs(Arcs::Undirected(Vec::new()))
    }

    pub fn directed() -> Self {
        Self::with_arcs(Arcs::Directed { inbound: Vec::new(), outbound: Vec::new() })
    }

    fn with_arcs(arcs: Arcs) -> Self {
        Lacon {
            targets: Vec::new(),
            hidden: Vec::new(),
            labels: Vec::new(),
            arcs,
            target_rank: Vec::new(),
            hidden_rank: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn claim(&mut self, name: &str, v: Vertex) -> Result<(), LaconError> {
        if !is_valid_name(name) {
            return Err(LaconError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(LaconError::Duplicate(name.to_string()));
        }
        self.index.insert(name.to_string(), v);
        Ok(())
    }

    /// Adds a target. Adding a vertex resets the order to hidden vertices,
    /// then targets, each in insertion order.
    pub fn add_target(&mut self, name: &str) -> Result<usize, LaconError> {
        let t = self.targets.len();
        self.claim(name, Vertex::Target(t))?;
        self.targets.push(name.to_string());
        self.renumber();
        Ok(t)
    }

    pub fn add_hidden(&mut self, name: &str, label: bool) -> Result<usize, LaconError> {
        let h = self.hidden.len();
        self.claim(name, Vertex::Hidden(h))?;
        self.hidden.push(name.to_string());
        self.labels.push(label);
        match &mut self.arcs {
            Arcs::Undirected(n) => n.push(BitSet::new()),
            Arcs::Directed { inbound, outbound } => {
                inbound.push(BitSet::new());
                outbound.push(BitSet::new());
            }
        }
        self.renumber();
        Ok(h)
    }

    fn renumber(&mut self) {
        let k = self.hidden.len();
        self.hidden_rank = (0..k).collect();
        self.target_rank = (k..k + self.targets.len()).collect();
    }

    pub fn connect(&mut self, t: usize, h: usize) -> Result<(), LaconError> {
        match &mut self.arcs {
            Arcs::Undirected(n) => {
                n[h].insert(t);
                Ok(())
            }
            Arcs::Directed { .. } => Err(LaconError::WrongKind("an undirected edge")),
        }
    }

    /// Arc from target `t` into hidden `h`.
    pub fn arc_in(&mut self, t: usize, h: usize) -> Result<(), LaconError> {
        match &mut self.arcs {
            Arcs::Directed { inbound, .. } => {
                inbound[h].insert(t);
                Ok(())
            }
            Arcs::Undirected(_) => Err(LaconError::WrongKind("an arc")),
        }
    }

    /// Arc from hidden `h` to target `t`.
    pub fn arc_out(&mut self, h: usize, t: usize) -> Result<(), LaconError> {
        match &mut self.arcs {
            Arcs::Directed { outbound, .. } => {
                outbound[h].insert(t);
                Ok(())
            }
            Arcs::Undirected(_) => Err(LaconError::WrongKind("an arc")),
        }
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex, LaconError> {
        self.index.get(name).copied().ok_or_else(|| LaconError::Unknown(name.to_string()))
    }

    /// Undirected edge between a target and a hidden vertex, in either order.
    pub fn connect_by_name(&mut self, a: &str, b: &str) -> Result<(), LaconError> {
        match (self.vertex(a)?, self.vertex(b)?) {
            (Vertex::Target(t), Vertex::Hidden(h)) | (Vertex::Hidden(h), Vertex::Target(t)) => self.connect(t, h),
            _ => Err(LaconError::NotBipartite(a.to_string(), b.to_string())),
        }
    }

    pub fn arc_by_name(&mut self, from: &str, to: &str) -> Result<(), LaconError> {
        match (self.vertex(from)?, self.vertex(to)?) {
            (Vertex::Target(t), Vertex::Hidden(h)) => self.arc_in(t, h),
            (Vertex::Hidden(h), Vertex::Target(t)) => self.arc_out(h, t),
            _ => Err(LaconError::NotBipartite(from.to_string(), to.to_string())),
        }
    }

    /// Replaces the order; it must rank exactly the vertices of the lacon.
    pub fn set_order(&mut self, order: &LinearOrder) -> Result<(), LaconError> {
        if order.len() != self.index.len() {
            return Err(LaconError::Order(format!(
                "order has {} entries, lacon has {} vertices",
                order.len(),
                self.index.len()
            )));
        }
        for (rank, name) in order.sequence().iter().enumerate() {
            match self.index.get(name) {
                Some(Vertex::Target(t)) => self.target_rank[*t] = rank,
                Some(Vertex::Hidden(h)) => self.hidden_rank[*h] = rank,
                None => return Err(LaconError::Order(format!("`{name}` is not a vertex"))),
            }
        }
        Ok(())
    }

    pub fn order(&self) -> LinearOrder {
        let mut seq = vec![""; self.index.len()];
        for (t, &r) in self.target_rank.iter().enumerate() {
            seq[r] = &self.targets[t];
        }
        for (h, &r) in self.hidden_rank.iter().enumerate() {
            seq[r] = &self.hidden[h];
        }
        LinearOrder::from_sequence(&seq).expect("lacon names are unique")
    }

    pub fn is_directed(&self) -> bool {
        matches!(self.arcs, Arcs::Directed { .. })
    }

    pub fn arcs(&self) -> &Arcs {
        &self.arcs
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn hidden(&self) -> &[String] {
        &self.hidden
    }

    pub fn target_count(&self) -> usize {
        self.targets.len()
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden.len()
    }

    pub fn label(&self, h: usize) -> bool {
        self.labels[h]
    }

    pub fn set_label(&mut self, h: usize, label: bool) {
        self.labels[h] = label;
    }

    pub fn hidden_rank(&self, h: usize) -> usize {
        self.hidden_rank[h]
    }

    pub fn target_rank(&self, t: usize) -> usize {
        self.target_rank[t]
    }

    /// Hidden vertices in ascending order.
    pub fn hidden_ascending(&self) -> Vec<usize> {
        let mut hs: Vec<usize> = (0..self.hidden.len()).collect();
        hs.sort_by_key(|&h| self.hidden_rank[h]);
        hs
    }

    /// Targets adjacent to `h`, ignoring arc directions.
    pub fn neighbors(&self, h: usize) -> BitSet {
        match &self.arcs {
            Arcs::Undirected(n) => n[h].clone(),
            Arcs::Directed { inbound, outbound } => inbound[h].union(&outbound[h]),
        }
    }

    /// Whether `h` joins `t` and `u`: a common neighbor, or for directed
    /// lacons an arc path between them in either direction.
    pub fn joins(&self, h: usize, t: usize, u: usize) -> bool {
        match &self.arcs {
            Arcs::Undirected(n) => n[h].contains(t) && n[h].contains(u),
            Arcs::Directed { inbound, outbound } => {
                (inbound[h].contains(t) && outbound[h].contains(u)) || (inbound[h].contains(u) && outbound[h].contains(t))
            }
        }
    }

    /// The highest-ranked hidden vertex joining targets `t` and `u`.
    pub fn dominant(&self, t: usize, u: usize) -> Result<usize, LaconError> {
        (0..self.hidden.len())
            .filter(|&h| self.joins(h, t, u))
            .max_by_key(|&h| self.hidden_rank[h])
            .ok_or_else(|| LaconError::NoCommonNeighbor(self.targets[t].clone(), self.targets[u].clone()))
    }

    pub fn dominant_by_name(&self, t: &str, u: &str) -> Result<&str, LaconError> {
        match (self.vertex(t)?, self.vertex(u)?) {
            (Vertex::Target(a), Vertex::Target(b)) => Ok(&self.hidden[self.dominant(a, b)?]),
            _ => Err(LaconError::NotBipartite(t.to_string(), u.to_string())),
        }
    }

    fn empty_target_graph(&self) -> LabeledGraph {
        LabeledGraph::with_vertices(&self.targets).expect("lacon names are valid and unique")
    }

    /// Graph on the targets with an edge wherever the dominant vertex of the
    /// pair is labeled one.
    pub fn decode(&self) -> Result<LabeledGraph, LaconError> {
        let mut g = self.empty_target_graph();
        for t in 0..self.targets.len() {
            for u in t + 1..self.targets.len() {
                if self.labels[self.dominant(t, u)?] {
                    g.add_edge(t, u)?;
                }
            }
        }
        Ok(g)
    }

    /// Reveals hidden vertices in ascending order, each overwriting the
    /// adjacency of the pairs it joins with its label.
    pub fn decode_sweep(&self) -> LabeledGraph {
        let n = self.targets.len();
        let mut adj = vec![vec![false; n]; n];
        for h in self.hidden_ascending() {
            let label = self.labels[h];
            let mut set = |a: usize, b: usize| {
                if a != b {
                    adj[a][b] = label;
                    adj[b][a] = label;
                }
            };
            match &self.arcs {
                Arcs::Undirected(nb) => {
                    let members: Vec<usize> = nb[h].iter().collect();
                    for (i, &a) in members.iter().enumerate() {
                        for &b in &members[i + 1..] {
                            set(a, b);
                        }
                    }
                }
                Arcs::Directed { inbound, outbound } => {
                    for a in inbound[h].iter() {
                        for b in outbound[h].iter() {
                            set(a, b);
                        }
                    }
                }
            }
        }
        let mut g = self.empty_target_graph();
        for a in 0..n {
            for b in a + 1..n {
                if adj[a][b] {
                    g.add_edge(a, b).expect("targets are distinct");
                }
            }
        }
        g
    }

    /// Checks the definitional items and, when given, that the lacon decodes
    /// to `g`. Failures carry the offending vertices as witnesses.
    pub fn verify(&self, g: Option<&LabeledGraph>) -> Report {
        let mut report = Report::new();
        let mut order = Check::new("hidden-below-targets");
        if let (Some(h), Some(t)) = (
            (0..self.hidden.len()).max_by_key(|&h| self.hidden_rank[h]),
            (0..self.targets.len()).min_by_key(|&t| self.target_rank[t]),
        ) {
            if self.hidden_rank[h] > self.target_rank[t] {
                for h in (0..self.hidden.len()).filter(|&h| self.hidden_rank[h] > self.target_rank[t]) {
                    for t in (0..self.targets.len()).filter(|&t| self.target_rank[t] < self.hidden_rank[h]) {
                        order.fail(format!("hidden {} ranks above target {}", self.hidden[h], self.targets[t]));
                    }
                }
            }
        }
        report.push(order);

        let mut common = Check::new("common-neighbor");
        let n = self.targets.len();
        for t in 0..n {
            for u in t + 1..n {
                if !(0..self.hidden.len()).any(|h| self.joins(h, t, u)) {
                    common.fail(format!("{{{},{}}}", self.targets[t], self.targets[u]));
                }
            }
        }
        let valid = common.passed;
        report.push(common);

        let mut sweep = Check::new("sweep-agrees");
        if valid {
            let a = self.decode().expect("common neighbors exist");
            for w in a.structural_difference(&self.decode_sweep()) {
                sweep.fail(w);
            }
        }
        report.push(sweep);

        if let Some(g) = g {
            let mut vertices = Check::new("vertex-set");
            let mut want: Vec<&str> = g.names().iter().map(String::as_str).collect();
            let mut have: Vec<&str> = self.targets.iter().map(String::as_str).collect();
            want.sort_unstable();
            have.sort_unstable();
            for v in want.iter().filter(|v| have.binary_search(v).is_err()) {
                vertices.fail(format!("graph vertex {v} is not a target"));
            }
            for v in have.iter().filter(|v| want.binary_search(v).is_err()) {
                vertices.fail(format!("target {v} is not a graph vertex"));
            }
            let same_vertices = vertices.passed;
            report.push(vertices);

            let mut edges = Check::new("edges");
            if valid && same_vertices {
                for t in 0..n {
                    for u in t + 1..n {
                        let h = self.dominant(t, u).expect("common neighbors exist");
                        let (a, b) = (&self.targets[t], &self.targets[u]);
                        let present = g.has_edge(g.vertex(a).unwrap(), g.vertex(b).unwrap());
                        if present != self.labels[h] {
                            let (x, y) = if a <= b { (a, b) } else { (b, a) };
                            edges.fail(format!(
                                "{{{x},{y}}}: dominant {} labeled {}, graph {}",
                                self.hidden[h],
                                u8::from(self.labels[h]),
                                if present { "has the edge" } else { "lacks the edge" }
                            ));
                        }
                    }
                }
            }
            report.push(edges);
        }
        report
    }

    /// Underlying undirected graph with its ranks; targets take indices
    /// `0..T` and hidden vertex `h` takes `T + h`.
    pub fn ordered_graph(&self) -> OrderedGraph {
        let k = self.targets.len();
        let mut adj = vec![Vec::new(); k + self.hidden.len()];
        for h in 0..self.hidden.len() {
            for t in self.neighbors(h).iter() {
                adj[t].push(k + h);
                adj[k + h].push(t);
            }
        }
        let rank = self.target_rank.iter().chain(&self.hidden_rank).copied().collect();
        OrderedGraph::new(adj, rank)
    }

    /// Copy with the given target removed.
    pub fn without_target(&self, name: &str) -> Result<Lacon, LaconError> {
        let Vertex::Target(gone) = self.vertex(name)? else {
            return Err(LaconError::Unknown(name.to_string()));
        };
        let mut out = if self.is_directed() { Lacon::directed() } else { Lacon::undirected() };
        let map: Vec<Option<usize>> = (0..self.targets.len())
            .map(|t| (t != gone).then(|| out.add_target(&self.targets[t]).expect("names stay unique")))
            .collect();
        for h in 0..self.hidden.len() {
            out.add_hidden(&self.hidden[h], self.labels[h])?;
        }
        let remap = |s: &BitSet| s.iter().filter_map(|t| map[t]).collect::<BitSet>();
        out.arcs = match &self.arcs {
            Arcs::Undirected(n) => Arcs::Undirected(n.iter().map(remap).collect()),
            Arcs::Directed { inbound, outbound } => Arcs::Directed {
                inbound: inbound.iter().map(remap).collect(),
                outbound: outbound.iter().map(remap).collect(),
            },
        };
        out.set_order(&self.order().without(&[name]))?;
        Ok(out)
    }

    /// Copy without the hidden vertices that are dominant for no pair of
    /// targets; decoding is unchanged.
    pub fn pruned(&self) -> Lacon {
        let n = self.targets.len();
        let mut keep = vec![false; self.hidden.len()];
        for t in 0..n {
            for u in t + 1..n {
                if let Ok(h) = self.dominant(t, u) {
                    keep[h] = true;
                }
            }
        }
        let mut out = if self.is_directed() { Lacon::directed() } else { Lacon::undirected() };
        for t in &self.targets {
            out.add_target(t).expect("names stay unique");
        }
        let kept: Vec<usize> = (0..self.hidden.len()).filter(|&h| keep[h]).collect();
        for &h in &kept {
            out.add_hidden(&self.hidden[h], self.labels[h]).expect("names stay unique");
        }
        let pick = |sets: &[BitSet]| kept.iter().map(|&h| sets[h].clone()).collect();
        out.arcs = match &self.arcs {
            Arcs::Undirected(n) => Arcs::Undirected(pick(n)),
            Arcs::Directed { inbound, outbound } => Arcs::Directed { inbound: pick(inbound), outbound: pick(outbound) },
        };
        let dropped: Vec<&str> = (0..self.hidden.len()).filter(|&h| !keep[h]).map(|h| self.hidden[h].as_str()).collect();
        out.set_order(&self.order().without(&dropped)).expect("order covers the kept vertices");
        out
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn golden_graph() -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(&["a", "b", "c", "d", "e"]).unwrap();
        for (x, y) in [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d"), ("c", "e"), ("d", "e")] {
            g.add_edge_by_name(x, y).unwrap();
        }
        g
    }

    pub(crate) fn golden_lacon() -> Lacon {
        let mut l = Lacon::undirected();
        for t in ["a", "b", "c", "d", "e"] {
            l.add_target(t).unwrap();
        }
        for (h, label, ns) in [
            ("h1", true, &["a", "b", "c", "d"][..]),
            ("h2", false, &["b", "c", "e"][..]),
            ("h3", false, &["a", "d", "e"][..]),
            ("h4", true, &["c", "d", "e"][..]),
        ] {
            l.add_hidden(h, label).unwrap();
            for t in ns {
                l.connect_by_name(t, h).unwrap();
            }
        }
        l
    }

    /// Random undirected lacon whose lowest hidden vertex joins all targets;
    /// `bits` is read cyclically for labels and memberships.
    pub(crate) fn random_undirected(targets: usize, bits: &[bool], hidden: usize) -> Lacon {
        let mut l = Lacon::undirected();
        for t in 0..targets {
            l.add_target(&format!("t{t}")).unwrap();
        }
        let mut k = 0;
        let mut next = || {
            k += 1;
            bits[(k - 1) % bits.len()]
        };
        for h in 0..hidden {
            l.add_hidden(&format!("h{h}"), next()).unwrap();
            for t in 0..targets {
                if next() || h == 0 {
                    l.connect(t, h).unwrap();
                }
            }
        }
        l
    }

    fn k2_directed() -> Lacon {
        let mut l = Lacon::directed();
        l.add_target("v1").unwrap();
        l.add_target("v2").unwrap();
        l.add_hidden("h", true).unwrap();
        l.arc_by_name("v1", "h").unwrap();
        l.arc_by_name("h", "v2").unwrap();
        l
    }

    #[test]
    fn dominant_vertices_of_golden() {
        let l = golden_lacon();
        assert_eq!(l.dominant_by_name("c", "d").unwrap(), "h4");
        assert_eq!(l.dominant_by_name("a", "d").unwrap(), "h3");
        assert!(l.label(3));
        assert!(!l.label(2));
    }

    #[test]
    fn golden_decodes_to_golden_graph() {
        let l = golden_lacon();
        let g = l.decode().unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(g.same_structure(&golden_graph()));
        assert!(l.decode_sweep().same_structure(&g));
        assert!(l.verify(Some(&golden_graph())).passed());
    }

    #[test]
    fn relabeled_h4_fails_on_its_pairs() {
        let mut l = golden_lacon();
        l.set_label(3, false);
        let r = l.verify(Some(&golden_graph()));
        let edges = r.check("edges").unwrap();
        assert!(!edges.passed);
        let pairs: Vec<&str> = edges.witnesses.iter().map(|w| w.split(':').next().unwrap()).collect();
        assert_eq!(pairs, ["{c,d}", "{c,e}", "{d,e}"]);
    }

    #[test]
    fn hidden_above_target_fails() {
        let mut l = golden_lacon();
        let order = LinearOrder::from_sequence(&["h1", "h2", "h3", "a", "h4", "b", "c", "d", "e"]).unwrap();
        l.set_order(&order).unwrap();
        let r = l.verify(None);
        assert!(!r.check("hidden-below-targets").unwrap().passed);
        assert!(r.check("common-neighbor").unwrap().passed);
    }

    #[test]
    fn single_hidden_gives_complete_or_empty() {
        for label in [true, false] {
            let mut l = Lacon::undirected();
            l.add_hidden("h", label).unwrap();
            for t in ["p", "q", "r", "s"] {
                l.add_target(t).unwrap();
                l.connect_by_name(t, "h").unwrap();
            }
            assert_eq!(l.dominant_by_name("p", "s").unwrap(), "h");
            assert_eq!(l.decode().unwrap().edge_count(), if label { 6 } else { 0 });
        }
    }

    #[test]
    fn missing_common_neighbor_is_an_error() {
        let mut l = Lacon::undirected();
        l.add_target("a").unwrap();
        l.add_target("b").unwrap();
        l.add_hidden("h", true).unwrap();
        l.connect_by_name("a", "h").unwrap();
        assert_eq!(l.decode(), Err(LaconError::NoCommonNeighbor("a".into(), "b".into())));
        assert!(!l.verify(None).passed());
    }

    #[test]
    fn directed_k2_decodes() {
        let l = k2_directed();
        assert_eq!(l.decode().unwrap().edge_count(), 1);
        assert_eq!(l.decode_sweep().edge_count(), 1);
        let mut wrong = Lacon::directed();
        wrong.add_target("v1").unwrap();
        wrong.add_target("v2").unwrap();
        wrong.add_hidden("h", true).unwrap();
        wrong.arc_by_name("v1", "h").unwrap();
        wrong.arc_by_name("v2", "h").unwrap();
        assert!(wrong.decode().is_err());
    }

    #[test]
    fn wrong_connection_kinds_are_rejected() {
        let mut l = k2_directed();
        assert_eq!(l.connect_by_name("v1", "h"), Err(LaconError::WrongKind("an undirected edge")));
        assert!(matches!(l.arc_by_name("v1", "v2"), Err(LaconError::NotBipartite(..))));
        assert!(matches!(l.add_target("h"), Err(LaconError::Duplicate(_))));
    }

    #[test]
    fn order_round_trips() {
        let l = golden_lacon();
        let mut m = l.clone();
        m.set_order(&l.order()).unwrap();
        assert_eq!(l, m);
        assert!(m.set_order(&LinearOrder::from_sequence(&["a"]).unwrap()).is_err());
    }

    #[test]
    fn removing_a_target_keeps_the_rest() {
        let l = golden_lacon().without_target("c").unwrap();
        let g = l.decode().unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 3);
    }
}
