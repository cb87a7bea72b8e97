//! Shrub-decompositions: a host graph whose pendant vertices are the decoded
//! vertices, adjacent exactly when their colors and host distance belong to
//! the signature. Includes the conversion from lacon-decompositions.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::coloring::{OrderedGraph, ReachMode};
use crate::graph::{GraphError, LabeledGraph};
use crate::lacon::{Lacon, LaconError};
use crate::report::{Check, Report};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShrubError {
    #[error("colored vertices `{0}` and `{1}` are disconnected in the host")]
    Disconnected(String, String),
    #[error("unknown vertex `{0}`")]
    Unknown(String),
    #[error("color of `{0}` must be positive")]
    ZeroColor(String),
    #[error("expected an undirected lacon")]
    Directed,
    #[error("converted shrub does not decode to the lacon's graph: {0}")]
    Contract(String),
    #[error(transparent)]
    Lacon(#[from] LaconError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Shrub {
    pub host: LabeledGraph,
    /// Colors of the decoded vertices, by host vertex name.
    pub colors: BTreeMap<String, u32>,
    /// Triples (color, color, distance).
    pub signature: BTreeSet<(u32, u32, usize)>,
    pub diameter: usize,
}

/// Exact diameter by eccentricity bounding: each breadth-first search
/// tightens lower and upper eccentricity bounds on the remaining vertices,
/// and a vertex is settled once its upper bound cannot beat the best found.
/// `None` when the graph is disconnected.
pub(crate) fn diameter(adj: &[Vec<usize>]) -> Option<usize> {
    let n = adj.len();
    let mut lower = vec![0usize; n];
    let mut upper = vec![usize::MAX; n];
    let mut open: Vec<usize> = (0..n).collect();
    let mut best = 0;
    let mut pick_upper = true;
    while !open.is_empty() {
        let v = if pick_upper {
            *open.iter().max_by_key(|&&w| (upper[w], core::cmp::Reverse(w))).expect("open is non-empty")
        } else {
            *open.iter().min_by_key(|&&w| (lower[w], w)).expect("open is non-empty")
        };
        pick_upper = !pick_upper;
        let dist = bfs(adj, v);
        let ecc = *dist.iter().max().unwrap_or(&0);
        if ecc == usize::MAX {
            return None;
        }
        best = best.max(ecc);
        lower[v] = ecc;
        upper[v] = ecc;
        for &w in &open {
            let d = dist[w];
            lower[w] = lower[w].max(d).max(ecc - d);
            upper[w] = upper[w].min(ecc + d);
        }
        open.retain(|&w| {
            if lower[w] == upper[w] {
                best = best.max(lower[w]);
                false
            } else {
                upper[w] > best
            }
        });
    }
    Some(best)
}

/// Breadth-first distances from `s`; unreachable vertices get `usize::MAX`.
pub(crate) fn bfs(adj: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

impl Shrub {
    pub fn set_color(&mut self, name: &str, color: u32) -> Result<(), ShrubError> {
        if self.host.vertex(name).is_none() {
            return Err(ShrubError::Unknown(name.to_string()));
        }
        if color == 0 {
            return Err(ShrubError::ZeroColor(name.to_string()));
        }
        self.colors.insert(name.to_string(), color);
        Ok(())
    }

    /// Colored host vertices in host declaration order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.host.vertex_count()).filter(|&v| self.colors.contains_key(self.host.name(v))).collect()
    }

    fn color(&self, v: usize) -> u32 {
        self.colors[self.host.name(v)]
    }

    /// Largest host distance between any two vertices, `None` when the host
    /// is disconnected.
    pub fn measured_diameter(&self) -> Option<usize> {
        diameter(&self.host.adjacency())
    }

    /// Largest host distance between two colored vertices.
    pub fn leaf_diameter(&self) -> Result<usize, ShrubError> {
        let leaves = self.leaves();
        let adj = self.host.adjacency();
        let mut best = 0;
        for (i, &u) in leaves.iter().enumerate() {
            let dist = bfs(&adj, u);
            for &v in &leaves[i + 1..] {
                if dist[v] == usize::MAX {
                    return Err(ShrubError::Disconnected(self.host.name(u).to_string(), self.host.name(v).to_string()));
                }
                best = best.max(dist[v]);
            }
        }
        Ok(best)
    }

    /// Graph on the colored vertices with an edge wherever the pair's colors
    /// and distance are in the signature.
    pub fn decode(&self) -> Result<LabeledGraph, ShrubError> {
        let leaves = self.leaves();
        let names: Vec<&str> = leaves.iter().map(|&v| self.host.name(v)).collect();
        let mut g = LabeledGraph::with_vertices(&names)?;
        let adj = self.host.adjacency();
        for (i, &u) in leaves.iter().enumerate() {
            let dist = bfs(&adj, u);
            for (j, &v) in leaves.iter().enumerate().skip(i + 1) {
                if dist[v] == usize::MAX {
                    return Err(ShrubError::Disconnected(names[i].to_string(), names[j].to_string()));
                }
                if self.signature.contains(&(self.color(u), self.color(v), dist[v])) {
                    g.add_edge(i, j)?;
                }
            }
        }
        Ok(g)
    }

    /// Checks the definitional items and, when given, that the shrub decodes
    /// to `g`.
    pub fn verify(&self, g: Option<&LabeledGraph>) -> Report {
        let mut report = Report::new();
        let adj = self.host.adjacency();
        let n = adj.len();

        let mut diameter = Check::new("diameter");
        let measured = self::diameter(&adj);
        let connected = measured.is_some();
        let within = measured.is_some_and(|d| d <= self.diameter);
        for s in (0..n).filter(|_| !within) {
            let dist = bfs(&adj, s);
            for t in s + 1..n {
                if dist[t] == usize::MAX {
                    diameter.fail(format!("{} and {} are disconnected", self.host.name(s), self.host.name(t)));
                } else if dist[t] > self.diameter {
                    diameter.fail(format!(
                        "{}-{} at distance {} exceeds {}",
                        self.host.name(s),
                        self.host.name(t),
                        dist[t],
                        self.diameter
                    ));
                }
            }
        }
        report.push(diameter);

        let mut pendant = Check::new("pendant-vertices");
        for v in 0..n {
            let name = self.host.name(v);
            match (adj[v].len() == 1, self.colors.contains_key(name)) {
                (true, false) => pendant.fail(format!("pendant vertex {name} is not a decoded vertex")),
                (false, true) => pendant.fail(format!("decoded vertex {name} has degree {}", adj[v].len())),
                _ => {}
            }
        }
        for name in self.colors.keys().filter(|c| self.host.vertex(c).is_none()) {
            pendant.fail(format!("colored vertex {name} is not in the host"));
        }
        report.push(pendant);

        let mut colors = Check::new("colors");
        let palette = self.colors.values().copied().max().unwrap_or(0);
        for (name, &c) in &self.colors {
            if c == 0 {
                colors.fail(format!("{name} has color 0"));
            }
        }
        colors.metric("colors", palette as usize);
        report.push(colors);

        let mut signature = Check::new("signature");
        for &(i, j, l) in &self.signature {
            if !self.signature.contains(&(j, i, l)) {
                signature.fail(format!("({i},{j},{l}) lacks its mirror ({j},{i},{l})"));
            }
            if l == 0 || l > self.diameter || i == 0 || j == 0 {
                signature.fail(format!("({i},{j},{l}) is out of range"));
            }
        }
        report.push(signature);

        if let Some(g) = g {
            let mut vertices = Check::new("vertex-set");
            let have: BTreeSet<&str> = self.colors.keys().map(String::as_str).collect();
            let want: BTreeSet<&str> = g.names().iter().map(String::as_str).collect();
            for v in want.difference(&have) {
                vertices.fail(format!("graph vertex {v} is not a decoded vertex"));
            }
            for v in have.difference(&want) {
                vertices.fail(format!("decoded vertex {v} is not a graph vertex"));
            }
            let same = vertices.passed;
            report.push(vertices);

            let mut edges = Check::new("edges");
            if same && connected && self.colors.keys().all(|c| self.host.vertex(c).is_some()) {
                let decoded = self.decode().expect("host is connected");
                for w in decoded.structural_difference(g) {
                    edges.fail(w);
                }
            }
            report.push(edges);
        }
        report
    }
}

/// Length of the gadget path from a target's port to its `i`-th hidden
/// neighbor (1-based, descending order), given the offset `m`.
pub fn gadget_length(m: usize, i: usize, label: bool) -> usize {
    4 * (m + i) - usize::from(label)
}

/// Hidden neighbors of target `t`, highest ranked first.
fn descending_neighbors(d: &Lacon, t: usize) -> Vec<usize> {
    let mut hs: Vec<usize> = (0..d.hidden_count()).filter(|&h| d.neighbors(h).contains(t)).collect();
    hs.sort_by_key(|&h| core::cmp::Reverse(d.hidden_rank(h)));
    hs
}

/// Offset of the gadget lengths: one more than `col_1` of the lacon.
pub fn gadget_offset(d: &Lacon) -> usize {
    d.ordered_graph().coloring_number(1, ReachMode::Strong) + 1
}

struct HostBuilder {
    names: Vec<String>,
    taken: BTreeSet<String>,
    edges: Vec<(usize, usize)>,
}

impl HostBuilder {
    fn vertex(&mut self, base: &str) -> usize {
        let mut name = base.to_string();
        while self.taken.contains(&name) {
            name.push('_');
        }
        self.taken.insert(name.clone());
        self.names.push(name);
        self.names.len() - 1
    }

    fn path(&mut self, from: usize, to: usize, length: usize, prefix: &str) {
        let mut prev = from;
        for k in 1..length {
            let v = self.vertex(&format!("{prefix}_{k}"));
            self.edges.push((prev, v));
            prev = v;
        }
        self.edges.push((prev, to));
    }
}

/// One-color shrub-decomposition decoding to the same graph as `d`. Each
/// target hangs off a port vertex joined to every hidden neighbor by a path
/// of length `4(M + i) - label`, so target distances are multiples of four
/// exactly when the dominant vertex is labeled one.
pub fn lacon_to_shrub(d: &Lacon) -> Result<Shrub, ShrubError> {
    if d.is_directed() {
        return Err(ShrubError::Directed);
    }
    let want = d.decode()?;
    let m = gadget_offset(d);
    let mut b = HostBuilder { names: Vec::new(), taken: BTreeSet::new(), edges: Vec::new() };
    let targets: Vec<usize> = d.targets().iter().map(|t| b.vertex(t)).collect();
    let hidden: Vec<usize> = d.hidden().iter().map(|h| b.vertex(h)).collect();
    let shared: Vec<bool> = (0..d.hidden_count()).map(|h| d.neighbors(h).len() >= 2).collect();
    for (t, name) in d.targets().iter().enumerate() {
        let port = b.vertex(&format!("{name}_port"));
        b.edges.push((targets[t], port));
        let neighbors = descending_neighbors(d, t);
        for (i, &h) in neighbors.iter().enumerate() {
            let prefix = format!("{name}_{}", d.hidden()[h]);
            b.path(port, hidden[h], gadget_length(m, i + 1, d.label(h)), &prefix);
        }
        if !neighbors.iter().any(|&h| shared[h]) {
            let x = b.vertex(&format!("{name}_loop_1"));
            let y = b.vertex(&format!("{name}_loop_2"));
            b.edges.extend([(port, x), (x, y), (y, port)]);
        }
    }

    let mut adj = vec![BTreeSet::new(); b.names.len()];
    for &(x, y) in &b.edges {
        adj[x].insert(y);
        adj[y].insert(x);
    }
    let is_target: BTreeSet<usize> = targets.iter().copied().collect();
    let mut alive = vec![true; b.names.len()];
    let mut queue: VecDeque<usize> = (0..b.names.len()).filter(|v| adj[*v].len() <= 1 && !is_target.contains(v)).collect();
    while let Some(v) = queue.pop_front() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        let next: Vec<usize> = adj[v].iter().copied().collect();
        for w in next {
            adj[w].remove(&v);
            if alive[w] && adj[w].len() <= 1 && !is_target.contains(&w) {
                queue.push_back(w);
            }
        }
        adj[v].clear();
    }

    let mut host = LabeledGraph::new();
    let mut map = vec![usize::MAX; b.names.len()];
    for v in (0..b.names.len()).filter(|&v| alive[v]) {
        map[v] = host.add_vertex(&b.names[v])?;
    }
    for &(x, y) in &b.edges {
        if alive[x] && alive[y] {
            host.add_edge(map[x], map[y])?;
        }
    }
    let mut shrub = Shrub { host, ..Shrub::default() };
    for t in d.targets() {
        shrub.set_color(t, 1)?;
    }
    shrub.diameter = shrub.measured_diameter().unwrap_or(0);
    shrub.signature = (1..=shrub.diameter / 4).map(|k| (1, 1, 4 * k)).collect();
    let report = shrub.verify(Some(&want));
    if !report.passed() {
        return Err(ShrubError::Contract(report.failures().join("; ")));
    }
    Ok(shrub)
}

/// Checks the largest distance between decoded vertices of a converted
/// shrub against `16 col_1 + 18`, reporting the host diameter and the
/// tighter figure `4 col_1 + 4` alongside, checks the one-color
/// multiple-of-four signature and
/// that target distances run through dominant vertices, and measures the
/// coloring-number overhead for radii `1..=r_max` with new vertices ranked
/// above the lacon.
pub fn check_lemma7_bounds(d: &Lacon, s: &Shrub, r_max: usize) -> Report {
    let mut report = Report::new();
    let lacon_graph = d.ordered_graph();
    let col1 = lacon_graph.coloring_number(1, ReachMode::Strong);
    let measured = s.measured_diameter();

    let mut diameter = Check::new("diameter-bound");
    let bound = 16 * col1 + 18;
    match s.leaf_diameter() {
        Ok(m) if m <= bound => diameter.metric("leaf_diameter", m),
        Ok(m) => {
            diameter.fail(format!("decoded vertices at distance {m} exceed {bound}"));
            diameter.metric("leaf_diameter", m);
        }
        Err(e) => diameter.fail(e.to_string()),
    }
    diameter.metric("host_diameter", measured.unwrap_or(usize::MAX));
    diameter.metric("bound", bound);
    diameter.metric("scheme_bound", 8 * (2 * col1 + 1) + 2);
    diameter.metric("tight_figure", 4 * col1 + 4);
    diameter.metric("col1", col1);
    report.push(diameter);

    let mut shape = Check::new("one-color");
    if s.colors.values().any(|&c| c != 1) {
        shape.fail("more than one color".to_string());
    }
    for &(i, j, l) in &s.signature {
        if i != 1 || j != 1 || l % 4 != 0 {
            shape.fail(format!("signature entry ({i},{j},{l})"));
        }
    }
    report.push(shape);

    let mut route = Check::new("dominant-route");
    let adj = s.host.adjacency();
    let m = col1 + 1;
    let position: Vec<Vec<usize>> = (0..d.target_count())
        .map(|t| {
            let mut pos = vec![0; d.hidden_count()];
            for (i, h) in descending_neighbors(d, t).into_iter().enumerate() {
                pos[h] = i + 1;
            }
            pos
        })
        .collect();
    for t in 0..d.target_count() {
        let Some(a) = s.host.vertex(&d.targets()[t]) else { continue };
        let dist = bfs(&adj, a);
        for u in t + 1..d.target_count() {
            let (Some(b), Ok(h)) = (s.host.vertex(&d.targets()[u]), d.dominant(t, u)) else { continue };
            let label = d.label(h);
            let expected = 2 + gadget_length(m, position[t][h], label) + gadget_length(m, position[u][h], label);
            if dist[b] != expected {
                route.fail(format!("{{{},{}}}: distance {} but {expected} through {}", d.targets()[t], d.targets()[u], dist[b], d.hidden()[h]));
            }
        }
    }
    report.push(route);

    let mut overhead = Check::new("coloring-overhead");
    let host_graph = shrub_order(d, s);
    let mut worst = 0i64;
    for r in 1..=r_max {
        for mode in [ReachMode::Strong, ReachMode::Weak] {
            let diff = host_graph.coloring_number(r, mode) as i64 - lacon_graph.coloring_number(r, mode) as i64;
            worst = worst.max(diff);
        }
    }
    overhead.metric("max_overhead", worst);
    overhead.metric("col2", lacon_graph.coloring_number(2, ReachMode::Strong));
    report.push(overhead);
    report
}

/// The host with lacon vertices ranked as in the lacon and all other
/// vertices above them in declaration order.
fn shrub_order(d: &Lacon, s: &Shrub) -> OrderedGraph {
    let offset = d.target_count() + d.hidden_count();
    let mut lacon_rank: BTreeMap<&str, usize> = BTreeMap::new();
    for (t, name) in d.targets().iter().enumerate() {
        lacon_rank.insert(name, d.target_rank(t));
    }
    for (h, name) in d.hidden().iter().enumerate() {
        lacon_rank.insert(name, d.hidden_rank(h));
    }
    let rank: Vec<usize> = (0..s.host.vertex_count())
        .map(|v| lacon_rank.get(s.host.name(v)).copied().unwrap_or(offset + v))
        .collect();
    OrderedGraph::new(s.host.adjacency(), rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lacon::tests::{golden_graph, golden_lacon, random_undirected};
    use proptest::prelude::*;

    fn golden_shrub() -> Shrub {
        let mut host = LabeledGraph::with_vertices(&["n1", "n2", "n3", "a", "b", "c", "d", "e"]).unwrap();
        for (x, y) in [("n1", "n2"), ("n2", "n3"), ("n1", "n3"), ("n2", "a"), ("n2", "c"), ("n1", "b"), ("n1", "d"), ("n3", "e")] {
            host.add_edge_by_name(x, y).unwrap();
        }
        let mut s = Shrub { host, diameter: 3, ..Shrub::default() };
        for (v, c) in [("a", 1), ("b", 1), ("c", 2), ("d", 2), ("e", 2)] {
            s.set_color(v, c).unwrap();
        }
        s.signature = [(1, 2, 2), (2, 1, 2), (1, 1, 3), (2, 2, 3)].into_iter().collect();
        s
    }

    #[test]
    fn golden_shrub_decodes_and_verifies() {
        let s = golden_shrub();
        assert!(s.decode().unwrap().same_structure(&golden_graph()));
        assert!(s.verify(Some(&golden_graph())).passed());
    }

    #[test]
    fn small_diameter_bound_fails() {
        let mut s = golden_shrub();
        s.diameter = 2;
        s.signature.retain(|e| e.2 <= 2);
        let r = s.verify(None);
        let check = r.check("diameter").unwrap();
        assert!(!check.passed);
        assert!(check.witnesses.iter().any(|w| w.starts_with("a-e at distance 3")));
    }

    #[test]
    fn mutated_signature_fails_with_pair() {
        let mut s = golden_shrub();
        s.signature.remove(&(1, 1, 3));
        let r = s.verify(Some(&golden_graph()));
        assert!(!r.check("edges").unwrap().passed);
        assert_eq!(r.check("edges").unwrap().witnesses, ["a-b"]);
        let mut t = golden_shrub();
        t.signature.remove(&(2, 1, 2));
        assert!(!t.verify(None).check("signature").unwrap().passed);
    }

    #[test]
    fn uncolored_pendant_fails() {
        let mut s = golden_shrub();
        s.colors.remove("e");
        let r = s.verify(None);
        assert!(!r.check("pendant-vertices").unwrap().passed);
    }

    #[test]
    fn star_and_empty_signature() {
        let mut host = LabeledGraph::with_vertices(&["root", "p", "q", "r"]).unwrap();
        for leaf in ["p", "q", "r"] {
            host.add_edge_by_name("root", leaf).unwrap();
        }
        let mut s = Shrub { host, diameter: 2, ..Shrub::default() };
        for leaf in ["p", "q", "r"] {
            s.set_color(leaf, 1).unwrap();
        }
        assert_eq!(s.decode().unwrap().edge_count(), 0);
        s.signature.insert((1, 1, 2));
        assert_eq!(s.decode().unwrap().edge_count(), 3);
    }

    #[test]
    fn k2_lacon_converts() {
        let mut l = Lacon::undirected();
        l.add_target("v1").unwrap();
        l.add_target("v2").unwrap();
        l.add_hidden("h", true).unwrap();
        l.connect(0, 0).unwrap();
        l.connect(1, 0).unwrap();
        let s = lacon_to_shrub(&l).unwrap();
        let m = gadget_offset(&l);
        let pair = 2 + 2 * gadget_length(m, 1, true);
        assert_eq!(pair % 4, 0);
        let (a, b) = (s.host.vertex("v1").unwrap(), s.host.vertex("v2").unwrap());
        assert_eq!(bfs(&s.host.adjacency(), a)[b], pair);
        assert_eq!(s.decode().unwrap().edge_count(), 1);
        let r = check_lemma7_bounds(&l, &s, 3);
        assert!(r.passed(), "{:?}", r.failures());
        assert_eq!(s.leaf_diameter(), Ok(pair));
        assert_eq!(s.measured_diameter(), Some(pair));
        assert!(s.host.vertex("v1_port").is_some() && s.host.vertex("v1_h_1").is_some());
    }

    #[test]
    fn golden_lacon_converts() {
        let l = golden_lacon();
        let s = lacon_to_shrub(&l).unwrap();
        assert!(s.decode().unwrap().same_structure(&golden_graph()));
        let r = check_lemma7_bounds(&l, &s, 3);
        assert!(r.passed(), "{:?}", r.failures());
    }

    #[test]
    fn single_target_keeps_a_pendant_target() {
        let mut l = Lacon::undirected();
        l.add_target("only").unwrap();
        l.add_hidden("h", false).unwrap();
        l.connect(0, 0).unwrap();
        let s = lacon_to_shrub(&l).unwrap();
        assert_eq!(s.leaves().len(), 1);
        assert!(s.verify(None).passed());
        assert!(s.host.vertex("h").is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn bounded_diameter_matches_all_pairs(n in 1usize..=12, bits in proptest::collection::vec(any::<bool>(), 66)) {
            let mut adj = vec![Vec::new(); n];
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k % bits.len()] {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                    k += 1;
                }
            }
            let brute = (0..n).map(|s| bfs(&adj, s).into_iter().max().unwrap_or(0)).max().unwrap_or(0);
            let want = (brute != usize::MAX).then_some(brute);
            prop_assert_eq!(diameter(&adj), want);
        }

        #[test]
        fn conversion_preserves_decode(
            targets in 1usize..=6,
            hidden in 1usize..=5,
            bits in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let l = random_undirected(targets, &bits, hidden);
            let s = lacon_to_shrub(&l).unwrap();
            prop_assert!(s.decode().unwrap().same_structure(&l.decode().unwrap()));
            let r = check_lemma7_bounds(&l, &s, 2);
            prop_assert!(r.passed(), "{:?}", r.failures());
        }
    }
}
