//! Strong and weak reachability, generalized coloring numbers, order search,
//! and exact treewidth and treedepth for small graphs.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::graph::{GraphError, LabeledGraph, LinearOrder};
use crate::report::{Check, Report};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ColoringError {
    #[error("graph has {size} vertices, above the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Radius {
    Finite(usize),
    Infinite,
}

impl Radius {
    /// Path-length bound on a graph with `n` vertices.
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Radius::Finite(r) => r,
            Radius::Infinite => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReachMode {
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exhaustive,
    Greedy,
}

/// Adjacency lists together with a dense rank per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedGraph {
    adj: Vec<Vec<usize>>,
    rank: Vec<usize>,
}

impl OrderedGraph {
    pub fn new(adj: Vec<Vec<usize>>, rank: Vec<usize>) -> Self {
        assert_eq!(adj.len(), rank.len());
        OrderedGraph { adj, rank }
    }

    /// Gaifman graph of `g` ranked by `order`.
    pub fn from_graph(g: &LabeledGraph, order: &LinearOrder) -> Result<Self, GraphError> {
        Ok(OrderedGraph::new(g.gaifman_adjacency(), order.rank_vector(g)?))
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adj
    }

    pub fn ranks(&self) -> &[usize] {
        &self.rank
    }

    pub fn with_ranks(&self, rank: Vec<usize>) -> Self {
        OrderedGraph::new(self.adj.clone(), rank)
    }

    /// Vertices strongly `r`-reachable from `v`, ascending by index.
    pub fn strong_reach(&self, v: usize, r: usize) -> Vec<usize> {
        let n = self.len();
        let rv = self.rank[v];
        let mut dist = vec![usize::MAX; n];
        let mut found = vec![false; n];
        found[v] = true;
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(w) = queue.pop_front() {
            if dist[w] >= r {
                continue;
            }
            for &x in &self.adj[w] {
                if self.rank[x] < rv {
                    found[x] = true;
                } else if self.rank[x] > rv && dist[x] == usize::MAX {
                    dist[x] = dist[w] + 1;
                    queue.push_back(x);
                }
            }
        }
        (0..n).filter(|&u| found[u]).collect()
    }

    /// Vertices weakly `r`-reachable from `v`, ascending by index.
    pub fn weak_reach(&self, v: usize, r: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&u| self.rank[u] <= self.rank[v] && self.bounded_distance(u, v, r, self.rank[u]).is_some())
            .collect()
    }

    pub fn reach(&self, v: usize, r: usize, mode: ReachMode) -> Vec<usize> {
        match mode {
            ReachMode::Strong => self.strong_reach(v, r),
            ReachMode::Weak => self.weak_reach(v, r),
        }
    }

    /// `wreach_r` for every vertex at once, each list ascending by index.
    pub fn weak_reach_all(&self, r: usize) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut out = vec![Vec::new(); n];
        let mut dist = vec![usize::MAX; n];
        let mut touched = Vec::new();
        for u in 0..n {
            let ru = self.rank[u];
            dist[u] = 0;
            touched.push(u);
            let mut queue = VecDeque::from([u]);
            while let Some(w) = queue.pop_front() {
                out[w].push(u);
                if dist[w] >= r {
                    continue;
                }
                for &x in &self.adj[w] {
                    if self.rank[x] >= ru && dist[x] == usize::MAX {
                        dist[x] = dist[w] + 1;
                        touched.push(x);
                        queue.push_back(x);
                    }
                }
            }
            for x in touched.drain(..) {
                dist[x] = usize::MAX;
            }
        }
        out
    }

    pub fn strong_reach_all(&self, r: usize) -> Vec<Vec<usize>> {
        (0..self.len()).map(|v| self.strong_reach(v, r)).collect()
    }

    pub fn reach_all(&self, r: usize, mode: ReachMode) -> Vec<Vec<usize>> {
        match mode {
            ReachMode::Strong => self.strong_reach_all(r),
            ReachMode::Weak => self.weak_reach_all(r),
        }
    }

    /// `col_r` or `wcol_r` of this ordered graph; zero when empty.
    pub fn coloring_number(&self, r: usize, mode: ReachMode) -> usize {
        match mode {
            ReachMode::Strong => (0..self.len())
                .map(|v| self.strong_reach(v, r).len())
                .max()
                .unwrap_or(0),
            ReachMode::Weak => self.weak_reach_all(r).iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    /// Length of a shortest `a`–`b` path inside the vertices of rank at
    /// least `floor`, if at most `limit`.
    fn bounded_distance(&self, a: usize, b: usize, limit: usize, floor: usize) -> Option<usize> {
        self.bounded_distance_avoiding(a, b, limit, |x| self.rank[x] >= floor)
    }

    fn bounded_distance_avoiding(
        &self,
        a: usize,
        b: usize,
        limit: usize,
        allowed: impl Fn(usize) -> bool,
    ) -> Option<usize> {
        if !allowed(a) || !allowed(b) {
            return None;
        }
        if a == b {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.len()];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(w) = queue.pop_front() {
            if dist[w] >= limit {
                continue;
            }
            for &x in &self.adj[w] {
                if dist[x] == usize::MAX && allowed(x) {
                    dist[x] = dist[w] + 1;
                    if x == b {
                        return Some(dist[x]);
                    }
                    queue.push_back(x);
                }
            }
        }
        None
    }
}

/// Coloring numbers for a list of radii.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringProfile {
    pub mode: ReachMode,
    pub values: Vec<(Radius, usize)>,
}

impl ColoringProfile {
    pub fn compute(g: &OrderedGraph, radii: &[Radius], mode: ReachMode) -> Self {
        let values = radii
            .iter()
            .map(|&r| (r, g.coloring_number(r.resolve(g.len()), mode)))
            .collect();
        ColoringProfile { mode, values }
    }

    /// True when values never decrease as the radius grows.
    pub fn is_monotone(&self) -> bool {
        let mut sorted = self.values.clone();
        sorted.sort();
        sorted.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

pub fn coloring_number(
    g: &LabeledGraph,
    order: &LinearOrder,
    radius: Radius,
    mode: ReachMode,
) -> Result<usize, GraphError> {
    let og = OrderedGraph::from_graph(g, order)?;
    Ok(og.coloring_number(radius.resolve(g.vertex_count()), mode))
}

/// Reach set of the named vertex, as names in ascending rank order.
pub fn reach(
    g: &LabeledGraph,
    order: &LinearOrder,
    v: &str,
    radius: Radius,
    mode: ReachMode,
) -> Result<Vec<String>, GraphError> {
    let og = OrderedGraph::from_graph(g, order)?;
    let vi = g.require(v)?;
    let mut set = og.reach(vi, radius.resolve(g.vertex_count()), mode);
    set.sort_by_key(|&u| og.rank[u]);
    Ok(set.into_iter().map(|u| g.name(u).into()).collect())
}

/// An order minimizing the coloring number.
///
/// Exhaustive search visits rank vectors (indexed by declaration order) in
/// lexicographic order and keeps the first minimum. Greedy search repeatedly
/// removes a minimum-degree vertex (name ties broken lexicographically) and
/// ranks removed vertices from the top down.
pub fn optimal_order(
    g: &LabeledGraph,
    radius: Radius,
    mode: ReachMode,
    strategy: Strategy,
    cap: usize,
) -> Result<(LinearOrder, usize), ColoringError> {
    let n = g.vertex_count();
    let r = radius.resolve(n);
    let adj = g.gaifman_adjacency();
    match strategy {
        Strategy::Exhaustive => {
            if n > cap {
                return Err(ColoringError::CapExceeded { size: n, cap });
            }
            let mut perm: Vec<usize> = (0..n).collect();
            let mut best: Option<(usize, Vec<usize>)> = None;
            loop {
                let value = OrderedGraph::new(adj.clone(), perm.clone()).coloring_number(r, mode);
                if best.as_ref().is_none_or(|(b, _)| value < *b) {
                    best = Some((value, perm.clone()));
                }
                if !next_permutation(&mut perm) {
                    break;
                }
            }
            let (value, ranks) = best.unwrap_or((0, Vec::new()));
            Ok((LinearOrder::from_rank_vector(g, &ranks), value))
        }
        Strategy::Greedy => {
            let ranks = smallest_last(g, &adj);
            let value = OrderedGraph::new(adj, ranks.clone()).coloring_number(r, mode);
            Ok((LinearOrder::from_rank_vector(g, &ranks), value))
        }
    }
}

fn smallest_last(g: &LabeledGraph, adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut ranks = vec![0; n];
    for step in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by(|&a, &b| degree[a].cmp(&degree[b]).then_with(|| g.name(a).cmp(g.name(b))))
            .expect("a vertex remains");
        alive[v] = false;
        ranks[v] = n - 1 - step;
        for &w in &adj[v] {
            if alive[w] {
                degree[w] -= 1;
            }
        }
    }
    ranks
}

/// Advances to the next permutation in lexicographic order.
pub fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn bitmask_adjacency(g: &LabeledGraph, cap: usize) -> Result<Vec<u32>, ColoringError> {
    let n = g.vertex_count();
    if n > cap || n > 24 {
        return Err(ColoringError::CapExceeded { size: n, cap: cap.min(24) });
    }
    Ok(g.gaifman_adjacency()
        .iter()
        .map(|ns| ns.iter().fold(0u32, |m, &w| m | 1 << w))
        .collect())
}

/// Exact treewidth by dynamic programming over elimination prefixes.
pub fn treewidth(g: &LabeledGraph, cap: usize) -> Result<usize, ColoringError> {
    let adj = bitmask_adjacency(g, cap)?;
    let n = adj.len();
    if n == 0 {
        return Ok(0);
    }
    let full = (1u32 << n) - 1;
    let mut best = vec![usize::MAX; 1 << n];
    best[0] = 0;
    for set in 1..=full {
        let mut value = usize::MAX;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let prefix = set & !(1 << v);
            let back = eliminated_neighbors(&adj, prefix, v).count_ones() as usize;
            value = value.min(best[prefix as usize].max(back));
        }
        best[set as usize] = value;
    }
    Ok(best[full as usize])
}

/// Vertices outside `prefix ∪ {v}` reachable from `v` through `prefix`.
fn eliminated_neighbors(adj: &[u32], prefix: u32, v: usize) -> u32 {
    let mut seen = 1u32 << v;
    let mut frontier = 1u32 << v;
    let mut outside = 0u32;
    while frontier != 0 {
        let w = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[w] & !seen;
        seen |= fresh;
        outside |= fresh & !prefix;
        frontier |= fresh & prefix;
    }
    outside
}

/// Exact treedepth: one plus the best root removal per connected component.
pub fn treedepth(g: &LabeledGraph, cap: usize) -> Result<usize, ColoringError> {
    let adj = bitmask_adjacency(g, cap)?;
    let n = adj.len();
    let mut memo = vec![u8::MAX; 1 << n];
    Ok(treedepth_of(&adj, ((1u64 << n) - 1) as u32, &mut memo) as usize)
}

fn treedepth_of(adj: &[u32], set: u32, memo: &mut [u8]) -> u8 {
    if set == 0 {
        return 0;
    }
    if memo[set as usize] != u8::MAX {
        return memo[set as usize];
    }
    let first = set.trailing_zeros() as usize;
    let component = component_of(adj, set, first);
    let value = if component != set {
        treedepth_of(adj, component, memo).max(treedepth_of(adj, set & !component, memo))
    } else {
        let mut best = u8::MAX;
        let mut rest = set;
        while rest != 0 {
            let v = rest.trailing_zeros();
            rest &= rest - 1;
            best = best.min(1 + treedepth_of(adj, set & !(1 << v), memo));
        }
        best
    };
    memo[set as usize] = value;
    value
}

fn component_of(adj: &[u32], set: u32, start: usize) -> u32 {
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let w = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[w] & set & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen
}

/// How vertex choices for the reachability facts are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Every vertex triple for items 1–2 and every chain of at most three
    /// vertices for items 3–4.
    Exhaustive,
    /// Random choices from a seeded generator.
    Random { samples: usize, seed: u64 },
}

/// Checks the five reachability facts on one ordered graph. Each item
/// becomes one check carrying `checked` and `vacuous` counts.
pub fn check_colfacts(g: &LabeledGraph, order: &LinearOrder, r: usize, sampling: Sampling) -> Result<Report, GraphError> {
    let og = OrderedGraph::from_graph(g, order)?;
    let mut facts = Facts::new(&og, r, g);
    match sampling {
        Sampling::Exhaustive => {
            let n = og.len();
            for v in 0..n {
                for u in 0..n {
                    for w in 0..n {
                        facts.item1(v, u, w);
                    }
                    facts.item2(v, u);
                }
            }
            for a in 0..n {
                for b in 0..n {
                    facts.chain(&[a, b]);
                    for c in 0..n {
                        facts.chain(&[a, b, c]);
                    }
                }
            }
        }
        Sampling::Random { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = og.len();
            if n > 0 {
                for _ in 0..samples {
                    let v = below(&mut rng, n);
                    let wr = &facts.wreach_r[v];
                    let u = wr[below(&mut rng, wr.len())];
                    let w = wr[below(&mut rng, wr.len())];
                    facts.item1(v, u, w);
                    facts.item2(v, below(&mut rng, n));
                    let k = 2 + below(&mut rng, 3);
                    match sample_chain(&og, &facts.related, k, &mut rng) {
                        Some(chain) => facts.chain(&chain),
                        None => {
                            facts.counts[2].1 += 1;
                            facts.counts[3].1 += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(facts.finish())
}

pub(crate) fn below(rng: &mut impl RngCore, n: usize) -> usize {
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// A chain whose last vertex is the rank minimum of all but the first one,
/// and whose first vertex ranks no higher than the last.
fn sample_chain(og: &OrderedGraph, related: &[Vec<usize>], k: usize, rng: &mut impl RngCore) -> Option<Vec<usize>> {
    let n = og.len();
    let last = below(rng, n);
    let floor = og.rank[last];
    let mut chain = vec![last];
    for _ in 1..k - 1 {
        let prev = *chain.last().unwrap();
        let options: Vec<usize> = related[prev].iter().copied().filter(|&x| og.rank[x] >= floor).collect();
        chain.push(options[below(rng, options.len())]);
    }
    let prev = *chain.last().unwrap();
    let options: Vec<usize> = related[prev].iter().copied().filter(|&x| og.rank[x] <= floor).collect();
    if options.is_empty() {
        return None;
    }
    chain.push(options[below(rng, options.len())]);
    chain.reverse();
    Some(chain)
}

struct Facts<'a> {
    og: &'a OrderedGraph,
    g: &'a LabeledGraph,
    r: usize,
    wreach_r: Vec<Vec<usize>>,
    wreach_2r: Vec<Vec<usize>>,
    related: Vec<Vec<usize>>,
    counts: [(usize, usize); 5],
    checks: Vec<Check>,
}

impl<'a> Facts<'a> {
    fn new(og: &'a OrderedGraph, r: usize, g: &'a LabeledGraph) -> Self {
        let wreach_r = og.weak_reach_all(r);
        let wreach_2r = og.weak_reach_all(2 * r);
        let n = og.len();
        let mut related = vec![Vec::new(); n];
        for v in 0..n {
            for &u in &wreach_r[v] {
                related[v].push(u);
                if u != v {
                    related[u].push(v);
                }
            }
        }
        for list in &mut related {
            list.sort_unstable();
            list.dedup();
        }
        let checks = (1..=5).map(|i| Check::new(&format!("item{i}"))).collect();
        Facts { og, g, r, wreach_r, wreach_2r, related, counts: [(0, 0); 5], checks }
    }

    fn name(&self, v: usize) -> &str {
        self.g.name(v)
    }

    fn item1(&mut self, v: usize, u: usize, w: usize) {
        let wr = &self.wreach_r[v];
        if !(wr.binary_search(&u).is_ok() && wr.binary_search(&w).is_ok() && self.og.rank[w] < self.og.rank[u]) {
            self.counts[0].1 += 1;
            return;
        }
        self.counts[0].0 += 1;
        if self.wreach_2r[u].binary_search(&w).is_err() {
            let msg = format!("v={} u={} w={}", self.name(v), self.name(u), self.name(w));
            self.checks[0].fail(msg);
        }
    }

    fn item2(&mut self, v: usize, w: usize) {
        self.counts[1].0 += 1;
        let (a, b) = (&self.wreach_r[v], &self.wreach_r[w]);
        let sep: Vec<usize> = a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect();
        let blocked = |x: usize| sep.binary_search(&x).is_err();
        if self.og.bounded_distance_avoiding(v, w, self.r, blocked).is_some() {
            let msg = format!("v={} w={}", self.name(v), self.name(w));
            self.checks[1].fail(msg);
        }
    }

    fn chain(&mut self, chain: &[usize]) {
        let k = chain.len();
        let linked = chain
            .windows(2)
            .all(|p| self.related[p[0]].binary_search(&p[1]).is_ok());
        let rank = |v: usize| self.og.rank[v];
        let last = chain[k - 1];
        let tail_min = chain[1..].iter().map(|&v| rank(v)).min().unwrap();
        let item3 = linked && rank(chain[0]) <= rank(last) && tail_min == rank(last);
        let item4 = linked && chain.iter().all(|&v| rank(chain[0]) <= rank(v));
        let label: String = chain
            .iter()
            .map(|&v| self.name(v))
            .collect::<Vec<_>>()
            .join(",");
        if item3 {
            self.counts[2].0 += 1;
            let reach = self.og.strong_reach(last, self.r * k);
            let ok = reach
                .iter()
                .any(|&w| self.wreach_r[w].binary_search(&chain[0]).is_ok());
            if !ok {
                let msg = format!("chain {label}");
                self.checks[2].fail(msg);
            }
        } else {
            self.counts[2].1 += 1;
        }
        if item4 {
            self.counts[3].0 += 1;
            if !self.og.weak_reach(last, self.r * k).contains(&chain[0]) {
                let msg = format!("chain {label}");
                self.checks[3].fail(msg);
            }
        } else {
            self.counts[3].1 += 1;
        }
    }

    fn finish(mut self) -> Report {
        let col = self.og.coloring_number(self.r, ReachMode::Strong);
        let wcol = self.wreach_r.iter().map(Vec::len).max().unwrap_or(0);
        self.counts[4].0 = 1;
        let bound = (col as u128).saturating_pow(self.r as u32);
        if wcol as u128 > bound {
            let msg = format!("wcol={wcol} col={col} r={}", self.r);
            self.checks[4].fail(msg);
        }
        self.checks[4].metric("col", col);
        self.checks[4].metric("wcol", wcol);
        let mut report = Report::new();
        for (i, mut check) in self.checks.into_iter().enumerate() {
            check.metric("checked", self.counts[i].0);
            check.metric("vacuous", self.counts[i].1);
            report.push(check);
        }
        report
    }
}
