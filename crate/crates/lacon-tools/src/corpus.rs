//! Seeded corpus runner: small-graph enumeration, random generators and one
//! aggregated check per acceptance criterion.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use lacon_core::coloring::{check_colfacts, optimal_order, treedepth, treewidth, OrderedGraph, Radius, ReachMode, Sampling, Strategy};
use lacon_core::graph::LinearOrder;
use lacon_core::lacon::{build_directed_lacon, check_lemma5_bounds, directed_to_undirected, BuildOptions, Converted, Lacon};
use lacon_core::logic::determination::all_instances;
use lacon_core::logic::separation::r_separates;
use lacon_core::logic::{check_determination, interpret, parse_formula, separated_expression, BlockSpec, Formula, Program};
use lacon_core::parity::{check_lemma8_bounds, lacon_to_parity};
use lacon_core::pipeline::{apply_transduction, check_pipeline, theorem4_pipeline, ExpansionChoice, Transduction};
use lacon_core::report::{Check, Report};
use lacon_core::shrub::{check_lemma7_bounds, lacon_to_shrub};
use lacon_core::LabeledGraph;

use crate::formats::{parse_graph, parse_lacon, parse_parity, parse_shrub};

pub const GOLDEN_GRAPH: &str = include_str!("../data/golden.graph");
pub const GOLDEN_ORDER: &str = include_str!("../data/golden.order");
pub const GOLDEN_LACON: &str = include_str!("../data/golden.lacon");
pub const GOLDEN_SHRUB: &str = include_str!("../data/golden.shrub");
pub const GOLDEN_PARITY: &str = include_str!("../data/golden.parity");

pub const DEFAULT_SEED: u64 = 2024;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CapsError {
    #[error("`{0}` is not of the form key=value")]
    Malformed(String),
    #[error("unknown cap `{0}`")]
    Unknown(String),
    #[error("cap `{0}` must be a positive integer")]
    Value(String),
}

/// Size limits for exhaustive searches and sampled runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest vertex count for exhaustive order search.
    pub exhaustive_order: usize,
    /// Largest type rank used by the determination check.
    pub type_rank: u32,
    /// Largest graph in the exhaustive interpretation and coloring runs.
    pub graph_size: usize,
    /// Sampled instances of the reachability facts.
    pub colfacts: usize,
    pub random_lacons: usize,
    pub pipeline_cases: usize,
    /// Random orders per graph in the interpretation run.
    pub orders: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            exhaustive_order: 8,
            type_rank: 3,
            graph_size: 6,
            colfacts: 10_000,
            random_lacons: 500,
            pipeline_cases: 50,
            orders: 5,
        }
    }
}

impl Caps {
    pub const KEYS: [&'static str; 7] =
        ["exhaustive-order", "type-rank", "graph-size", "colfacts", "random-lacons", "pipeline-cases", "orders"];

    /// Applies `key=value,...` overrides. `type-rank` may be zero; every
    /// other cap must be positive.
    pub fn parse(spec: &str) -> Result<Caps, CapsError> {
        let mut caps = Caps::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| CapsError::Malformed(item.to_string()))?;
            let value: usize = value.trim().parse().map_err(|_| CapsError::Value(key.to_string()))?;
            if value == 0 && key != "type-rank" {
                return Err(CapsError::Value(key.to_string()));
            }
            match key.trim() {
                "exhaustive-order" => caps.exhaustive_order = value,
                "type-rank" => caps.type_rank = value as u32,
                "graph-size" => caps.graph_size = value,
                "colfacts" => caps.colfacts = value,
                "random-lacons" => caps.random_lacons = value,
                "pipeline-cases" => caps.pipeline_cases = value,
                "orders" => caps.orders = value,
                other => return Err(CapsError::Unknown(other.to_string())),
            }
        }
        Ok(caps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub caps: Caps,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { seed: DEFAULT_SEED, caps: Caps::default() }
    }
}

/// Independent generator for item `index` of stream `stream`.
pub fn rng_for(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) << 20);
    rng
}

fn vertex_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("v{i}")).collect()
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

fn graph_from_mask(n: usize, mask: u32) -> LabeledGraph {
    let mut g = LabeledGraph::with_vertices(&vertex_names(n)).expect("generated names are valid");
    for (k, &(a, b)) in pairs(n).iter().enumerate() {
        if mask >> k & 1 == 1 {
            g.add_edge(a, b).expect("distinct endpoints");
        }
    }
    g
}

fn connected_mask(n: usize, mask: u32) -> bool {
    if n == 0 {
        return true;
    }
    let ps = pairs(n);
    let mut seen = 1u32;
    loop {
        let mut next = seen;
        for (k, &(a, b)) in ps.iter().enumerate() {
            if mask >> k & 1 == 1 && (seen >> a & 1 == 1 || seen >> b & 1 == 1) {
                next |= 1 << a | 1 << b;
            }
        }
        if next == seen {
            return seen.count_ones() as usize == n;
        }
        seen = next;
    }
}

/// One graph per isomorphism class on `n` vertices named `v1..vn`, in
/// increasing order of canonical edge mask.
pub fn graphs_up_to_iso(n: usize, connected_only: bool) -> Vec<LabeledGraph> {
    let ps = pairs(n);
    let index: BTreeMap<(usize, usize), usize> = ps.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut perms = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        perms.push(p.clone());
        if !lacon_core::coloring::next_permutation(&mut p) {
            break;
        }
    }
    let mut seen = BTreeSet::new();
    for mask in 0..1u32 << ps.len() {
        if connected_only && !connected_mask(n, mask) {
            continue;
        }
        let canonical = perms
            .iter()
            .map(|perm| {
                ps.iter().enumerate().filter(|&(k, _)| mask >> k & 1 == 1).fold(0u32, |acc, (_, &(a, b))| {
                    let (x, y) = (perm[a].min(perm[b]), perm[a].max(perm[b]));
                    acc | 1 << index[&(x, y)]
                })
            })
            .min()
            .unwrap_or(0);
        seen.insert(canonical);
    }
    seen.into_iter().map(|mask| graph_from_mask(n, mask)).collect()
}

pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> LabeledGraph {
    let mut g = LabeledGraph::with_vertices(&vertex_names(n)).expect("generated names are valid");
    for (a, b) in pairs(n) {
        if rng.gen_bool(density) {
            g.add_edge(a, b).expect("distinct endpoints");
        }
    }
    g
}

pub fn random_order(rng: &mut impl Rng, g: &LabeledGraph) -> LinearOrder {
    let mut seq = g.names().to_vec();
    seq.shuffle(rng);
    LinearOrder::from_sequence(&seq).expect("names are distinct")
}

/// Random undirected lacon whose first hidden vertex joins every target, so
/// that every pair has a common neighbor. Hidden vertices are shuffled in
/// the order.
pub fn random_lacon(rng: &mut impl Rng, targets: usize, hidden: usize) -> Lacon {
    let mut l = Lacon::undirected();
    for t in 0..targets {
        l.add_target(&format!("t{t}")).expect("fresh name");
    }
    for h in 0..hidden {
        l.add_hidden(&format!("h{h}"), rng.gen_bool(0.5)).expect("fresh name");
        for t in 0..targets {
            if h == 0 || rng.gen_bool(0.5) {
                l.connect(t, h).expect("undirected lacon");
            }
        }
    }
    let mut seq: Vec<String> = l.hidden().to_vec();
    seq.shuffle(rng);
    seq.extend(l.targets().iter().cloned());
    l.set_order(&LinearOrder::from_sequence(&seq).expect("names are distinct")).expect("order covers the lacon");
    l
}

/// Binary formulas of quantifier rank at most two used by the
/// interpretation run. The labeled ones refer to label `L`.
pub fn interpretation_formulas() -> Vec<(&'static str, Formula)> {
    [
        ("edge", "(edge x y)"),
        ("non-edge", "(not (edge x y))"),
        ("two-step", "(exists z (and (edge x z) (edge z y)))"),
        ("within-two", "(or (edge x y) (exists z (and (edge x z) (edge z y))))"),
        ("labeled-edge", "(and (label L x) (edge x y))"),
        ("labeled-pair", "(or (edge x y) (and (label L x) (label L y)))"),
        ("labeled-middle", "(exists z (and (label L z) (and (edge x z) (edge z y))))"),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_formula(text).expect("suite formulas parse")))
    .collect()
}

/// Aggregated outcome of one criterion: counts failures and keeps the
/// first witnesses.
struct Tally {
    check: Check,
    cases: usize,
}

impl Tally {
    fn new(name: &str) -> Self {
        Tally { check: Check::new(name), cases: 0 }
    }

    fn case(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.check.fail(witness());
        }
    }

    fn finish(mut self) -> Check {
        self.check.metric("cases", self.cases);
        self.check.metric("failures", self.check.violations);
        self.check
    }
}

/// Pair named by a verification witness, either `{x,y}: ...` or `x-y`.
pub fn witness_pair(w: &str) -> Option<(String, String)> {
    let pair = if let Some(rest) = w.strip_prefix('{') {
        rest.split_once('}')?.0.split_once(',')?
    } else {
        w.split_once('-')?
    };
    let (a, b) = (pair.0.to_string(), pair.1.to_string());
    Some(if a <= b { (a, b) } else { (b, a) })
}

fn pairs_of(report: &Report, check: &str) -> BTreeSet<(String, String)> {
    report.check(check).map(|c| c.witnesses.iter().filter_map(|w| witness_pair(w)).collect()).unwrap_or_default()
}

fn sorted_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Golden decompositions: each decodes to the graph and verifies, and every
/// single mutation fails with exactly the affected pairs as witnesses.
pub fn golden_decompositions() -> Check {
    let mut t = Tally::new("c01-golden-decompositions");
    let parsed = (
        parse_graph(GOLDEN_GRAPH),
        parse_order_or_identity(),
        parse_lacon(GOLDEN_LACON),
        parse_shrub(GOLDEN_SHRUB),
        parse_parity(GOLDEN_PARITY),
    );
    let (Ok(g), Ok(_), Ok(lacon), Ok(shrub), Ok(parity)) = parsed else {
        t.case(false, || "data files do not parse".into());
        return t.finish();
    };
    t.case(g.edge_count() == 6, || format!("graph has {} edges", g.edge_count()));
    for (kind, decoded, report) in [
        ("lacon", lacon.decode().ok(), lacon.verify(Some(&g))),
        ("shrub", shrub.decode().ok(), shrub.verify(Some(&g))),
        ("parity", parity.decode().ok(), parity.verify(Some(&g))),
    ] {
        t.case(decoded.is_some_and(|d| d.same_structure(&g)), || format!("{kind} does not decode to the graph"));
        t.case(report.passed(), || format!("{kind} fails verification: {:?}", report.failures()));
    }

    let mut mutations = 0usize;
    for h in 0..lacon.hidden_count() {
        let mut m = lacon.clone();
        m.set_label(h, !lacon.label(h));
        let mut expected = BTreeSet::new();
        for a in 0..m.target_count() {
            for b in a + 1..m.target_count() {
                let dominant = (0..m.hidden_count()).filter(|&k| m.joins(k, a, b)).max_by_key(|&k| m.hidden_rank(k));
                if dominant == Some(h) {
                    expected.insert(sorted_pair(&m.targets()[a], &m.targets()[b]));
                }
            }
        }
        let report = m.verify(Some(&g));
        mutations += 1;
        let got = pairs_of(&report, "edges");
        let name = &lacon.hidden()[h];
        t.case(!report.passed() && got == expected, || format!("flipping {name}: witnesses {got:?}, expected {expected:?}"));
    }

    let leaves = shrub.leaves();
    let adj = shrub.host.adjacency();
    for &(i, j, l) in &shrub.signature {
        let mut m = shrub.clone();
        m.signature.remove(&(i, j, l));
        let mut expected = BTreeSet::new();
        for (k, &u) in leaves.iter().enumerate() {
            let dist = distances(&adj, u);
            for &v in &leaves[k + 1..] {
                let (cu, cv) = (shrub.colors[shrub.host.name(u)], shrub.colors[shrub.host.name(v)]);
                if (cu, cv, dist[v]) == (i, j, l) {
                    expected.insert(sorted_pair(shrub.host.name(u), shrub.host.name(v)));
                }
            }
        }
        let report = m.verify(Some(&g));
        mutations += 1;
        let got = pairs_of(&report, "edges");
        t.case(!report.passed() && got == expected, || format!("removing ({i},{j},{l}): witnesses {got:?}, expected {expected:?}"));
    }

    for (h, name) in parity.hidden().iter().enumerate() {
        let mut m = parity.clone();
        m.remove_hidden(name).expect("hidden vertex exists");
        let members: Vec<&String> = parity.neighbors(h).iter().map(|t| &parity.targets()[t]).collect();
        let expected: BTreeSet<(String, String)> = members
            .iter()
            .enumerate()
            .flat_map(|(k, a)| members[k + 1..].iter().map(move |b| sorted_pair(a, b)))
            .collect();
        let report = m.verify(Some(&g));
        mutations += 1;
        let got = pairs_of(&report, "edges");
        t.case(!report.passed() && got == expected, || format!("removing {name}: witnesses {got:?}, expected {expected:?}"));
    }
    t.check.metric("mutations", mutations);
    t.finish()
}

fn distances(adj: &[Vec<usize>], source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[source] = 0;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

fn parse_order_or_identity() -> Result<LinearOrder, crate::formats::FormatError> {
    crate::formats::parse_order(GOLDEN_ORDER)
}

/// One built and converted lacon from the interpretation run.
#[derive(Debug, Clone)]
pub struct InterpretationCase {
    pub description: String,
    pub graph: LabeledGraph,
    pub order: LinearOrder,
    pub round_trip: Result<(), String>,
    pub escalations: Vec<String>,
    /// Directed lacon with non-dominant hidden vertices removed.
    pub directed: Option<Lacon>,
    pub converted: Option<Converted>,
}

/// Every connected graph up to isomorphism with at most `graph_size`
/// vertices, a random label set and `orders` random orders each.
pub fn interpretation_instances(config: &RunConfig) -> Vec<(String, LabeledGraph, LinearOrder)> {
    let mut out = Vec::new();
    let mut index = 0u64;
    for n in 1..=config.caps.graph_size {
        for (gi, g) in graphs_up_to_iso(n, true).into_iter().enumerate() {
            for k in 0..config.caps.orders {
                let mut rng = rng_for(config.seed, 1, index);
                index += 1;
                let mut labeled = g.clone();
                for v in 0..n {
                    if rng.gen_bool(0.5) {
                        labeled.add_label("L", v);
                    }
                }
                let order = random_order(&mut rng, &labeled);
                out.push((format!("n{n}g{gi}o{k}"), labeled, order));
            }
        }
    }
    out
}

pub fn interpretation_cases(config: &RunConfig) -> Vec<InterpretationCase> {
    let formulas = interpretation_formulas();
    let instances = interpretation_instances(config);
    let jobs: Vec<(usize, usize)> = (0..instances.len()).flat_map(|i| (0..formulas.len()).map(move |f| (i, f))).collect();
    jobs.par_iter()
        .map(|&(i, f)| {
            let (id, g, order) = &instances[i];
            let (fname, phi) = &formulas[f];
            let description = format!("{id}/{fname} edges {:?} order {:?}", g.named_edges(), order.sequence());
            run_interpretation_case(description, g, order, phi)
        })
        .collect()
}

fn run_interpretation_case(description: String, g: &LabeledGraph, order: &LinearOrder, phi: &Formula) -> InterpretationCase {
    let mut case = InterpretationCase {
        description,
        graph: g.clone(),
        order: order.clone(),
        round_trip: Ok(()),
        escalations: Vec::new(),
        directed: None,
        converted: None,
    };
    let built = match build_directed_lacon(g, order, phi, BuildOptions::default()) {
        Ok(b) => b,
        Err(e) => {
            case.round_trip = Err(format!("build failed: {e}"));
            return case;
        }
    };
    if built.escalations > 0 {
        case.escalations.push(format!("{}: type rank escalated {} time(s) to {}", case.description, built.escalations, built.rank));
    }
    let directed = built.lacon.pruned();
    let converted = match directed_to_undirected(&directed) {
        Ok(c) => c,
        Err(e) => {
            case.round_trip = Err(format!("conversion failed: {e}"));
            return case;
        }
    };
    let want = interpret(g, phi).expect("suite formulas are binary");
    case.round_trip = match converted.lacon.decode() {
        Ok(got) if got.same_structure(&want) => Ok(()),
        Ok(got) => Err(format!("decode differs: {:?}", got.structural_difference(&want))),
        Err(e) => Err(format!("decode failed: {e}")),
    };
    case.directed = Some(directed);
    case.converted = Some(converted);
    case
}

pub fn interpretation_round_trip(cases: &[InterpretationCase]) -> Check {
    let mut t = Tally::new("c02-interpretation-round-trip");
    let mut escalations = 0;
    for case in cases {
        escalations += case.escalations.len();
        t.case(case.round_trip.is_ok(), || format!("{}: {}", case.description, case.round_trip.clone().unwrap_err()));
    }
    t.check.metric("escalation_events", escalations);
    t.finish()
}

/// Undirected lacons for the conversion criteria: the interpretation run's
/// outputs with non-dominant hidden vertices removed, then random lacons.
pub fn conversion_corpus(config: &RunConfig, cases: &[InterpretationCase]) -> Vec<(String, Lacon)> {
    let mut out: Vec<(String, Lacon)> = cases
        .iter()
        .filter_map(|c| c.converted.as_ref().map(|conv| (c.description.clone(), conv.lacon.pruned())))
        .collect();
    for i in 0..config.caps.random_lacons {
        let mut rng = rng_for(config.seed, 3, i as u64);
        let targets = rng.gen_range(1..=6);
        let hidden = rng.gen_range(1..=5);
        out.push((format!("random lacon {i}"), random_lacon(&mut rng, targets, hidden)));
    }
    out
}

/// Outcome of converting one lacon to a shrub and a parity decomposition.
#[derive(Debug, Clone)]
pub struct ConversionOutcome {
    pub description: String,
    pub shrub_round_trip: Result<(), String>,
    pub parity_round_trip: Result<(), String>,
    pub shrub_report: Option<Report>,
    pub parity_report: Option<Report>,
}

pub fn conversion_outcomes(corpus: &[(String, Lacon)]) -> Vec<ConversionOutcome> {
    corpus
        .par_iter()
        .map(|(description, l)| {
            let want = l.decode().map_err(|e| e.to_string());
            let mut out = ConversionOutcome {
                description: description.clone(),
                shrub_round_trip: Ok(()),
                parity_round_trip: Ok(()),
                shrub_report: None,
                parity_report: None,
            };
            let want = match want {
                Ok(w) => w,
                Err(e) => {
                    out.shrub_round_trip = Err(e.clone());
                    out.parity_round_trip = Err(e);
                    return out;
                }
            };
            match lacon_to_shrub(l) {
                Ok(s) => {
                    out.shrub_round_trip = match s.decode() {
                        Ok(g) if g.same_structure(&want) => Ok(()),
                        Ok(g) => Err(format!("shrub decode differs: {:?}", g.structural_difference(&want))),
                        Err(e) => Err(e.to_string()),
                    };
                    out.shrub_report = Some(check_lemma7_bounds(l, &s, 2));
                }
                Err(e) => out.shrub_round_trip = Err(e.to_string()),
            }
            match lacon_to_parity(l) {
                Ok(p) => {
                    out.parity_round_trip = match p.parity.decode() {
                        Ok(g) if g.same_structure(&want) => Ok(()),
                        Ok(g) => Err(format!("parity decode differs: {:?}", g.structural_difference(&want))),
                        Err(e) => Err(e.to_string()),
                    };
                    out.parity_report = Some(check_lemma8_bounds(l, &p, 4));
                }
                Err(e) => out.parity_round_trip = Err(e.to_string()),
            }
            out
        })
        .collect()
}

pub fn conversion_round_trips(outcomes: &[ConversionOutcome]) -> Check {
    let mut t = Tally::new("c03-conversion-round-trips");
    for o in outcomes {
        t.case(o.shrub_round_trip.is_ok(), || format!("{}: {}", o.description, o.shrub_round_trip.clone().unwrap_err()));
        t.case(o.parity_round_trip.is_ok(), || format!("{}: {}", o.description, o.parity_round_trip.clone().unwrap_err()));
    }
    t.finish()
}

fn float_metric(report: &Report, check: &str, key: &str) -> f64 {
    report
        .check(check)
        .and_then(|c| c.metrics.iter().find(|m| m.0 == key))
        .map(|m| match m.1 {
            lacon_core::report::Metric::Float(v) => v,
            lacon_core::report::Metric::Int(v) => v as f64,
            lacon_core::report::Metric::Text(_) => 0.0,
        })
        .unwrap_or(0.0)
}

pub fn directed_conversion_bounds(cases: &[InterpretationCase]) -> Check {
    let mut t = Tally::new("c04-directed-conversion-bound");
    let outcomes: Vec<(String, Option<Report>)> = cases
        .par_iter()
        .map(|c| {
            let report = match (&c.directed, &c.converted) {
                (Some(d), Some(conv)) => Some(check_lemma5_bounds(d, conv, 4)),
                _ => None,
            };
            (c.description.clone(), report)
        })
        .collect();
    let (mut strong, mut weak) = (0.0f64, 0.0f64);
    for (description, report) in outcomes {
        match report {
            Some(r) => {
                strong = strong.max(float_metric(&r, "strong-coloring-bound", "max_ratio"));
                weak = weak.max(float_metric(&r, "weak-coloring-bound", "max_ratio"));
                t.case(r.passed(), || format!("{description}: {:?}", r.failures()));
            }
            None => t.case(false, || format!("{description}: no directed lacon")),
        }
    }
    t.check.metric("max_strong_ratio", strong);
    t.check.metric("max_weak_ratio", weak);
    t.finish()
}

pub fn parity_bounds(outcomes: &[ConversionOutcome]) -> Check {
    let mut t = Tally::new("c05-parity-bounds");
    let (mut strong, mut weak) = (0.0f64, 0.0f64);
    for o in outcomes {
        match &o.parity_report {
            Some(r) => {
                strong = strong.max(float_metric(r, "strong-coloring-bound", "max_ratio"));
                weak = weak.max(float_metric(r, "weak-coloring-bound", "max_ratio"));
                t.case(r.passed(), || format!("{}: {:?}", o.description, r.failures()));
            }
            None => t.case(false, || format!("{}: no parity decomposition", o.description)),
        }
    }
    t.check.metric("max_strong_ratio", strong);
    t.check.metric("max_weak_ratio", weak);
    t.finish()
}

pub fn shrub_bounds(outcomes: &[ConversionOutcome]) -> Check {
    let mut t = Tally::new("c06-shrub-bounds");
    let (mut worst, mut within_figure, mut host_over) = (0.0f64, 0usize, 0usize);
    for o in outcomes {
        match &o.shrub_report {
            Some(r) => {
                let leaf = float_metric(r, "diameter-bound", "leaf_diameter");
                let bound = float_metric(r, "diameter-bound", "bound");
                let figure = float_metric(r, "diameter-bound", "tight_figure");
                let host = float_metric(r, "diameter-bound", "host_diameter");
                if bound > 0.0 {
                    worst = worst.max(leaf / bound);
                }
                within_figure += usize::from(leaf <= figure);
                host_over += usize::from(host > bound);
                t.case(r.passed(), || format!("{}: {:?}", o.description, r.failures()));
            }
            None => t.case(false, || format!("{}: no shrub decomposition", o.description)),
        }
    }
    t.check.metric("max_leaf_diameter_over_bound", worst);
    t.check.metric("within_4col1_plus_4", within_figure);
    t.check.metric("host_diameter_over_bound", host_over);
    t.finish()
}

pub fn coloring_limits(config: &RunConfig) -> Check {
    let mut t = Tally::new("c07-coloring-limits");
    let graphs: Vec<LabeledGraph> = (1..=config.caps.graph_size).flat_map(|n| graphs_up_to_iso(n, true)).collect();
    let cap = config.caps.exhaustive_order.max(config.caps.graph_size);
    let results: Vec<Result<(usize, usize, usize, usize), String>> = graphs
        .par_iter()
        .map(|g| {
            let col = optimal_order(g, Radius::Infinite, ReachMode::Strong, Strategy::Exhaustive, cap).map_err(|e| e.to_string())?.1;
            let wcol = optimal_order(g, Radius::Infinite, ReachMode::Weak, Strategy::Exhaustive, cap).map_err(|e| e.to_string())?.1;
            let tw = treewidth(g, cap).map_err(|e| e.to_string())?;
            let td = treedepth(g, cap).map_err(|e| e.to_string())?;
            Ok((col, wcol, tw, td))
        })
        .collect();
    for (g, r) in graphs.iter().zip(results) {
        let edges = || format!("{:?}", g.named_edges());
        match r {
            Ok((col, wcol, tw, td)) => {
                t.case(col == tw + 1, || format!("{}: col_inf {col} != tw {tw} + 1", edges()));
                t.case(wcol == td, || format!("{}: wcol_inf {wcol} != td {td}", edges()));
            }
            Err(e) => t.case(false, || format!("{}: {e}", edges())),
        }
    }
    t.check.metric("graphs", graphs.len());
    t.finish()
}

/// Sampled reachability facts on random instances, plus the weak-versus-
/// strong power bound on every interpretation instance.
pub fn colfacts(config: &RunConfig, instances: &[(String, LabeledGraph, LinearOrder)]) -> Check {
    let mut t = Tally::new("c08-reachability-facts");
    const PER_GRAPH: usize = 10;
    let graphs = config.caps.colfacts.div_ceil(PER_GRAPH);
    let reports: Vec<(String, Result<Report, String>)> = (0..graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(config.seed, 8, i as u64);
            let n = rng.gen_range(2..=8);
            let density = rng.gen_range(0.2..0.7);
            let g = random_graph(&mut rng, n, density);
            let order = random_order(&mut rng, &g);
            let r = rng.gen_range(1..=3);
            let sampling = Sampling::Random { samples: PER_GRAPH, seed: rng.gen() };
            let desc = format!("edges {:?} order {:?} r={r}", g.named_edges(), order.sequence());
            (desc, check_colfacts(&g, &order, r, sampling).map_err(|e| e.to_string()))
        })
        .collect();
    let (mut checked, mut vacuous) = (0i64, 0i64);
    for (desc, report) in reports {
        match report {
            Ok(r) => {
                for c in &r.checks {
                    for (key, value) in &c.metrics {
                        match (key.as_str(), value) {
                            ("vacuous", lacon_core::report::Metric::Int(v)) => vacuous += v,
                            ("checked", lacon_core::report::Metric::Int(v)) => checked += v,
                            _ => {}
                        }
                    }
                }
                t.case(r.passed(), || format!("{desc}: {:?}", r.failures()));
            }
            Err(e) => t.case(false, || format!("{desc}: {e}")),
        }
    }
    let mut power = 0usize;
    for (id, g, order) in instances {
        let og = OrderedGraph::from_graph(g, order).expect("instance orders cover their graphs");
        for r in 1..=3 {
            let col = og.coloring_number(r, ReachMode::Strong) as u128;
            let wcol = og.coloring_number(r, ReachMode::Weak) as u128;
            power += 1;
            t.case(wcol <= col.saturating_pow(r as u32), || format!("{id}: wcol_{r} {wcol} > col_{r}^{r} = {col}^{r}"));
        }
    }
    t.check.metric("sampled_instances", graphs * PER_GRAPH);
    t.check.metric("checked_items", checked);
    t.check.metric("vacuous_items", vacuous);
    t.check.metric("power_bound_instances", power);
    t.finish()
}

/// Formulas for the separated-expression run, over blocks `y1`, `y2` and
/// the optional separator variable `u`.
pub fn separation_formulas() -> Vec<(&'static str, Formula)> {
    [
        ("edge", "(edge y1 y2)"),
        ("non-edge", "(not (edge y1 y2))"),
        ("two-step", "(exists z (and (edge y1 z) (edge z y2)))"),
        ("within-two", "(or (edge y1 y2) (exists z (and (edge y1 z) (edge z y2))))"),
        ("labeled-edge", "(and (label L y1) (edge y1 y2))"),
        ("labeled-middle", "(exists z (and (label L z) (and (edge y1 z) (edge z y2))))"),
        ("through-separator", "(and (edge y1 u) (edge u y2))"),
        ("near-separator", "(exists z (and (edge y1 z) (edge z u)))"),
    ]
    .into_iter()
    .map(|(name, text)| (name, parse_formula(text).expect("suite formulas parse")))
    .collect()
}

pub fn separated_expressions(config: &RunConfig) -> Check {
    let mut t = Tally::new("c09-separated-expressions");
    let max_n = config.caps.graph_size.min(5);
    let mut graphs = Vec::new();
    for n in 1..=max_n {
        for g in graphs_up_to_iso(n, false) {
            let mut labeled = g.clone();
            labeled.add_label("L", 0);
            graphs.push(g);
            graphs.push(labeled);
        }
    }
    let mut jobs = Vec::new();
    for (name, f) in separation_formulas() {
        for separator in [0usize, 1] {
            if separator == 0 && f.has_free("u") {
                continue;
            }
            jobs.push((name, f.clone(), separator));
        }
    }
    let results: Vec<(String, Result<(usize, Vec<String>), String>)> = jobs
        .par_iter()
        .map(|(name, f, separator)| {
            let sep: Vec<String> = if *separator == 1 { vec!["u".into()] } else { Vec::new() };
            let spec = BlockSpec::new(sep.clone(), vec![vec!["y1".into()], vec!["y2".into()]]);
            let label = format!("{name} with {separator} separator variable(s)");
            let e = match separated_expression(f, &spec, 2) {
                Ok(e) => e,
                Err(err) => return (label, Err(err.to_string())),
            };
            let mut failures = e.separation_violations();
            let radius = 4usize.pow(f.quantifier_rank() as u32);
            let compiled = e.compile();
            let direct = Program::compile(f);
            let mut checked = 0;
            for g in &graphs {
                let n = g.vertex_count();
                let adj = g.gaifman_adjacency();
                let bound = compiled.on(g);
                let plain = direct.on(g);
                let seps: Vec<Vec<usize>> = if *separator == 1 { (0..n).map(|u| vec![u]).collect() } else { vec![Vec::new()] };
                for s in &seps {
                    for a in 0..n {
                        for b in 0..n {
                            if !r_separates(&adj, s, &[vec![a], vec![b]], radius) {
                                continue;
                            }
                            let mut assignment = vec![("y1", a), ("y2", b)];
                            if let Some(&u) = s.first() {
                                assignment.push(("u", u));
                            }
                            checked += 1;
                            let want = plain.eval(&assignment).expect("assignment covers the formula");
                            let got = bound.eval(&assignment).expect("assignment covers the expression");
                            if want != got {
                                failures.push(format!("edges {:?} assignment {assignment:?}: formula {want}, expression {got}", g.named_edges()));
                            }
                        }
                    }
                }
            }
            (label, Ok((checked, failures)))
        })
        .collect();
    let mut instantiations = 0;
    for (label, r) in results {
        match r {
            Ok((checked, failures)) => {
                instantiations += checked;
                t.case(failures.is_empty(), || format!("{label}: {}", failures.join("; ")));
            }
            Err(e) => t.case(false, || format!("{label}: {e}")),
        }
    }
    t.check.metric("instantiations", instantiations);
    t.finish()
}

pub fn determination(config: &RunConfig) -> Check {
    let mut t = Tally::new("c10-determination");
    let joint = config.caps.type_rank.min(1);
    let block = config.caps.type_rank.min(2);
    let max_n = config.caps.graph_size.min(5);
    let graphs: Vec<LabeledGraph> = (1..=max_n).flat_map(|n| graphs_up_to_iso(n, false)).collect();
    let instances = graphs.iter().flat_map(|g| all_instances(g.vertex_count(), 1, 2, 1).into_iter().map(move |i| (g, i)));
    match check_determination(joint, block, instances) {
        Ok(report) => {
            for c in &report.checks {
                t.case(c.passed, || c.witnesses.join("; "));
                for (k, v) in &c.metrics {
                    t.check.metric(k, v.clone());
                }
            }
        }
        Err(e) => t.case(false, || e.to_string()),
    }
    t.check.metric("joint_rank", joint as usize);
    t.check.metric("block_rank", block as usize);
    t.finish()
}

/// Transductions for the pipeline run, with at most two copies and one
/// parameter.
pub fn pipeline_transductions() -> Vec<Transduction> {
    let f = |s: &str| parse_formula(s).expect("suite formulas parse");
    vec![
        Transduction::identity(),
        Transduction::new(0, 1, Formula::True, Formula::True, f("(not (edge x y))")).unwrap(),
        Transduction::new(1, 1, Formula::True, f("(not (label P1 x))"), f("(exists z (and (edge x z) (edge z y)))")).unwrap(),
        Transduction::new(1, 2, Formula::True, f("(or (label Q1 x) (label P1 x))"), f("(or (edge x y) (and (sim x y) (label P1 x)))")).unwrap(),
        Transduction::new(0, 2, Formula::True, Formula::True, f("(or (and (label Q1 x) (edge x y)) (and (label Q2 y) (sim x y)))")).unwrap(),
        Transduction::new(1, 2, f("(exists x (label P1 x))"), Formula::True, f("(and (label P1 x) (not (sim x y)))")).unwrap(),
    ]
}

pub fn pipeline_cases(config: &RunConfig) -> Check {
    let mut t = Tally::new("c11-pipeline");
    let suite = pipeline_transductions();
    let results: Vec<(String, Result<Report, String>)> = (0..config.caps.pipeline_cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(config.seed, 11, i as u64);
            let n = rng.gen_range(1..=5);
            let g = random_graph(&mut rng, n, 0.45);
            let order = random_order(&mut rng, &g);
            let td = &suite[i % suite.len()];
            let mut choice = ExpansionChoice::empty(td.params);
            for set in &mut choice.sets {
                for v in g.names() {
                    if rng.gen_bool(0.4) {
                        set.insert(v.clone());
                    }
                }
                if set.is_empty() {
                    set.insert(g.name(0).to_string());
                }
            }
            let desc = format!("case {i}: edges {:?} order {:?} transduction {}", g.named_edges(), order.sequence(), i % suite.len());
            let run = || -> Result<Report, String> {
                if apply_transduction(td, &g, &choice).map_err(|e| e.to_string())?.is_none() {
                    return Ok(Report::new());
                }
                let out = theorem4_pipeline(td, &g, &order, &choice, BuildOptions::default()).map_err(|e| e.to_string())?;
                check_pipeline(td, &g, &order, &choice, &out, 3).map_err(|e| e.to_string())
            };
            (desc, run())
        })
        .collect();
    let mut worst = 0.0f64;
    let mut undefined = 0usize;
    for (desc, r) in results {
        match r {
            Ok(report) => {
                if report.checks.is_empty() {
                    undefined += 1;
                }
                worst = worst.max(float_metric(&report, "copy-strong-coloring-bound", "max_ratio"));
                worst = worst.max(float_metric(&report, "copy-weak-coloring-bound", "max_ratio"));
                t.case(report.passed(), || format!("{desc}: {:?}", report.failures()));
            }
            Err(e) => t.case(false, || format!("{desc}: {e}")),
        }
    }
    t.check.metric("undefined_cases", undefined);
    t.check.metric("max_copy_ratio", worst);
    t.finish()
}

/// Runs criteria 1 to 11 and returns one check per criterion plus the
/// logged type-rank escalation events.
pub fn run_corpus(config: &RunConfig) -> (Report, Vec<String>) {
    let mut report = Report::new();
    report.push(golden_decompositions());
    let cases = interpretation_cases(config);
    report.push(interpretation_round_trip(&cases));
    let corpus = conversion_corpus(config, &cases);
    let outcomes = conversion_outcomes(&corpus);
    report.push(conversion_round_trips(&outcomes));
    report.push(directed_conversion_bounds(&cases));
    report.push(parity_bounds(&outcomes));
    report.push(shrub_bounds(&outcomes));
    report.push(coloring_limits(config));
    let instances = interpretation_instances(config);
    report.push(colfacts(config, &instances));
    report.push(separated_expressions(config));
    report.push(determination(config));
    report.push(pipeline_cases(config));
    let events = cases.iter().flat_map(|c| c.escalations.iter().cloned()).collect();
    (report, events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isomorphism_class_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| graphs_up_to_iso(n, true).len()).collect();
        assert_eq!(counts, [1, 1, 2, 6, 21]);
        let all: Vec<usize> = (1..=5).map(|n| graphs_up_to_iso(n, false).len()).collect();
        assert_eq!(all, [1, 2, 4, 11, 34]);
    }

    #[test]
    fn caps_parse() {
        let caps = Caps::parse("type-rank=0, orders=2").unwrap();
        assert_eq!((caps.type_rank, caps.orders, caps.graph_size), (0, 2, 6));
        assert_eq!(Caps::parse("orders=0"), Err(CapsError::Value("orders".into())));
        assert_eq!(Caps::parse("speed=3"), Err(CapsError::Unknown("speed".into())));
        assert_eq!(Caps::parse("orders"), Err(CapsError::Malformed("orders".into())));
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_lacon(&mut rng_for(1, 3, 7), 5, 4);
        let b = random_lacon(&mut rng_for(1, 3, 7), 5, 4);
        assert_eq!(a, b);
        assert!(a.verify(None).passed());
        let c = random_lacon(&mut rng_for(1, 3, 8), 5, 4);
        assert_ne!(a, c);
    }

    #[test]
    fn witness_pairs() {
        assert_eq!(witness_pair("{b,a}: dominant h labeled 1"), Some(("a".into(), "b".into())));
        assert_eq!(witness_pair("c-d"), Some(("c".into(), "d".into())));
        assert_eq!(witness_pair("nothing"), None);
    }

    #[test]
    fn golden_files_pass() {
        let check = golden_decompositions();
        assert!(check.passed, "{:?}", check.witnesses);
    }
}
