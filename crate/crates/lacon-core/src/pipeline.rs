//! Transductions and the chain from a transduced graph to an undirected
//! lacon-decomposition.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::coloring::{OrderedGraph, ReachMode};
use crate::graph::{GraphError, LabeledGraph, LinearOrder};
use crate::lacon::{build_directed_lacon, directed_to_undirected, BuildOptions, BuiltLacon, Converted, Lacon, LaconError};
use crate::logic::eval::{binary_vars, holds, interpret_on, unary_var};
use crate::logic::{EvalError, Formula, Program};
use crate::report::{Check, Report};

/// Largest `|V| * p` for which every expansion choice is enumerated.
pub const ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("copy count must be at least 1")]
    ZeroCopies,
    #[error("{what} must have {expected} free variables, found {found:?}")]
    FormulaArity { what: &'static str, expected: usize, found: Vec<String> },
    #[error("choice has {found} sets but the transduction expects {expected}")]
    ChoiceArity { expected: usize, found: usize },
    #[error("choice names unknown vertex `{0}`")]
    UnknownChoiceVertex(String),
    #[error("label `{0}` is reserved for the transduction but already used")]
    LabelInUse(String),
    #[error("the guard sentence fails, so the transduction is undefined")]
    Undefined,
    #[error("enumerating {vertices} vertices with {params} parameters exceeds the limit {ENUMERATION_LIMIT}")]
    EnumerationTooLarge { vertices: usize, params: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lacon(#[from] LaconError),
}

/// Guard sentence, domain formula and edge formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicTransduction {
    pub chi: Formula,
    pub nu: Formula,
    pub phi: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transduction {
    pub params: usize,
    pub copies: usize,
    pub basic: BasicTransduction,
}

impl Transduction {
    pub fn new(params: usize, copies: usize, chi: Formula, nu: Formula, phi: Formula) -> Result<Self, PipelineError> {
        if copies == 0 {
            return Err(PipelineError::ZeroCopies);
        }
        let free = chi.free_vars();
        if !free.is_empty() {
            return Err(PipelineError::FormulaArity { what: "chi", expected: 0, found: free.into_iter().collect() });
        }
        unary_var(&nu).map_err(|e| arity("nu", e))?;
        binary_vars(&phi).map_err(|e| arity("phi", e))?;
        Ok(Transduction { params, copies, basic: BasicTransduction { chi, nu, phi } })
    }

    /// One copy, no parameters, every vertex kept, edges unchanged.
    pub fn identity() -> Self {
        Transduction::new(0, 1, Formula::True, Formula::True, Formula::edge("x", "y")).expect("identity is well formed")
    }
}

fn arity(what: &'static str, e: EvalError) -> PipelineError {
    match e {
        EvalError::Arity { expected, found } => PipelineError::FormulaArity { what, expected, found },
        other => PipelineError::Eval(other),
    }
}

/// Vertex sets for the parameter labels `P1..Pp`. A copied name `v@i` marks
/// that copy; an original name `v` marks all its copies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExpansionChoice {
    pub sets: Vec<BTreeSet<String>>,
}

impl ExpansionChoice {
    pub fn empty(params: usize) -> Self {
        ExpansionChoice { sets: vec![BTreeSet::new(); params] }
    }
}

pub fn param_label(i: usize) -> String {
    format!("P{i}")
}

pub fn copy_label(i: usize) -> String {
    format!("Q{i}")
}

pub fn copy_name(v: &str, i: usize) -> String {
    format!("{v}@{i}")
}

/// `m` disjoint copies of `g` named `v@i`, with copies of the same vertex
/// related by the auxiliary relation, copy `i` labeled `Qi`, and the
/// original labels carried over.
pub fn m_copy(g: &LabeledGraph, m: usize) -> LabeledGraph {
    let n = g.vertex_count();
    let names: Vec<String> = (1..=m).flat_map(|i| g.names().iter().map(move |v| copy_name(v, i))).collect();
    let mut out = LabeledGraph::with_vertices(&names).expect("copied names are valid and distinct");
    for i in 0..m {
        let base = i * n;
        for (a, b) in g.edges() {
            out.add_edge(base + a, base + b).expect("copies of an edge are distinct");
        }
        for (label, members) in g.labels() {
            for &v in members {
                out.add_label(label, base + v);
            }
        }
        for v in 0..n {
            out.add_label(&copy_label(i + 1), base + v);
        }
    }
    for v in 0..n {
        for i in 0..m {
            for j in i + 1..m {
                out.add_sim(i * n + v, j * n + v).expect("copies are distinct");
            }
        }
    }
    out
}

/// The colored m-copy the basic transduction runs on.
pub fn expand(t: &Transduction, g: &LabeledGraph, choice: &ExpansionChoice) -> Result<LabeledGraph, PipelineError> {
    if choice.sets.len() != t.params {
        return Err(PipelineError::ChoiceArity { expected: t.params, found: choice.sets.len() });
    }
    let reserved = (1..=t.params).map(param_label).chain((1..=t.copies).map(copy_label));
    for label in reserved {
        if g.label_members(&label).is_some_and(|m| !m.is_empty()) {
            return Err(PipelineError::LabelInUse(label));
        }
    }
    let mut out = m_copy(g, t.copies);
    for (p, set) in choice.sets.iter().enumerate() {
        let label = param_label(p + 1);
        for name in set {
            if let Some(v) = out.vertex(name) {
                out.add_label(&label, v);
            } else if g.vertex(name).is_some() {
                for i in 1..=t.copies {
                    let v = out.require(&copy_name(name, i))?;
                    out.add_label(&label, v);
                }
            } else {
                return Err(PipelineError::UnknownChoiceVertex(name.clone()));
            }
        }
    }
    Ok(out)
}

/// Output of the transduction for one choice; `None` when the guard fails.
pub fn apply_transduction(
    t: &Transduction,
    g: &LabeledGraph,
    choice: &ExpansionChoice,
) -> Result<Option<LabeledGraph>, PipelineError> {
    let expanded = expand(t, g, choice)?;
    if !holds(&expanded, &t.basic.chi)? {
        return Ok(None);
    }
    let keep = domain(&expanded, &t.basic.nu)?;
    let (x, y) = binary_vars(&t.basic.phi)?;
    Ok(Some(interpret_on(&expanded, &t.basic.phi, &x, &y, |v| keep[v])?))
}

/// Which vertices satisfy the unary formula `nu`.
pub fn domain(g: &LabeledGraph, nu: &Formula) -> Result<Vec<bool>, PipelineError> {
    let x = unary_var(nu)?;
    let program = Program::compile(nu);
    let bound = program.on(g);
    let slot = program.slot(&x);
    let mut env = vec![0usize; program.slot_count()];
    Ok((0..g.vertex_count())
        .map(|v| {
            if let Some(s) = slot {
                env[s] = v;
            }
            bound.eval_env(&mut env)
        })
        .collect())
}

/// Every choice of `p` subsets of the original vertices.
pub fn all_choices(g: &LabeledGraph, params: usize) -> Result<Vec<ExpansionChoice>, PipelineError> {
    let n = g.vertex_count();
    let bits = n * params;
    if bits > ENUMERATION_LIMIT {
        return Err(PipelineError::EnumerationTooLarge { vertices: n, params });
    }
    Ok((0u32..1 << bits)
        .map(|mask| ExpansionChoice {
            sets: (0..params)
                .map(|p| (0..n).filter(|&v| mask >> (p * n + v) & 1 == 1).map(|v| g.name(v).to_string()).collect())
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduced {
    pub graph: LabeledGraph,
    /// Copies placed next to their original: `v@i` has rank `m * rank(v) + i - 1`.
    pub order: LinearOrder,
    pub basic: BasicTransduction,
}

/// Reduces a transduction to its basic part on the colored m-copy.
pub fn reduce_to_basic(
    t: &Transduction,
    g: &LabeledGraph,
    order: &LinearOrder,
    choice: &ExpansionChoice,
) -> Result<Reduced, PipelineError> {
    order.rank_vector(g)?;
    let graph = expand(t, g, choice)?;
    let seq: Vec<String> = order
        .sequence()
        .iter()
        .flat_map(|v| (1..=t.copies).map(move |i| copy_name(v, i)))
        .collect();
    Ok(Reduced { graph, order: LinearOrder::from_sequence(&seq)?, basic: t.basic.clone() })
}

/// Checks `col_r` and `wcol_r` of the copy against `m` times those of the
/// original for radii `1..=r_max`.
pub fn check_copy_bounds(
    g: &LabeledGraph,
    order: &LinearOrder,
    copies: usize,
    reduced: &Reduced,
    r_max: usize,
) -> Result<Report, PipelineError> {
    let before = OrderedGraph::from_graph(g, order)?;
    let after = OrderedGraph::from_graph(&reduced.graph, &reduced.order)?;
    let mut report = Report::new();
    for (mode, name) in [(ReachMode::Strong, "copy-strong-coloring-bound"), (ReachMode::Weak, "copy-weak-coloring-bound")] {
        let mut check = Check::new(name);
        let mut worst = 0.0f64;
        for r in 1..=r_max {
            let (b, a) = (before.coloring_number(r, mode), after.coloring_number(r, mode));
            if b > 0 {
                worst = worst.max(a as f64 / b as f64);
            }
            if a > copies * b {
                check.fail(format!("r={r}: {a} > {copies} * {b}"));
            }
        }
        check.metric("copies", copies);
        check.metric("max_ratio", worst);
        report.push(check);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineOutput {
    pub reduced: Reduced,
    pub built: BuiltLacon,
    /// Directed lacon after dropping targets outside the domain and hidden
    /// vertices that dominate no pair.
    pub directed: Lacon,
    pub converted: Converted,
}

impl PipelineOutput {
    pub fn lacon(&self) -> &Lacon {
        &self.converted.lacon
    }
}

/// Builds a directed lacon-decomposition of the edge formula on the colored
/// m-copy, drops the targets failing the domain formula and the hidden
/// vertices left without a pair to dominate, and converts the result to an
/// undirected lacon-decomposition.
pub fn theorem4_pipeline(
    t: &Transduction,
    g: &LabeledGraph,
    order: &LinearOrder,
    choice: &ExpansionChoice,
    options: BuildOptions,
) -> Result<PipelineOutput, PipelineError> {
    let reduced = reduce_to_basic(t, g, order, choice)?;
    if !holds(&reduced.graph, &reduced.basic.chi)? {
        return Err(PipelineError::Undefined);
    }
    let built = build_directed_lacon(&reduced.graph, &reduced.order, &reduced.basic.phi, options)?;
    let keep = domain(&reduced.graph, &reduced.basic.nu)?;
    let mut directed = built.lacon.clone();
    for v in (0..reduced.graph.vertex_count()).filter(|&v| !keep[v]) {
        directed = directed.without_target(reduced.graph.name(v))?;
    }
    let directed = directed.pruned();
    let converted = directed_to_undirected(&directed)?;
    Ok(PipelineOutput { reduced, built, directed, converted })
}

/// Checks a pipeline run: decoding matches the transduction, the trimmed
/// directed lacon still verifies, and the copy coloring bounds hold. Also
/// reports `col_r(L) / col_{c r}(G)` with `c = 4^q * m`.
pub fn check_pipeline(
    t: &Transduction,
    g: &LabeledGraph,
    order: &LinearOrder,
    choice: &ExpansionChoice,
    output: &PipelineOutput,
    r_max: usize,
) -> Result<Report, PipelineError> {
    let mut report = Report::new();
    let expected = apply_transduction(t, g, choice)?.ok_or(PipelineError::Undefined)?;

    let mut decode = Check::new("decode-matches-transduction");
    match output.lacon().decode() {
        Ok(got) => {
            for w in got.structural_difference(&expected) {
                decode.fail(w);
            }
        }
        Err(e) => decode.fail(e.to_string()),
    }
    report.push(decode);

    let mut stage = Check::new("trimmed-lacon-verifies");
    for w in output.directed.verify(Some(&expected)).failures() {
        stage.fail(w);
    }
    report.push(stage);

    for check in check_copy_bounds(g, order, t.copies, &output.reduced, r_max)?.checks {
        report.push(check);
    }

    let mut ratio = Check::new("coloring-ratio");
    let source = OrderedGraph::from_graph(g, order)?;
    let lacon = output.lacon().ordered_graph();
    let q = t.basic.phi.quantifier_rank() as u32;
    let c = 4usize.saturating_pow(q).saturating_mul(t.copies);
    let mut worst = 0.0f64;
    for r in 1..=r_max {
        let radius = c.saturating_mul(r).min(g.vertex_count().max(1));
        let b = source.coloring_number(radius, ReachMode::Strong);
        let a = lacon.coloring_number(r, ReachMode::Strong);
        if b > 0 {
            worst = worst.max(a as f64 / b as f64);
        }
    }
    ratio.metric("c", c);
    ratio.metric("max_ratio", worst);
    report.push(ratio);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lacon::tests::golden_graph;
    use crate::logic::{eval, interpret, parse_formula};
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> LabeledGraph {
        let names: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
        let mut g = LabeledGraph::with_vertices(&names).unwrap();
        for &(a, b) in edges {
            g.add_edge(a, b).unwrap();
        }
        g
    }

    fn transduction(params: usize, copies: usize, chi: &str, nu: &str, phi: &str) -> Transduction {
        let f = |s: &str| parse_formula(s).unwrap();
        Transduction::new(params, copies, f(chi), f(nu), f(phi)).unwrap()
    }

    fn names(g: &LabeledGraph) -> Vec<&str> {
        g.names().iter().map(String::as_str).collect()
    }

    #[test]
    fn m_copy_of_k2() {
        let c = m_copy(&graph(2, &[(0, 1)]), 2);
        assert_eq!(names(&c), ["a@1", "b@1", "a@2", "b@2"]);
        assert_eq!(c.edge_count(), 2);
        let sims: Vec<_> = c.sim_pairs().map(|(a, b)| (c.name(a).to_string(), c.name(b).to_string())).collect();
        assert_eq!(sims, [("a@1".into(), "a@2".into()), ("b@1".into(), "b@2".into())]);
        let q1: Vec<_> = c.label_members("Q1").unwrap().iter().map(|&v| c.name(v)).collect();
        assert_eq!(q1, ["a@1", "b@1"]);
        let q2: Vec<_> = c.label_members("Q2").unwrap().iter().map(|&v| c.name(v)).collect();
        assert_eq!(q2, ["a@2", "b@2"]);
    }

    #[test]
    fn single_copy_is_decorated_graph() {
        let g = golden_graph();
        let c = m_copy(&g, 1);
        assert_eq!(c.edge_count(), 6);
        assert_eq!(c.sim_pairs().count(), 0);
        assert_eq!(c.label_members("Q1").unwrap().len(), 5);
    }

    #[test]
    fn complement_of_k3_is_empty() {
        let t = transduction(0, 1, "true", "true", "(not (edge x y))");
        let out = apply_transduction(&t, &graph(3, &[(0, 1), (1, 2), (0, 2)]), &ExpansionChoice::empty(0)).unwrap().unwrap();
        assert_eq!(out.vertex_count(), 3);
        assert_eq!(out.edge_count(), 0);
    }

    #[test]
    fn failing_guard_is_undefined() {
        let t = transduction(0, 1, "(exists x (exists y (edge x y)))", "true", "(edge x y)");
        let g = graph(3, &[]);
        assert_eq!(apply_transduction(&t, &g, &ExpansionChoice::empty(0)).unwrap(), None);
        let err = theorem4_pipeline(&t, &g, &LinearOrder::identity(&g), &ExpansionChoice::empty(0), BuildOptions::default());
        assert_eq!(err.unwrap_err(), PipelineError::Undefined);
    }

    #[test]
    fn parameter_restricts_domain() {
        let t = transduction(1, 1, "true", "(label P1 x)", "(edge x y)");
        let choice = ExpansionChoice { sets: vec![["a".to_string()].into()] };
        let out = apply_transduction(&t, &graph(3, &[(0, 1)]), &choice).unwrap().unwrap();
        assert_eq!(names(&out), ["a@1"]);
        assert_eq!(
            apply_transduction(&t, &graph(3, &[]), &ExpansionChoice::empty(2)),
            Err(PipelineError::ChoiceArity { expected: 1, found: 2 })
        );
        let bad = ExpansionChoice { sets: vec![["z".to_string()].into()] };
        assert_eq!(apply_transduction(&t, &graph(3, &[]), &bad), Err(PipelineError::UnknownChoiceVertex("z".into())));
    }

    #[test]
    fn malformed_transductions_are_rejected() {
        let f = |s: &str| parse_formula(s).unwrap();
        assert_eq!(Transduction::new(0, 0, Formula::True, Formula::True, f("(edge x y)")), Err(PipelineError::ZeroCopies));
        assert!(matches!(
            Transduction::new(0, 1, f("(edge x y)"), Formula::True, f("(edge x y)")),
            Err(PipelineError::FormulaArity { what: "chi", .. })
        ));
        assert!(matches!(
            Transduction::new(0, 1, Formula::True, f("(edge x y)"), f("(edge x y)")),
            Err(PipelineError::FormulaArity { what: "nu", .. })
        ));
    }

    #[test]
    fn reserved_labels_are_rejected() {
        let mut g = graph(2, &[(0, 1)]);
        g.add_label("Q1", 0);
        let t = Transduction::identity();
        assert_eq!(apply_transduction(&t, &g, &ExpansionChoice::empty(0)), Err(PipelineError::LabelInUse("Q1".into())));
    }

    #[test]
    fn reduction_interleaves_copies() {
        let g = graph(2, &[(0, 1)]);
        let order = LinearOrder::identity(&g);
        let t = transduction(0, 2, "true", "true", "(edge x y)");
        let r = reduce_to_basic(&t, &g, &order, &ExpansionChoice::empty(0)).unwrap();
        assert_eq!(r.order.sequence(), ["a@1", "a@2", "b@1", "b@2"]);
        assert!(check_copy_bounds(&g, &order, 2, &r, 4).unwrap().passed());
        let single = reduce_to_basic(&Transduction::identity(), &g, &order, &ExpansionChoice::empty(0)).unwrap();
        assert_eq!(single.order.sequence(), ["a@1", "b@1"]);
    }

    #[test]
    fn sim_matches_origin_equality() {
        let g = golden_graph();
        let c = m_copy(&g, 3);
        let f = parse_formula("(sim x y)").unwrap();
        for a in 0..c.vertex_count() {
            for b in 0..c.vertex_count() {
                let same = a % 5 == b % 5;
                assert_eq!(eval(&c, &f, &[("x", a), ("y", b)]).unwrap(), same);
            }
        }
    }

    fn end_to_end(t: &Transduction, g: &LabeledGraph, order: &LinearOrder, choice: &ExpansionChoice) -> LabeledGraph {
        let out = theorem4_pipeline(t, g, order, choice, BuildOptions::default()).unwrap();
        let report = check_pipeline(t, g, order, choice, &out, 3).unwrap();
        assert!(report.passed(), "{:?}", report.failures());
        out.lacon().decode().unwrap()
    }

    #[test]
    fn pipeline_examples() {
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let complement = transduction(0, 1, "true", "true", "(not (edge x y))");
        assert_eq!(end_to_end(&complement, &k3, &LinearOrder::identity(&k3), &ExpansionChoice::empty(0)).edge_count(), 0);

        let golden = golden_graph();
        let decoded = end_to_end(&Transduction::identity(), &golden, &LinearOrder::identity(&golden), &ExpansionChoice::empty(0));
        assert_eq!(decoded.edge_count(), 6);

        let p4 = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let square = transduction(0, 1, "true", "true", "(exists z (and (edge x z) (edge z y)))");
        let decoded = end_to_end(&square, &p4, &LinearOrder::identity(&p4), &ExpansionChoice::empty(0));
        let want: BTreeSet<(String, String)> = [("a@1", "c@1"), ("b@1", "d@1")].iter().map(|&(a, b)| (a.into(), b.into())).collect();
        assert_eq!(decoded.named_edges(), want);
        let direct = interpret(&m_copy(&p4, 1), &square.basic.phi).unwrap();
        assert!(decoded.same_structure(&direct));
    }

    #[test]
    fn two_copies_with_domain_and_parameter() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let t = transduction(1, 2, "true", "(or (label Q1 x) (label P1 x))", "(or (edge x y) (and (sim x y) (label P1 x)))");
        let choice = ExpansionChoice { sets: vec![["b@2".to_string()].into()] };
        let decoded = end_to_end(&t, &g, &LinearOrder::identity(&g), &choice);
        assert_eq!(names(&decoded), ["a@1", "b@1", "c@1", "b@2"]);
        assert!(decoded.named_edges().contains(&("b@1".into(), "b@2".into())));
    }

    #[test]
    fn enumeration_is_capped() {
        let g = graph(3, &[]);
        assert_eq!(all_choices(&g, 2).unwrap().len(), 64);
        assert!(matches!(all_choices(&graph(5, &[]), 4), Err(PipelineError::EnumerationTooLarge { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn pipeline_matches_transduction(
            n in 1usize..=4,
            edges in proptest::collection::vec(any::<bool>(), 6),
            copies in 1usize..=2,
            chosen in proptest::collection::vec(any::<bool>(), 4),
            phi in 0usize..3,
            seed in any::<u64>(),
        ) {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let present: Vec<(usize, usize)> = pairs.iter().zip(&edges).filter(|(_, &e)| e).map(|(&p, _)| p).collect();
            let g = graph(n, &present);
            let mut seq: Vec<String> = g.names().to_vec();
            let k = seq.len();
            seq.rotate_left((seed as usize) % k);
            let order = LinearOrder::from_sequence(&seq).unwrap();
            let phi = ["(edge x y)", "(or (edge x y) (label P1 x))", "(and (not (edge x y)) (not (sim x y)))"][phi];
            let t = transduction(1, copies, "true", "(not (and (label Q2 x) (label P1 x)))", phi);
            let choice = ExpansionChoice {
                sets: vec![(0..n).filter(|&v| chosen[v]).map(|v| g.name(v).to_string()).collect()],
            };
            end_to_end(&t, &g, &order, &choice);
        }
    }
}
