//! Directed lacon-decompositions of interpretations, built from local types
//! around weakly reachable sets.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::{Lacon, LaconError};
use crate::coloring::OrderedGraph;
use crate::graph::{add_apex, LabeledGraph, LinearOrder, APEX_LABEL};
use crate::logic::eval::{binary_vars, Program};
use crate::logic::separation::distances_avoiding;
use crate::logic::types::{TypeId, TypeTable};
use crate::logic::Formula;

/// Extra type ranks tried after a label conflict.
pub const DEFAULT_ESCALATION: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Starting type rank; defaults to the formula's quantifier rank plus one.
    pub rank: Option<u32>,
    pub escalation: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { rank: None, escalation: DEFAULT_ESCALATION }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltLacon {
    pub lacon: Lacon,
    /// Name of the graph vertex each hidden vertex was built around; may be
    /// the added apex.
    pub corresponding: Vec<String>,
    /// Type rank that produced consistent labels.
    pub rank: u32,
    /// Conflicting ranks tried before `rank`.
    pub escalations: u32,
    /// Radius of the weakly reachable sets the hidden vertices attach through.
    pub radius: usize,
    pub apex_added: bool,
}

/// Builds a directed lacon-decomposition of the graph that `phi` interprets
/// in `g`, ordered consistently with `order`.
pub fn build_directed_lacon(
    g: &LabeledGraph,
    order: &LinearOrder,
    phi: &Formula,
    options: BuildOptions,
) -> Result<BuiltLacon, LaconError> {
    let (x, y) = binary_vars(phi)?;
    order.rank_vector(g)?;
    let q = phi.quantifier_rank() as u32;
    let start = options.rank.unwrap_or(q + 1);
    if start < q {
        return Err(LaconError::RankBelowFormula { rank: start, formula_rank: q });
    }
    let radius = 4usize.saturating_pow(q).max(2);

    let (host, host_order, apex, formula) = match g.apex() {
        Some(_) => (g.clone(), order.clone(), None, phi.clone()),
        None => {
            if g.label_members(APEX_LABEL).is_some_and(|m| !m.is_empty()) {
                return Err(LaconError::ApexLabelInUse);
            }
            let (host, host_order, name) = add_apex(g, order)?;
            (host, host_order, Some(name), phi.relativize(APEX_LABEL))
        }
    };

    let mut escalations = 0;
    let mut rank = start;
    loop {
        match attempt(&host, &host_order, &formula, &x, &y, rank, radius)? {
            Ok((lacon, corresponding)) => {
                let lacon = match &apex {
                    Some(name) => lacon.without_target(name)?,
                    None => lacon,
                };
                return Ok(BuiltLacon {
                    lacon,
                    corresponding,
                    rank,
                    escalations,
                    radius,
                    apex_added: apex.is_some(),
                });
            }
            Err(witness) if escalations >= options.escalation => {
                return Err(LaconError::LabelConflict { rank, witness });
            }
            Err(_) => {
                escalations += 1;
                rank += 1;
            }
        }
    }
}

type Attempt = Result<(Lacon, Vec<String>), String>;

fn attempt(
    g: &LabeledGraph,
    order: &LinearOrder,
    phi: &Formula,
    x: &str,
    y: &str,
    rank: u32,
    radius: usize,
) -> Result<Attempt, LaconError> {
    let n = g.vertex_count();
    let og = OrderedGraph::from_graph(g, order)?;
    let ranks = og.ranks().to_vec();
    let near = og.weak_reach_all(radius);
    let far = og.weak_reach_all(2 * radius);
    let adj = g.gaifman_adjacency();

    let program = Program::compile(phi);
    let bound = program.on(g);
    let (sx, sy) = (program.slot(x), program.slot(y));
    let mut env = vec![0usize; program.slot_count()];
    let mut holds = |a: usize, b: usize| {
        let mut one = |a: usize, b: usize| {
            if let Some(s) = sx {
                env[s] = a;
            }
            if let Some(s) = sy {
                env[s] = b;
            }
            bound.eval_env(&mut env)
        };
        one(a, b) || one(b, a)
    };

    let mut lacon = Lacon::directed();
    for v in 0..n {
        lacon.add_target(g.name(v))?;
    }
    let mut taken: BTreeSet<String> = g.names().iter().cloned().collect();
    let mut corresponding = Vec::new();
    let mut table = TypeTable::new(rank);

    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&v| ranks[v]);
    for &u in &by_rank {
        let mut separator = far[u].clone();
        separator.sort_by_key(|&w| ranks[w]);
        let mut types: Vec<TypeId> = Vec::with_capacity(n);
        {
            let mut scope = table.scope(g);
            let mut tuple = separator.clone();
            tuple.push(0);
            for v in 0..n {
                *tuple.last_mut().unwrap() = v;
                types.push(scope.type_of(&tuple, rank)?);
            }
        }
        let attached: Vec<usize> = (0..n).filter(|&v| near[v].contains(&u)).collect();
        let mut realized: Vec<TypeId> = attached.iter().map(|&v| types[v]).collect();
        realized.sort();
        realized.dedup();
        let realized = table.sorted(&realized);

        let reach: Vec<Vec<usize>> = (0..n).map(|v| distances_avoiding(&adj, &separator, &[v], radius)).collect();
        let separated = |a: usize, b: usize| reach[a][b] == usize::MAX;

        for (i, &first) in realized.iter().enumerate() {
            for (j, &second) in realized.iter().enumerate() {
                let mut label: Option<(bool, usize, usize)> = None;
                for a in (0..n).filter(|&a| types[a] == first) {
                    for b in (0..n).filter(|&b| b != a && types[b] == second && separated(a, b)) {
                        let value = holds(a, b);
                        match label {
                            None => label = Some((value, a, b)),
                            Some((seen, c, d)) if seen != value => {
                                return Ok(Err(format!(
                                    "around {}: pairs ({},{}) and ({},{}) share types but differ",
                                    g.name(u),
                                    g.name(c),
                                    g.name(d),
                                    g.name(a),
                                    g.name(b)
                                )));
                            }
                            Some(_) => {}
                        }
                    }
                }
                let name = fresh(&mut taken, &format!("h_{}_{}_{}", g.name(u), i, j));
                let h = lacon.add_hidden(&name, label.is_some_and(|l| l.0))?;
                corresponding.push(g.name(u).to_string());
                for &v in &attached {
                    if types[v] == first {
                        lacon.arc_in(v, h)?;
                    }
                    if types[v] == second {
                        lacon.arc_out(h, v)?;
                    }
                }
            }
        }
    }

    let mut seq: Vec<&str> = lacon.hidden().iter().map(String::as_str).collect();
    seq.extend(by_rank.iter().map(|&v| g.name(v)));
    lacon.set_order(&LinearOrder::from_sequence(&seq)?)?;
    Ok(Ok((lacon, corresponding)))
}

fn fresh(taken: &mut BTreeSet<String>, base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    taken.insert(name.clone());
    name
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{interpret, parse_formula};

    fn graph(n: usize, edges: &[(usize, usize)]) -> LabeledGraph {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let mut g = LabeledGraph::with_vertices(&names).unwrap();
        for &(a, b) in edges {
            g.add_edge(a, b).unwrap();
        }
        g
    }

    fn round_trip(g: &LabeledGraph, order: &LinearOrder, text: &str) -> BuiltLacon {
        let phi = parse_formula(text).unwrap();
        let built = build_directed_lacon(g, order, &phi, BuildOptions::default()).unwrap();
        let want = interpret(g, &phi).unwrap();
        let got = built.lacon.decode().unwrap();
        assert!(got.same_structure(&want), "{text} on {:?}: {:?}", g.named_edges(), got.structural_difference(&want));
        assert!(built.lacon.decode_sweep().same_structure(&want));
        assert!(built.lacon.verify(Some(&want)).passed());
        built
    }

    #[test]
    fn k2_edge_and_non_edge() {
        let g = graph(2, &[(0, 1)]);
        for order in [LinearOrder::identity(&g), LinearOrder::from_sequence(&["v2", "v1"]).unwrap()] {
            let built = round_trip(&g, &order, "(edge x y)");
            assert!(built.apex_added);
            assert_eq!(built.lacon.decode().unwrap().edge_count(), 1);
            let dom = built.lacon.dominant(0, 1).unwrap();
            assert!(built.lacon.label(dom));
            assert_eq!(round_trip(&g, &order, "(not (edge x y))").lacon.decode().unwrap().edge_count(), 0);
        }
    }

    #[test]
    fn single_vertex_is_vacuous() {
        let g = graph(1, &[]);
        let built = round_trip(&g, &LinearOrder::identity(&g), "(edge x y)");
        assert_eq!(built.lacon.target_count(), 1);
        assert!(built.lacon.verify(None).passed());
    }

    #[test]
    fn small_graphs_round_trip() {
        let formulas = [
            "(edge x y)",
            "(not (edge x y))",
            "(exists z (and (edge x z) (edge z y)))",
            "(or (edge x y) (exists z (and (edge x z) (edge z y))))",
        ];
        let shapes: [(usize, &[(usize, usize)]); 5] = [
            (3, &[(0, 1), (1, 2)]),
            (4, &[(0, 1), (1, 2), (2, 3)]),
            (4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            (4, &[(0, 1), (0, 2), (0, 3)]),
            (5, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]),
        ];
        for (n, edges) in shapes {
            let g = graph(n, edges);
            let reversed: Vec<String> = g.names().iter().rev().cloned().collect();
            for order in [LinearOrder::identity(&g), LinearOrder::from_sequence(&reversed).unwrap()] {
                for f in formulas {
                    round_trip(&g, &order, f);
                }
            }
        }
    }

    #[test]
    fn existing_apex_is_used() {
        let mut g = graph(4, &[(0, 1), (0, 2), (0, 3), (1, 2)]);
        g.add_label(APEX_LABEL, 0);
        let built = round_trip(&g, &LinearOrder::identity(&g), "(edge x y)");
        assert!(!built.apex_added);
        assert_eq!(built.lacon.target_count(), 4);
    }

    #[test]
    fn low_rank_and_arity_are_rejected() {
        let g = graph(2, &[(0, 1)]);
        let phi = parse_formula("(exists z (and (edge x z) (edge z y)))").unwrap();
        let options = BuildOptions { rank: Some(0), ..BuildOptions::default() };
        assert_eq!(
            build_directed_lacon(&g, &LinearOrder::identity(&g), &phi, options),
            Err(LaconError::RankBelowFormula { rank: 0, formula_rank: 1 })
        );
        let three = parse_formula("(and (edge x y) (edge y z))").unwrap();
        assert!(matches!(
            build_directed_lacon(&g, &LinearOrder::identity(&g), &three, BuildOptions::default()),
            Err(LaconError::Eval(_))
        ));
    }
}
