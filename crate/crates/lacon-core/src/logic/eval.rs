//! Model checking by exhaustive quantifier expansion.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::formula::{Formula, Var};
use crate::graph::{GraphError, LabeledGraph};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("free variable `{0}` is not assigned")]
    Unbound(String),
    #[error("expected {expected} free variables, found {found:?}")]
    Arity { expected: usize, found: Vec<String> },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Edge(usize, usize),
    Label(usize, usize),
    Eq(usize, usize),
    Sim(usize, usize),
    Near { radius: usize, avoid: Vec<usize>, centers: Vec<usize>, target: usize },
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
}

/// A formula compiled to variable slots; independent of any graph.
#[derive(Debug, Clone)]
pub struct Program {
    root: Node,
    slots: Vec<Var>,
    labels: Vec<String>,
    free: Vec<usize>,
}

impl Program {
    pub fn compile(f: &Formula) -> Program {
        let mut slots = Vec::new();
        let mut labels = Vec::new();
        let root = compile(f, &mut slots, &mut labels);
        let free = f
            .free_vars()
            .iter()
            .map(|v| slots.iter().position(|s| s == v).expect("every variable has a slot"))
            .collect();
        Program { root, slots, labels, free }
    }

    pub fn slot(&self, v: &str) -> Option<usize> {
        self.slots.iter().position(|s| s == v)
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Prepares evaluation on `g`.
    pub fn on<'p, 'g>(&'p self, g: &'g LabeledGraph) -> Bound<'p, 'g> {
        let labels = self
            .labels
            .iter()
            .map(|l| (0..g.vertex_count()).map(|v| g.has_label(l, v)).collect())
            .collect();
        Bound { program: self, g, labels, adj: g.gaifman_adjacency() }
    }
}

fn slot_of(v: &Var, slots: &mut Vec<Var>) -> usize {
    match slots.iter().position(|s| s == v) {
        Some(i) => i,
        None => {
            slots.push(v.clone());
            slots.len() - 1
        }
    }
}

fn compile(f: &Formula, slots: &mut Vec<Var>, labels: &mut Vec<String>) -> Node {
    let label_id = |l: &str, labels: &mut Vec<String>| match labels.iter().position(|x| x == l) {
        Some(i) => i,
        None => {
            labels.push(l.to_string());
            labels.len() - 1
        }
    };
    match f {
        Formula::True => Node::Const(true),
        Formula::False => Node::Const(false),
        Formula::Edge(a, b) => Node::Edge(slot_of(a, slots), slot_of(b, slots)),
        Formula::Eq(a, b) => Node::Eq(slot_of(a, slots), slot_of(b, slots)),
        Formula::Sim(a, b) => Node::Sim(slot_of(a, slots), slot_of(b, slots)),
        Formula::Label(l, a) => Node::Label(label_id(l, labels), slot_of(a, slots)),
        Formula::Copy(i, a) => Node::Label(label_id(&format!("Q{i}"), labels), slot_of(a, slots)),
        Formula::Near { radius, avoid, centers, target } => Node::Near {
            radius: *radius,
            avoid: avoid.iter().map(|v| slot_of(v, slots)).collect(),
            centers: centers.iter().map(|v| slot_of(v, slots)).collect(),
            target: slot_of(target, slots),
        },
        Formula::Not(g) => Node::Not(Box::new(compile(g, slots, labels))),
        Formula::And(gs) => Node::And(gs.iter().map(|g| compile(g, slots, labels)).collect()),
        Formula::Or(gs) => Node::Or(gs.iter().map(|g| compile(g, slots, labels)).collect()),
        Formula::Exists(v, g) => {
            let s = slot_of(v, slots);
            Node::Exists(s, Box::new(compile(g, slots, labels)))
        }
        Formula::Forall(v, g) => {
            let s = slot_of(v, slots);
            Node::Forall(s, Box::new(compile(g, slots, labels)))
        }
    }
}

/// A program paired with a graph.
pub struct Bound<'p, 'g> {
    program: &'p Program,
    g: &'g LabeledGraph,
    labels: Vec<Vec<bool>>,
    adj: Vec<Vec<usize>>,
}

impl Bound<'_, '_> {
    /// Evaluates with variables assigned by name to vertex indices.
    pub fn eval(&self, assignment: &[(&str, usize)]) -> Result<bool, EvalError> {
        let mut env = vec![usize::MAX; self.program.slots.len()];
        for &(name, v) in assignment {
            if let Some(s) = self.program.slot(name) {
                env[s] = v;
            }
        }
        for &s in &self.program.free {
            if env[s] == usize::MAX {
                return Err(EvalError::Unbound(self.program.slots[s].clone()));
            }
        }
        Ok(self.eval_env(&mut env))
    }

    /// Evaluates with a full slot environment; free slots must be set.
    pub fn eval_env(&self, env: &mut [usize]) -> bool {
        self.node(&self.program.root, env)
    }

    fn node(&self, n: &Node, env: &mut [usize]) -> bool {
        match n {
            Node::Const(b) => *b,
            Node::Edge(a, b) => self.g.has_edge(env[*a], env[*b]),
            Node::Eq(a, b) => env[*a] == env[*b],
            Node::Sim(a, b) => self.g.sim_related(env[*a], env[*b]),
            Node::Label(l, a) => self.labels[*l][env[*a]],
            Node::Near { radius, avoid, centers, target } => {
                let avoid: Vec<usize> = avoid.iter().map(|&s| env[s]).collect();
                let centers: Vec<usize> = centers.iter().map(|&s| env[s]).collect();
                within(&self.adj, &avoid, &centers, *radius, env[*target])
            }
            Node::Not(f) => !self.node(f, env),
            Node::And(fs) => fs.iter().all(|f| self.node(f, env)),
            Node::Or(fs) => fs.iter().any(|f| self.node(f, env)),
            Node::Exists(s, f) => {
                let saved = env[*s];
                let found = (0..self.g.vertex_count()).any(|v| {
                    env[*s] = v;
                    self.node(f, env)
                });
                env[*s] = saved;
                found
            }
            Node::Forall(s, f) => {
                let saved = env[*s];
                let all = (0..self.g.vertex_count()).all(|v| {
                    env[*s] = v;
                    self.node(f, env)
                });
                env[*s] = saved;
                all
            }
        }
    }
}

/// Whether `target` is within distance `radius` of a center along a path
/// that avoids `avoid` entirely.
pub fn within(adj: &[Vec<usize>], avoid: &[usize], centers: &[usize], radius: usize, target: usize) -> bool {
    if avoid.contains(&target) {
        return false;
    }
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    for &c in centers {
        if !avoid.contains(&c) && dist[c] == usize::MAX {
            if c == target {
                return true;
            }
            dist[c] = 0;
            queue.push_back(c);
        }
    }
    while let Some(w) = queue.pop_front() {
        if dist[w] >= radius {
            continue;
        }
        for &x in &adj[w] {
            if dist[x] == usize::MAX && !avoid.contains(&x) {
                if x == target {
                    return true;
                }
                dist[x] = dist[w] + 1;
                queue.push_back(x);
            }
        }
    }
    false
}

/// Evaluates `f` on `g` with variables assigned to vertex indices.
pub fn eval(g: &LabeledGraph, f: &Formula, assignment: &[(&str, usize)]) -> Result<bool, EvalError> {
    Program::compile(f).on(g).eval(assignment)
}

/// Evaluates `f` on `g` with variables assigned to vertex names.
pub fn eval_named(g: &LabeledGraph, f: &Formula, assignment: &[(&str, &str)]) -> Result<bool, EvalError> {
    let mut resolved = Vec::with_capacity(assignment.len());
    for &(v, name) in assignment {
        resolved.push((v, g.require(name)?));
    }
    eval(g, f, &resolved)
}

/// The two variables of a binary formula: `x` and `y` when the free
/// variables are among them, otherwise the two free variables in name order.
pub fn binary_vars(f: &Formula) -> Result<(Var, Var), EvalError> {
    let free = f.free_vars();
    if free.iter().all(|v| v == "x" || v == "y") {
        return Ok(("x".into(), "y".into()));
    }
    if free.len() == 2 {
        let mut it = free.into_iter();
        return Ok((it.next().unwrap(), it.next().unwrap()));
    }
    Err(EvalError::Arity { expected: 2, found: free.into_iter().collect() })
}

/// The variable of a unary formula: `x` when the free variables are among
/// `{x}`, otherwise the single free variable.
pub fn unary_var(f: &Formula) -> Result<Var, EvalError> {
    let free = f.free_vars();
    if free.iter().all(|v| v == "x") {
        return Ok("x".into());
    }
    if free.len() == 1 {
        return Ok(free.into_iter().next().unwrap());
    }
    Err(EvalError::Arity { expected: 1, found: free.into_iter().collect() })
}

/// Whether a sentence holds; fails if `f` has free variables.
pub fn holds(g: &LabeledGraph, f: &Formula) -> Result<bool, EvalError> {
    let free = f.free_vars();
    if !free.is_empty() {
        return Err(EvalError::Arity { expected: 0, found: free.into_iter().collect() });
    }
    eval(g, f, &[])
}

/// Unlabeled graph on the vertices of `g` whose edges are the pairs `u != v`
/// with `f(u, v) or f(v, u)`.
pub fn interpret(g: &LabeledGraph, f: &Formula) -> Result<LabeledGraph, EvalError> {
    let (x, y) = binary_vars(f)?;
    interpret_on(g, f, &x, &y, |_| true)
}

/// Like [`interpret`], restricted to vertices accepted by `keep`.
pub fn interpret_on(
    g: &LabeledGraph,
    f: &Formula,
    x: &str,
    y: &str,
    keep: impl Fn(usize) -> bool,
) -> Result<LabeledGraph, EvalError> {
    let program = Program::compile(f);
    let bound = program.on(g);
    let (sx, sy) = (program.slot(x), program.slot(y));
    let kept: Vec<usize> = (0..g.vertex_count()).filter(|&v| keep(v)).collect();
    let names: Vec<&str> = kept.iter().map(|&v| g.name(v)).collect();
    let mut out = LabeledGraph::with_vertices(&names)?;
    let mut env = vec![0usize; program.slot_count()];
    let holds = |a: usize, b: usize, env: &mut [usize]| {
        if let Some(s) = sx {
            env[s] = a;
        }
        if let Some(s) = sy {
            env[s] = b;
        }
        bound.eval_env(env)
    };
    for i in 0..kept.len() {
        for j in i + 1..kept.len() {
            let (a, b) = (kept[i], kept[j]);
            if holds(a, b, &mut env) || holds(b, a, &mut env) {
                out.add_edge(i, j)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::syntax::parse_formula;

    fn path(names: &[&str]) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(names).unwrap();
        for i in 1..names.len() {
            g.add_edge(i - 1, i).unwrap();
        }
        g
    }

    #[test]
    fn basic_examples() {
        let k2 = path(&["a", "b"]);
        assert!(eval_named(&k2, &Formula::edge("x", "y"), &[("x", "a"), ("y", "b")]).unwrap());
        let p4 = path(&["a", "b", "c", "d"]);
        let two = parse_formula("(exists z (and (edge x z) (edge z y)))").unwrap();
        assert!(eval_named(&p4, &two, &[("x", "a"), ("y", "c")]).unwrap());
        let contra = Formula::and(two.clone(), Formula::not(two.clone()));
        assert!(!eval_named(&p4, &contra, &[("x", "a"), ("y", "c")]).unwrap());
        assert_eq!(
            eval(&p4, &two, &[("x", 0)]),
            Err(EvalError::Unbound("y".into()))
        );
    }

    #[test]
    fn interpretation_examples() {
        let mut k3 = LabeledGraph::with_vertices(&["a", "b", "c"]).unwrap();
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            k3.add_edge(a, b).unwrap();
        }
        let complement = interpret(&k3, &Formula::not(Formula::edge("x", "y"))).unwrap();
        assert_eq!(complement.edge_count(), 0);
        assert_eq!(interpret(&k3, &Formula::edge("x", "y")).unwrap(), k3);
        let p4 = path(&["a", "b", "c", "d"]);
        let square = interpret(&p4, &parse_formula("(exists z (and (edge x z) (edge z y)))").unwrap()).unwrap();
        let edges: Vec<(String, String)> = square.named_edges().into_iter().collect();
        assert_eq!(edges, [("a".into(), "c".into()), ("b".into(), "d".into())]);
        assert!(interpret(&p4, &parse_formula("(edge u v) ").unwrap().negate()).is_ok());
        assert!(interpret(&p4, &parse_formula("(and (edge u v) (edge v w))").unwrap()).is_err());
    }

    #[test]
    fn near_matches_expansion() {
        let p3 = path(&["a", "b", "c"]);
        let near = parse_formula("(near 1 (u) (v) w)").unwrap();
        let expanded = near.expand_near();
        for f in [&near, &expanded] {
            assert!(!eval_named(&p3, f, &[("u", "b"), ("v", "a"), ("w", "c")]).unwrap());
        }
        let near2 = parse_formula("(near 2 () (v) w)").unwrap();
        for f in [near2.clone(), near2.expand_near()] {
            assert!(eval_named(&p3, &f, &[("v", "a"), ("w", "c")]).unwrap());
        }
    }
}
