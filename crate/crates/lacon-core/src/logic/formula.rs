//! First-order formulas over the graph signature.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub type Var = String;

/// Formula AST. `Near` is a macro for "`target` lies within distance
/// `radius` of some center, along a path avoiding every `avoid` vertex";
/// [`Formula::expand_near`] turns it into plain first-order syntax.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Edge(Var, Var),
    Label(String, Var),
    Eq(Var, Var),
    Sim(Var, Var),
    Copy(usize, Var),
    Near {
        radius: usize,
        avoid: Vec<Var>,
        centers: Vec<Var>,
        target: Var,
    },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

pub fn var(name: &str) -> Var {
    name.to_string()
}

impl Formula {
    pub fn edge(a: &str, b: &str) -> Formula {
        Formula::Edge(var(a), var(b))
    }

    pub fn eq(a: &str, b: &str) -> Formula {
        Formula::Eq(var(a), var(b))
    }

    pub fn sim(a: &str, b: &str) -> Formula {
        Formula::Sim(var(a), var(b))
    }

    pub fn label(l: &str, a: &str) -> Formula {
        Formula::Label(l.to_string(), var(a))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(var(v), Box::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(var(v), Box::new(body))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![a, b])
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    /// Negation with constant folding and double-negation removal.
    pub fn negate(self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(inner) => *inner,
            other => Formula::Not(Box::new(other)),
        }
    }

    /// Conjunction with flattening, constant folding and duplicate removal.
    pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut parts: Vec<Formula> = Vec::new();
        for f in items {
            match f {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => {
                    for g in inner {
                        if !parts.contains(&g) {
                            parts.push(g);
                        }
                    }
                }
                g => {
                    if !parts.contains(&g) {
                        parts.push(g);
                    }
                }
            }
        }
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts),
        }
    }

    /// Disjunction with flattening, constant folding and duplicate removal.
    pub fn or_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut parts: Vec<Formula> = Vec::new();
        for f in items {
            match f {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => {
                    for g in inner {
                        if !parts.contains(&g) {
                            parts.push(g);
                        }
                    }
                }
                g => {
                    if !parts.contains(&g) {
                        parts.push(g);
                    }
                }
            }
        }
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts),
        }
    }

    /// Existential quantification, dropped when the variable does not occur free.
    pub fn exists_simplified(v: Var, body: Formula) -> Formula {
        match body {
            Formula::False => Formula::False,
            b if !b.has_free(&v) => b,
            b => Formula::Exists(v, Box::new(b)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn has_free(&self, v: &str) -> bool {
        self.free_vars().contains(v)
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Edge(a, b) | Formula::Eq(a, b) | Formula::Sim(a, b) => {
                add(a, bound);
                add(b, bound);
            }
            Formula::Label(_, a) | Formula::Copy(_, a) => add(a, bound),
            Formula::Near { avoid, centers, target, .. } => {
                for v in avoid.iter().chain(centers).chain(core::iter::once(target)) {
                    add(v, bound);
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Edge(a, b) | Formula::Eq(a, b) | Formula::Sim(a, b) => {
                f(a);
                f(b);
            }
            Formula::Label(_, a) | Formula::Copy(_, a) => f(a),
            Formula::Near { avoid, centers, target, .. } => {
                avoid.iter().chain(centers).for_each(&mut *f);
                f(target);
            }
            Formula::Not(g) => g.visit_vars(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_vars(f)),
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                f(v);
                g.visit_vars(f);
            }
        }
    }

    /// Quantifier rank, counting a `Near` node as its expansion would.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::Near { radius, .. } => radius.saturating_sub(1),
            Formula::Not(f) => f.quantifier_rank(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::quantifier_rank).max().unwrap_or(0)
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_rank(),
            _ => 0,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            _ => 1,
        }
    }

    pub fn contains_near(&self) -> bool {
        match self {
            Formula::Near { .. } => true,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => f.contains_near(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::contains_near),
            _ => false,
        }
    }

    /// Replaces free occurrences of `from` by `to`. The caller guarantees
    /// that `to` is not bound anywhere inside the formula.
    pub fn rename_free(&self, from: &str, to: &str) -> Formula {
        let r = |v: &Var| if v == from { var(to) } else { v.clone() };
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Edge(a, b) => Formula::Edge(r(a), r(b)),
            Formula::Eq(a, b) => Formula::Eq(r(a), r(b)),
            Formula::Sim(a, b) => Formula::Sim(r(a), r(b)),
            Formula::Label(l, a) => Formula::Label(l.clone(), r(a)),
            Formula::Copy(i, a) => Formula::Copy(*i, r(a)),
            Formula::Near { radius, avoid, centers, target } => Formula::Near {
                radius: *radius,
                avoid: avoid.iter().map(r).collect(),
                centers: centers.iter().map(r).collect(),
                target: r(target),
            },
            Formula::Not(f) => Formula::Not(Box::new(f.rename_free(from, to))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_free(from, to)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_free(from, to)).collect()),
            Formula::Exists(v, f) | Formula::Forall(v, f) if v == from => self.clone_with(v, (**f).clone()),
            Formula::Exists(v, f) | Formula::Forall(v, f) => self.clone_with(v, f.rename_free(from, to)),
        }
    }

    fn clone_with(&self, v: &Var, body: Formula) -> Formula {
        match self {
            Formula::Exists(..) => Formula::Exists(v.clone(), Box::new(body)),
            _ => Formula::Forall(v.clone(), Box::new(body)),
        }
    }

    /// Negation normal form: negations only in front of atoms and `Near`.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Formula {
        match self {
            Formula::True => if positive { Formula::True } else { Formula::False },
            Formula::False => if positive { Formula::False } else { Formula::True },
            Formula::Not(f) => f.nnf_signed(!positive),
            Formula::And(fs) => {
                let parts = fs.iter().map(|f| f.nnf_signed(positive));
                if positive { Formula::and_all(parts) } else { Formula::or_all(parts) }
            }
            Formula::Or(fs) => {
                let parts = fs.iter().map(|f| f.nnf_signed(positive));
                if positive { Formula::or_all(parts) } else { Formula::and_all(parts) }
            }
            Formula::Exists(v, f) => {
                let body = Box::new(f.nnf_signed(positive));
                if positive { Formula::Exists(v.clone(), body) } else { Formula::Forall(v.clone(), body) }
            }
            Formula::Forall(v, f) => {
                let body = Box::new(f.nnf_signed(positive));
                if positive { Formula::Forall(v.clone(), body) } else { Formula::Exists(v.clone(), body) }
            }
            atom => if positive { atom.clone() } else { Formula::Not(Box::new(atom.clone())) },
        }
    }

    /// Replaces every `Near` node by an equivalent formula that uses
    /// `radius - 1` nested existential quantifiers.
    pub fn expand_near(&self) -> Formula {
        match self {
            Formula::Near { radius, avoid, centers, target } => near_expansion(*radius, avoid, centers, target),
            Formula::Not(f) => Formula::Not(Box::new(f.expand_near())),
            Formula::And(fs) => Formula::And(fs.iter().map(Formula::expand_near).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(Formula::expand_near).collect()),
            Formula::Exists(v, f) => Formula::Exists(v.clone(), Box::new(f.expand_near())),
            Formula::Forall(v, f) => Formula::Forall(v.clone(), Box::new(f.expand_near())),
            other => other.clone(),
        }
    }

    /// Restricts every quantifier to vertices outside `label`.
    pub fn relativize(&self, label: &str) -> Formula {
        match self {
            Formula::Near { .. } => self.expand_near().relativize(label),
            Formula::Not(f) => Formula::Not(Box::new(f.relativize(label))),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.relativize(label)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.relativize(label)).collect()),
            Formula::Exists(v, f) => Formula::Exists(
                v.clone(),
                Box::new(Formula::and(Formula::not(Formula::label(label, v)), f.relativize(label))),
            ),
            Formula::Forall(v, f) => Formula::Forall(
                v.clone(),
                Box::new(Formula::or(Formula::label(label, v), f.relativize(label))),
            ),
            other => other.clone(),
        }
    }
}

/// A name starting with `base` that is not in `taken`.
pub fn fresh_var(base: &str, taken: &BTreeSet<Var>) -> Var {
    let mut i = 0usize;
    loop {
        let candidate = format!("{base}{i}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

fn step(a: &Var, b: &Var) -> Formula {
    Formula::Or(vec![
        Formula::Eq(a.clone(), b.clone()),
        Formula::Edge(a.clone(), b.clone()),
        Formula::Sim(a.clone(), b.clone()),
    ])
}

fn outside(v: &Var, avoid: &[Var]) -> Vec<Formula> {
    avoid
        .iter()
        .map(|a| Formula::not(Formula::Eq(v.clone(), a.clone())))
        .collect()
}

fn near_expansion(radius: usize, avoid: &[Var], centers: &[Var], target: &Var) -> Formula {
    let mut taken: BTreeSet<Var> = avoid.iter().chain(centers).cloned().collect();
    taken.insert(target.clone());
    let inner: Vec<Var> = (1..radius.max(1))
        .map(|_| {
            let v = fresh_var("_n", &taken);
            taken.insert(v.clone());
            v
        })
        .collect();
    let mut disjuncts = Vec::new();
    for c in centers {
        let mut parts = outside(c, avoid);
        parts.extend(outside(target, avoid));
        if radius == 0 {
            parts.push(Formula::Eq(c.clone(), target.clone()));
            disjuncts.push(Formula::And(parts));
            continue;
        }
        let mut walk: Vec<&Var> = vec![c];
        walk.extend(inner.iter());
        walk.push(target);
        for v in &inner {
            parts.extend(outside(v, avoid));
        }
        for w in walk.windows(2) {
            parts.push(step(w[0], w[1]));
        }
        let mut body = Formula::And(parts);
        for v in inner.iter().rev() {
            body = Formula::Exists(v.clone(), Box::new(body));
        }
        disjuncts.push(body);
    }
    Formula::Or(disjuncts)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Edge(a, b) => write!(f, "(edge {a} {b})"),
            Formula::Label(l, a) => write!(f, "(label {l} {a})"),
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Sim(a, b) => write!(f, "(sim {a} {b})"),
            Formula::Copy(i, a) => write!(f, "(Q {i} {a})"),
            Formula::Near { radius, avoid, centers, target } => {
                write!(f, "(near {radius} ({}) ({}) {target})", avoid.join(" "), centers.join(" "))
            }
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for g in gs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Exists(v, g) => write!(f, "(exists {v} {g})"),
            Formula::Forall(v, g) => write!(f, "(forall {v} {g})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_free_variables() {
        let f = Formula::exists("z", Formula::and(Formula::edge("x", "z"), Formula::edge("z", "y")));
        assert_eq!(f.quantifier_rank(), 1);
        let free: Vec<Var> = f.free_vars().into_iter().collect();
        assert_eq!(free, ["x", "y"]);
        let near = Formula::Near { radius: 3, avoid: vec![], centers: vec![var("y")], target: var("z") };
        assert_eq!(near.quantifier_rank(), 2);
        assert_eq!(near.expand_near().quantifier_rank(), 2);
    }

    #[test]
    fn nnf_pushes_negation() {
        let f = Formula::not(Formula::exists("z", Formula::and(Formula::edge("x", "z"), Formula::True)));
        assert_eq!(f.nnf().to_string(), "(forall z (not (edge x z)))");
    }

    #[test]
    fn simplifying_constructors() {
        assert_eq!(Formula::and_all([Formula::True, Formula::edge("x", "y")]), Formula::edge("x", "y"));
        assert_eq!(Formula::or_all([Formula::False, Formula::True]), Formula::True);
        assert_eq!(Formula::edge("x", "y").negate().negate(), Formula::edge("x", "y"));
    }

    #[test]
    fn rename_respects_binding() {
        let f = Formula::and(Formula::edge("x", "y"), Formula::exists("x", Formula::edge("x", "y")));
        assert_eq!(f.rename_free("x", "w").to_string(), "(and (edge w y) (exists x (edge x y)))");
    }
}
