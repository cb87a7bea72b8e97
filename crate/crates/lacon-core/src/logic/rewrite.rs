//! Rewriting a formula into a separated expression: a boolean combination
//! of formulas that each mention the separator variables and at most one
//! block, equivalent to the input whenever the separator
//! `4^q`-separates the blocks (q the quantifier rank).
//!
//! Intermediate results are boolean trees over interned leaf formulas. An
//! existential quantifier is split into a witness near one of the blocks and
//! a witness far from all of them; the far case is replaced by a local
//! search in the annulus around each block plus a count of scattered
//! witnesses.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::bdd::{self, Bdd};
use super::eval::{Bound, Program};
use crate::bitset::BitSet;
use super::formula::{fresh_var, Formula, Var};
use crate::graph::LabeledGraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("quantifier rank {rank} exceeds the cap of {cap}")]
    RankCap { rank: usize, cap: usize },
    #[error("free variable `{0}` is in neither the separator nor a block")]
    Unplaced(Var),
    #[error("variable `{0}` is listed twice in the block specification")]
    Duplicate(Var),
    #[error("expression grew beyond {limit} {what}")]
    TooLarge { what: &'static str, limit: usize },
}

/// Separator variables and the variable blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSpec {
    pub separator: Vec<Var>,
    pub blocks: Vec<Vec<Var>>,
}

impl BlockSpec {
    pub fn new(separator: Vec<Var>, blocks: Vec<Vec<Var>>) -> Self {
        BlockSpec { separator, blocks }
    }

    /// 0 for separator variables, `i + 1` for variables of block `i`.
    fn slot(&self, v: &str) -> Option<usize> {
        if self.separator.iter().any(|s| s == v) {
            return Some(0);
        }
        self.blocks.iter().position(|b| b.iter().any(|s| s == v)).map(|i| i + 1)
    }

    /// The single slot a formula lives in, or `None` if it spans two blocks.
    fn slot_of(&self, vars: &BTreeSet<Var>) -> Result<Option<usize>, RewriteError> {
        let mut found = 0;
        for v in vars {
            match self.slot(v) {
                None => return Err(RewriteError::Unplaced(v.clone())),
                Some(0) => {}
                Some(s) if found == 0 || found == s => found = s,
                Some(_) => return Ok(None),
            }
        }
        Ok(Some(found))
    }

    fn validate(&self) -> Result<(), RewriteError> {
        let mut seen = BTreeSet::new();
        for v in self.separator.iter().chain(self.blocks.iter().flatten()) {
            if !seen.insert(v.clone()) {
                return Err(RewriteError::Duplicate(v.clone()));
            }
        }
        Ok(())
    }
}

/// One conjunct of a clause; `block` is `None` for separator-only formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunct {
    pub block: Option<usize>,
    pub formula: Formula,
}

/// Disjunction of clauses, each a conjunction of single-block formulas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatedExpression {
    pub spec: BlockSpec,
    pub clauses: Vec<Vec<Conjunct>>,
}

impl SeparatedExpression {
    pub fn to_formula(&self) -> Formula {
        Formula::or_all(
            self.clauses
                .iter()
                .map(|c| Formula::and_all(c.iter().map(|k| k.formula.clone()))),
        )
    }

    /// Checks that every conjunct mentions only separator variables and the
    /// variables of its declared block. Returns the offending conjuncts.
    pub fn separation_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, clause) in self.clauses.iter().enumerate() {
            for c in clause {
                let allowed: BTreeSet<&Var> = self
                    .spec
                    .separator
                    .iter()
                    .chain(c.block.map(|b| self.spec.blocks[b].iter()).into_iter().flatten())
                    .collect();
                if let Some(v) = c.formula.free_vars().iter().find(|v| !allowed.contains(v)) {
                    out.push(format!("clause {i}: variable {v} outside block {:?} in {}", c.block, c.formula));
                }
            }
        }
        out
    }

    pub fn is_structurally_separated(&self) -> bool {
        self.separation_violations().is_empty()
    }

    pub fn conjunct_count(&self) -> usize {
        self.clauses.iter().map(Vec::len).sum()
    }

    pub fn quantifier_rank(&self) -> usize {
        self.clauses
            .iter()
            .flatten()
            .map(|c| c.formula.quantifier_rank())
            .max()
            .unwrap_or(0)
    }

    /// Compiles each distinct conjunct once for repeated evaluation.
    pub fn compile(&self) -> CompiledExpression {
        let mut index: BTreeMap<&Formula, usize> = BTreeMap::new();
        let mut programs = Vec::new();
        let clauses = self
            .clauses
            .iter()
            .map(|clause| {
                clause
                    .iter()
                    .map(|c| {
                        *index.entry(&c.formula).or_insert_with(|| {
                            programs.push(Program::compile(&c.formula));
                            programs.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        CompiledExpression { programs, clauses }
    }
}

/// Separated expression with compiled conjuncts.
pub struct CompiledExpression {
    programs: Vec<Program>,
    clauses: Vec<Vec<usize>>,
}

impl CompiledExpression {
    pub fn on<'p, 'g>(&'p self, g: &'g LabeledGraph) -> BoundExpression<'p, 'g> {
        BoundExpression { bound: self.programs.iter().map(|p| p.on(g)).collect(), clauses: &self.clauses }
    }
}

pub struct BoundExpression<'p, 'g> {
    bound: Vec<Bound<'p, 'g>>,
    clauses: &'p [Vec<usize>],
}

impl BoundExpression<'_, '_> {
    /// Evaluates with each conjunct computed at most once.
    pub fn eval(&self, assignment: &[(&str, usize)]) -> Result<bool, super::EvalError> {
        let mut cache: Vec<Option<bool>> = vec![None; self.bound.len()];
        for clause in self.clauses {
            let mut all = true;
            for &i in clause {
                let value = match cache[i] {
                    Some(v) => v,
                    None => {
                        let v = self.bound[i].eval(assignment)?;
                        cache[i] = Some(v);
                        v
                    }
                };
                if !value {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Default cap on the quantifier rank accepted by the rewriter.
pub const DEFAULT_RANK_CAP: usize = 2;

const CLAUSE_LIMIT: usize = 1 << 16;

const CASE_LIMIT: usize = 256;

/// Rewrites `f` into a separated expression for `spec`.
pub fn separated_expression(f: &Formula, spec: &BlockSpec, rank_cap: usize) -> Result<SeparatedExpression, RewriteError> {
    spec.validate()?;
    let rank = f.quantifier_rank();
    if rank > rank_cap {
        return Err(RewriteError::RankCap { rank, cap: rank_cap });
    }
    let f = if f.contains_near() { f.expand_near() } else { f.clone() }.nnf();
    spec.slot_of(&f.free_vars())?;
    let mut taken: BTreeSet<Var> = f.all_vars();
    taken.extend(spec.separator.iter().cloned());
    taken.extend(spec.blocks.iter().flatten().cloned());
    let mut rw = Rewriter::new(taken);
    let tree = rw.sep(&f, spec)?;
    rw.to_clauses(tree, spec)
}

/// Handle to an interned boolean tree over leaf formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node(u32);

const FALSE: Node = Node(0);
const TRUE: Node = Node(1);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Shape {
    Const(bool),
    Leaf(usize),
    Not(Node),
    And(Vec<Node>),
    Or(Vec<Node>),
}

struct Rewriter {
    leaves: Vec<(Formula, BTreeSet<Var>)>,
    leaf_ids: BTreeMap<Formula, usize>,
    shapes: Vec<Shape>,
    support: Vec<BitSet>,
    node_ids: HashMap<Shape, Node>,
    scattered_memo: BTreeMap<(Formula, Option<Vec<Var>>, usize, usize), Formula>,
    taken: BTreeSet<Var>,
}

impl Rewriter {
    fn new(taken: BTreeSet<Var>) -> Self {
        let mut rw = Rewriter {
            leaves: Vec::new(),
            leaf_ids: BTreeMap::new(),
            shapes: Vec::new(),
            support: Vec::new(),
            node_ids: HashMap::new(),
            scattered_memo: BTreeMap::new(),
            taken,
        };
        rw.intern(Shape::Const(false));
        rw.intern(Shape::Const(true));
        rw
    }

    fn intern(&mut self, shape: Shape) -> Node {
        if let Some(&n) = self.node_ids.get(&shape) {
            return n;
        }
        let support = match &shape {
            Shape::Const(_) => BitSet::new(),
            Shape::Leaf(l) => core::iter::once(*l).collect(),
            Shape::Not(c) => self.support[c.0 as usize].clone(),
            Shape::And(cs) | Shape::Or(cs) => {
                cs.iter().fold(BitSet::new(), |acc, c| acc.union(&self.support[c.0 as usize]))
            }
        };
        let n = Node(self.shapes.len() as u32);
        self.shapes.push(shape.clone());
        self.support.push(support);
        self.node_ids.insert(shape, n);
        n
    }

    fn shape(&self, n: Node) -> &Shape {
        &self.shapes[n.0 as usize]
    }

    fn support(&self, n: Node) -> &BitSet {
        &self.support[n.0 as usize]
    }

    fn not(&mut self, n: Node) -> Node {
        match self.shape(n) {
            Shape::Const(b) => {
                if *b {
                    FALSE
                } else {
                    TRUE
                }
            }
            Shape::Not(c) => *c,
            _ => self.intern(Shape::Not(n)),
        }
    }

    fn junction(&mut self, items: Vec<Node>, conj: bool) -> Node {
        let (unit, zero) = if conj { (TRUE, FALSE) } else { (FALSE, TRUE) };
        let mut parts: BTreeSet<Node> = BTreeSet::new();
        for n in items {
            if n == unit {
                continue;
            }
            if n == zero {
                return zero;
            }
            match self.shape(n) {
                Shape::And(cs) if conj => parts.extend(cs.iter().copied()),
                Shape::Or(cs) if !conj => parts.extend(cs.iter().copied()),
                _ => {
                    parts.insert(n);
                }
            }
        }
        let complementary = parts.iter().any(|&p| matches!(self.shape(p), Shape::Not(c) if parts.contains(c)));
        if complementary {
            return zero;
        }
        let parts: Vec<Node> = parts.into_iter().collect();
        match parts.len() {
            0 => unit,
            1 => parts[0],
            _ if conj => self.intern(Shape::And(parts)),
            _ => self.intern(Shape::Or(parts)),
        }
    }

    fn and(&mut self, items: Vec<Node>) -> Node {
        self.junction(items, true)
    }

    fn or(&mut self, items: Vec<Node>) -> Node {
        self.junction(items, false)
    }

    fn leaf_node(&mut self, l: usize) -> Node {
        self.intern(Shape::Leaf(l))
    }

    fn fresh(&mut self, base: &str) -> Var {
        let v = fresh_var(base, &self.taken);
        self.taken.insert(v.clone());
        v
    }

    fn leaf(&mut self, f: Formula) -> Node {
        match f {
            Formula::True => return TRUE,
            Formula::False => return FALSE,
            Formula::Not(inner) => {
                let n = self.leaf(*inner);
                return self.not(n);
            }
            _ => {}
        }
        let f = canonical_atom(f);
        let id = match self.leaf_ids.get(&f) {
            Some(&id) => id,
            None => {
                let id = self.leaves.len();
                let free = f.free_vars();
                self.leaves.push((f.clone(), free));
                self.leaf_ids.insert(f, id);
                id
            }
        };
        self.leaf_node(id)
    }

    fn to_formula(&self, n: Node) -> Formula {
        match self.shape(n) {
            Shape::Const(true) => Formula::True,
            Shape::Const(false) => Formula::False,
            Shape::Leaf(i) => self.leaves[*i].0.clone(),
            Shape::Not(c) => self.to_formula(*c).negate(),
            Shape::And(cs) => Formula::and_all(cs.iter().map(|&c| self.to_formula(c))),
            Shape::Or(cs) => Formula::or_all(cs.iter().map(|&c| self.to_formula(c))),
        }
    }

    fn mentions(&self, leaf: usize, x: &Var) -> bool {
        self.leaves[leaf].1.contains(x)
    }

    fn sep(&mut self, f: &Formula, spec: &BlockSpec) -> Result<Node, RewriteError> {
        if spec.slot_of(&f.free_vars())?.is_some() {
            return Ok(self.leaf(f.clone()));
        }
        match f {
            Formula::Edge(a, b) | Formula::Eq(a, b) | Formula::Sim(a, b) => Ok(self.crossing_atom(f, a, b, spec)),
            Formula::Not(g) => {
                let n = self.sep(g, spec)?;
                Ok(self.not(n))
            }
            Formula::And(gs) => {
                let parts = gs.iter().map(|g| self.sep(g, spec)).collect::<Result<_, _>>()?;
                Ok(self.and(parts))
            }
            Formula::Or(gs) => {
                let parts = gs.iter().map(|g| self.sep(g, spec)).collect::<Result<_, _>>()?;
                Ok(self.or(parts))
            }
            Formula::Exists(v, g) => self.existential(f.quantifier_rank(), v, g, spec),
            Formula::Forall(v, g) => self.universal(f.quantifier_rank(), v, g, spec),
            _ => unreachable!("single-variable atoms always fit one slot"),
        }
    }

    /// An atom whose two variables sit in different blocks can only hold
    /// through a separator vertex.
    fn crossing_atom(&mut self, f: &Formula, a: &Var, b: &Var, spec: &BlockSpec) -> Node {
        let rebuild = |p: &Var, q: &Var| match f {
            Formula::Edge(..) => Formula::Edge(p.clone(), q.clone()),
            Formula::Eq(..) => Formula::Eq(p.clone(), q.clone()),
            _ => Formula::Sim(p.clone(), q.clone()),
        };
        let mut parts = Vec::new();
        for x in &spec.separator {
            let pair = [
                (Formula::Eq(a.clone(), x.clone()), rebuild(x, b)),
                (Formula::Eq(b.clone(), x.clone()), rebuild(a, x)),
            ];
            for (eq, atom) in pair {
                let l = self.leaf(eq);
                let r = self.leaf(atom);
                parts.push(self.and(vec![l, r]));
            }
        }
        self.or(parts)
    }

    fn near(&self, radius: usize, spec: &BlockSpec, centers: &[Var], target: &Var) -> Formula {
        Formula::Near { radius, avoid: spec.separator.clone(), centers: centers.to_vec(), target: target.clone() }
    }

    fn existential(&mut self, rank: usize, v: &Var, body: &Formula, spec: &BlockSpec) -> Result<Node, RewriteError> {
        if !body.has_free(v) {
            return self.sep(body, spec);
        }
        let x = self.fresh("_x");
        let psi = body.rename_free(v, &x);
        let r = 4usize.pow(rank as u32 - 1);
        let mut parts = Vec::new();
        for i in 0..spec.blocks.len() {
            let mut inner = spec.clone();
            inner.blocks[i].push(x.clone());
            let tree = self.sep(&psi, &inner)?;
            let near = self.near(r, spec, &spec.blocks[i], &x);
            for (xi, rest) in self.sides(tree, &x)? {
                let xi = self.to_formula(xi);
                let witness = self.leaf(Formula::exists_simplified(x.clone(), Formula::and_all([near.clone(), xi])));
                parts.push(self.and(vec![witness, rest]));
            }
        }
        let mut outer = spec.clone();
        outer.blocks.push(vec![x.clone()]);
        let tree = self.sep(&psi, &outer)?;
        for (xi, rest) in self.sides(tree, &x)? {
            let xi = self.to_formula(xi);
            let g = self.gamma(&x, &xi, r, spec);
            parts.push(self.and(vec![g, rest]));
        }
        Ok(self.or(parts))
    }

    /// Dual of [`Self::existential`]: each universal statement is split by
    /// an exclusive case distinction on the leaves free of `x`, so no large
    /// tree is ever negated.
    fn universal(&mut self, rank: usize, v: &Var, body: &Formula, spec: &BlockSpec) -> Result<Node, RewriteError> {
        if !body.has_free(v) {
            return self.sep(body, spec);
        }
        let x = self.fresh("_x");
        let psi = body.rename_free(v, &x);
        let r = 4usize.pow(rank as u32 - 1);
        let mut parts = Vec::new();
        for i in 0..spec.blocks.len() {
            let mut inner = spec.clone();
            inner.blocks[i].push(x.clone());
            let tree = self.sep(&psi, &inner)?;
            let near = self.near(r, spec, &spec.blocks[i], &x);
            let mut cases = Vec::new();
            for (guard, xi) in self.cases(tree, &x)? {
                let xi = self.to_formula(xi);
                let all = match Formula::or_all([Formula::not(near.clone()), xi]) {
                    Formula::True => Formula::True,
                    body => Formula::Forall(x.clone(), Box::new(body)),
                };
                let all = self.leaf(all);
                cases.push(self.and(vec![guard, all]));
            }
            parts.push(self.or(cases));
        }
        let mut outer = spec.clone();
        outer.blocks.push(vec![x.clone()]);
        let tree = self.sep(&psi, &outer)?;
        let mut cases = Vec::new();
        for (guard, xi) in self.cases(tree, &x)? {
            let counter = self.to_formula(xi).negate();
            let none = self.no_far_witness(&x, &counter, r, spec);
            cases.push(self.and(vec![guard, none]));
        }
        parts.push(self.or(cases));
        Ok(self.and(parts))
    }

    /// Pairs `(xi, rest)` with `xi` over the leaves mentioning `x` and
    /// `rest` over the others, whose conjunctions make up `tree`.
    fn sides(&mut self, tree: Node, x: &Var) -> Result<Vec<(Node, Node)>, RewriteError> {
        let x = x.clone();
        let key = move |rw: &Self, l: usize| Some(usize::from(rw.mentions(l, &x)));
        let clauses = self.dnf(tree, &key, &mut BTreeMap::new())?;
        Ok(clauses
            .into_iter()
            .map(|c| (c.get(&1).copied().unwrap_or(TRUE), c.get(&0).copied().unwrap_or(TRUE)))
            .collect())
    }

    /// Pairs `(guard, xi)` where the guards are over the leaves free of `x`,
    /// pairwise exclusive and exhaustive, and `xi` is what remains of
    /// `tree` under the guard.
    fn cases(&mut self, tree: Node, x: &Var) -> Result<Vec<(Node, Node)>, RewriteError> {
        let (upper, lower): (Vec<usize>, Vec<usize>) = self.support(tree).iter().partition(|&l| !self.mentions(l, x));
        let leaf_at: Vec<usize> = upper.iter().chain(lower.iter()).copied().collect();
        let levels: BTreeMap<usize, u32> = leaf_at.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
        let mut bdd = Bdd::new();
        let root = self.to_bdd(tree, &levels, &mut bdd, &mut HashMap::new());
        let cut = upper.len() as u32;
        let boundary = bdd.boundary(root, cut);
        if boundary.len() > CASE_LIMIT {
            return Err(RewriteError::TooLarge { what: "cases of a universal quantifier", limit: CASE_LIMIT });
        }
        let mut memo = HashMap::new();
        let mut out = Vec::new();
        for b in boundary {
            let g = bdd.guard(root, cut, b);
            let guard = self.from_bdd(&bdd, g, &leaf_at, &mut memo);
            let xi = self.from_bdd(&bdd, b, &leaf_at, &mut memo);
            out.push((guard, xi));
        }
        Ok(out)
    }

    fn to_bdd(&self, n: Node, levels: &BTreeMap<usize, u32>, bdd: &mut Bdd, memo: &mut HashMap<Node, u32>) -> u32 {
        if let Some(&b) = memo.get(&n) {
            return b;
        }
        let b = match self.shape(n) {
            Shape::Const(false) => bdd::ZERO,
            Shape::Const(true) => bdd::ONE,
            Shape::Leaf(l) => bdd.var(levels[l]),
            Shape::Not(c) => {
                let c = self.to_bdd(*c, levels, bdd, memo);
                bdd.not(c)
            }
            Shape::And(cs) => cs.iter().fold(bdd::ONE, |acc, &c| {
                let c = self.to_bdd(c, levels, bdd, memo);
                bdd.and(acc, c)
            }),
            Shape::Or(cs) => cs.iter().fold(bdd::ZERO, |acc, &c| {
                let c = self.to_bdd(c, levels, bdd, memo);
                bdd.or(acc, c)
            }),
        };
        memo.insert(n, b);
        b
    }

    fn from_bdd(&mut self, bdd: &Bdd, b: u32, leaf_at: &[usize], memo: &mut HashMap<u32, Node>) -> Node {
        match b {
            bdd::ZERO => return FALSE,
            bdd::ONE => return TRUE,
            _ => {}
        }
        if let Some(&n) = memo.get(&b) {
            return n;
        }
        let leaf = self.leaf_node(leaf_at[bdd.level(b) as usize]);
        let not_leaf = self.not(leaf);
        let high = self.from_bdd(bdd, bdd.high(b), leaf_at, memo);
        let low = self.from_bdd(bdd, bdd.low(b), leaf_at, memo);
        let n = match (low, high) {
            (FALSE, _) => self.and(vec![leaf, high]),
            (TRUE, _) => self.or(vec![not_leaf, high]),
            (_, FALSE) => self.and(vec![not_leaf, low]),
            (_, TRUE) => self.or(vec![leaf, low]),
            _ => {
                let a = self.and(vec![leaf, high]);
                let c = self.and(vec![not_leaf, low]);
                self.or(vec![a, c])
            }
        };
        memo.insert(b, n);
        n
    }

    fn annulus(&mut self, x: &Var, xi: &Formula, r: usize, spec: &BlockSpec, block: &[Var]) -> Node {
        let body = Formula::and_all([
            self.near(3 * r, spec, block, x),
            Formula::not(self.near(r, spec, block, x)),
            xi.clone(),
        ]);
        self.leaf(Formula::exists_simplified(x.clone(), body))
    }

    /// Replacement for `exists x (x outside every r-neighborhood and xi)`:
    /// a witness in some annulus, or more scattered witnesses overall than
    /// the blocks' neighborhoods can hold.
    fn gamma(&mut self, x: &Var, xi: &Formula, r: usize, spec: &BlockSpec) -> Node {
        if *xi == Formula::False {
            return FALSE;
        }
        let mut parts = Vec::new();
        for block in &spec.blocks {
            parts.push(self.annulus(x, xi, r, spec, block));
        }
        let sizes: Vec<usize> = spec.blocks.iter().map(Vec::len).collect();
        let mut choice = vec![0usize; sizes.len()];
        loop {
            let mut terms = Vec::new();
            for (i, &h) in choice.iter().enumerate() {
                let local = self.scattered(x, xi, r, Some(&spec.blocks[i]), h + 1, spec);
                terms.push(self.not(local));
            }
            let total: usize = choice.iter().sum();
            terms.push(self.scattered(x, xi, r, None, total + 1, spec));
            parts.push(self.and(terms));
            if !advance(&mut choice, &sizes) {
                break;
            }
        }
        self.or(parts)
    }

    /// Negation of [`Self::gamma`], written with the exact number of
    /// scattered witnesses near each block so that it stays a short
    /// disjunction.
    fn no_far_witness(&mut self, x: &Var, xi: &Formula, r: usize, spec: &BlockSpec) -> Node {
        if *xi == Formula::False {
            return TRUE;
        }
        let mut empty_annuli = Vec::new();
        for block in &spec.blocks {
            let a = self.annulus(x, xi, r, spec, block);
            empty_annuli.push(self.not(a));
        }
        let sizes: Vec<usize> = spec.blocks.iter().map(Vec::len).collect();
        let mut choice = vec![0usize; sizes.len()];
        let mut parts = Vec::new();
        loop {
            let mut terms = empty_annuli.clone();
            for (i, &h) in choice.iter().enumerate() {
                let centers = &spec.blocks[i];
                if h < sizes[i] {
                    let more = self.scattered(x, xi, r, Some(centers), h + 1, spec);
                    terms.push(self.not(more));
                }
                if h > 0 {
                    terms.push(self.scattered(x, xi, r, Some(centers), h, spec));
                }
            }
            let total: usize = choice.iter().sum();
            let beyond = self.scattered(x, xi, r, None, total + 1, spec);
            terms.push(self.not(beyond));
            parts.push(self.and(terms));
            if !advance(&mut choice, &sizes) {
                break;
            }
        }
        self.or(parts)
    }

    /// Leaf for `count` distinct vertices satisfying `xi`, pairwise at
    /// avoiding distance above `2r`, all inside the `r`-neighborhood of
    /// `centers` when given.
    fn scattered(&mut self, x: &Var, xi: &Formula, r: usize, centers: Option<&Vec<Var>>, count: usize, spec: &BlockSpec) -> Node {
        let key = (xi.clone(), centers.cloned(), count, r);
        if let Some(f) = self.scattered_memo.get(&key) {
            let f = f.clone();
            return self.leaf(f);
        }
        let vars: Vec<Var> = (0..count).map(|_| self.fresh("_s")).collect();
        let mut parts = Vec::new();
        for (j, s) in vars.iter().enumerate() {
            parts.push(xi.rename_free(x, s));
            if let Some(c) = centers {
                parts.push(self.near(r, spec, c, s));
            }
            for t in &vars[j + 1..] {
                parts.push(Formula::not(Formula::Eq(s.clone(), t.clone())));
                parts.push(Formula::not(self.near(2 * r, spec, core::slice::from_ref(t), s)));
            }
        }
        let mut body = Formula::and_all(parts);
        for s in vars.iter().rev() {
            body = Formula::Exists(s.clone(), Box::new(body));
        }
        self.scattered_memo.insert(key, body.clone());
        self.leaf(body)
    }

    /// Disjunctive form over `tree` whose clauses map each key to a tree
    /// over the leaves with that key. Leaves keyed `None` join any clause
    /// part.
    fn dnf(
        &mut self,
        t: Node,
        key: &dyn Fn(&Self, usize) -> Option<usize>,
        memo: &mut BTreeMap<Node, Vec<Clause>>,
    ) -> Result<Vec<Clause>, RewriteError> {
        let mut single = Some(None);
        for l in self.support(t).iter() {
            match (single, key(self, l)) {
                (_, None) => {}
                (Some(None), Some(k)) => single = Some(Some(k)),
                (Some(Some(s)), Some(k)) if s == k => {}
                _ => {
                    single = None;
                    break;
                }
            }
        }
        if let Some(k) = single {
            return Ok(match t {
                FALSE => Vec::new(),
                TRUE => vec![Clause::new()],
                _ => vec![BTreeMap::from([(k.unwrap_or(0), t)])],
            });
        }
        if let Some(c) = memo.get(&t) {
            return Ok(c.clone());
        }
        let clauses = match self.shape(t).clone() {
            Shape::Not(inner) => match self.shape(inner).clone() {
                Shape::And(cs) => {
                    let negated = cs.into_iter().map(|c| self.not(c)).collect();
                    let n = self.or(negated);
                    self.dnf(n, key, memo)?
                }
                Shape::Or(cs) => {
                    let negated = cs.into_iter().map(|c| self.not(c)).collect();
                    let n = self.and(negated);
                    self.dnf(n, key, memo)?
                }
                _ => unreachable!("negated leaves have a single key"),
            },
            Shape::Or(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    out.extend(self.dnf(c, key, memo)?);
                }
                self.merge_clauses(out)
            }
            Shape::And(cs) => {
                let mut out = vec![Clause::new()];
                for c in cs {
                    let right = self.dnf(c, key, memo)?;
                    if out.len().saturating_mul(right.len()) > CLAUSE_LIMIT {
                        return Err(RewriteError::TooLarge { what: "clauses", limit: CLAUSE_LIMIT });
                    }
                    let mut next = Vec::new();
                    for a in &out {
                        for b in &right {
                            if let Some(c) = self.conjoin(a, b) {
                                next.push(c);
                            }
                        }
                    }
                    out = self.merge_clauses(next);
                }
                out
            }
            _ => unreachable!("leaves and constants have a single key"),
        };
        memo.insert(t, clauses.clone());
        Ok(clauses)
    }

    fn conjoin(&mut self, a: &Clause, b: &Clause) -> Option<Clause> {
        let mut out = a.clone();
        for (&k, &t) in b {
            let merged = match out.remove(&k) {
                Some(prev) => self.and(vec![prev, t]),
                None => t,
            };
            match merged {
                FALSE => return None,
                TRUE => {}
                m => {
                    out.insert(k, m);
                }
            }
        }
        Some(out)
    }

    /// Removes duplicates and joins clauses that differ in a single key,
    /// until no further join applies.
    fn merge_clauses(&mut self, clauses: Vec<Clause>) -> Vec<Clause> {
        let mut current: BTreeSet<Clause> = clauses.into_iter().collect();
        loop {
            let keys: BTreeSet<usize> = current.iter().flat_map(|c| c.keys().copied()).collect();
            let mut changed = false;
            for k in keys {
                let mut groups: BTreeMap<Clause, Vec<Option<Node>>> = BTreeMap::new();
                for c in &current {
                    let mut rest = c.clone();
                    let own = rest.remove(&k);
                    groups.entry(rest).or_default().push(own);
                }
                if groups.len() == current.len() {
                    continue;
                }
                changed = true;
                let mut next = BTreeSet::new();
                for (mut rest, owns) in groups {
                    if owns.iter().all(Option::is_some) {
                        let parts = owns.into_iter().flatten().collect();
                        match self.or(parts) {
                            TRUE => {}
                            n => {
                                rest.insert(k, n);
                            }
                        }
                    }
                    next.insert(rest);
                }
                current = next;
            }
            if !changed {
                return current.into_iter().collect();
            }
        }
    }

    fn to_clauses(&mut self, tree: Node, spec: &BlockSpec) -> Result<SeparatedExpression, RewriteError> {
        let key = |rw: &Self, l: usize| match spec.slot_of(&rw.leaves[l].1).ok().flatten() {
            Some(0) | None => None,
            Some(s) => Some(s),
        };
        let clauses = self
            .dnf(tree, &key, &mut BTreeMap::new())?
            .into_iter()
            .map(|clause| {
                let mut conjuncts: Vec<Conjunct> = clause
                    .into_iter()
                    .map(|(_, t)| {
                        let formula = self.to_formula(t);
                        let block = spec.slot_of(&formula.free_vars()).ok().flatten().and_then(|s| s.checked_sub(1));
                        Conjunct { block, formula }
                    })
                    .collect();
                if conjuncts.is_empty() {
                    conjuncts.push(Conjunct { block: None, formula: Formula::True });
                }
                conjuncts
            })
            .collect();
        Ok(SeparatedExpression { spec: spec.clone(), clauses })
    }
}

/// Map from key to a tree over the leaves with that key; absent keys are true.
type Clause = BTreeMap<usize, Node>;

fn canonical_atom(f: Formula) -> Formula {
    match f {
        Formula::Edge(a, b) if b < a => Formula::Edge(b, a),
        Formula::Eq(a, b) if b < a => Formula::Eq(b, a),
        Formula::Sim(a, b) if b < a => Formula::Sim(b, a),
        other => other,
    }
}

/// Next vector in the mixed-radix range `0..=sizes[i]`.
fn advance(choice: &mut [usize], sizes: &[usize]) -> bool {
    for i in 0..choice.len() {
        if choice[i] < sizes[i] {
            choice[i] += 1;
            return true;
        }
        choice[i] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::eval::eval;
    use crate::logic::separation::r_separates;
    use crate::logic::syntax::parse_formula;
    use alloc::string::ToString;
    use alloc::format;

    fn spec(x: &[&str], blocks: &[&[&str]]) -> BlockSpec {
        BlockSpec::new(
            x.iter().map(|s| (*s).into()).collect(),
            blocks.iter().map(|b| b.iter().map(|s| (*s).into()).collect()).collect(),
        )
    }

    fn path(names: &[&str]) -> LabeledGraph {
        let mut g = LabeledGraph::with_vertices(names).unwrap();
        for i in 1..names.len() {
            g.add_edge(i - 1, i).unwrap();
        }
        g
    }

    #[test]
    fn already_separated_is_kept() {
        let f = parse_formula("(and (edge x1 y1) (not (edge x1 y2)))").unwrap();
        let e = separated_expression(&f, &spec(&["x1"], &[&["y1"], &["y2"]]), 2).unwrap();
        assert!(e.is_structurally_separated());
        assert_eq!(e.clauses.len(), 1);
        let formulas: BTreeSet<String> = e.clauses[0].iter().map(|c| c.formula.to_string()).collect();
        assert!(formulas.contains("(edge x1 y1)"));
        assert!(formulas.contains("(not (edge x1 y2))"));
    }

    #[test]
    fn crossing_edge_goes_through_separator() {
        let f = parse_formula("(edge y1 y2)").unwrap();
        let e = separated_expression(&f, &spec(&["x"], &[&["y1"], &["y2"]]), 2).unwrap();
        assert!(e.is_structurally_separated());
        let g = path(&["a", "x", "b"]);
        let phi = e.to_formula();
        assert!(!eval(&g, &phi, &[("x", 1), ("y1", 0), ("y2", 2)]).unwrap());
        assert!(eval(&g, &phi, &[("x", 1), ("y1", 0), ("y2", 1)]).unwrap());
    }

    #[test]
    fn two_step_path_through_separator() {
        let f = parse_formula("(exists z (and (edge y1 z) (edge z y2)))").unwrap();
        let e = separated_expression(&f, &spec(&["x"], &[&["y1"], &["y2"]]), 2).unwrap();
        assert!(e.is_structurally_separated(), "{:?}", e.separation_violations());
        let g = path(&["a", "x", "b"]);
        let (a, x, b) = (0, 1, 2);
        assert!(r_separates(&g.gaifman_adjacency(), &[x], &[vec![a], vec![b]], 4));
        assert!(eval(&g, &e.to_formula(), &[("x", x), ("y1", a), ("y2", b)]).unwrap());
        let compiled = e.compile();
        assert!(compiled.on(&g).eval(&[("x", x), ("y1", a), ("y2", b)]).unwrap());
    }

    #[test]
    fn rank_cap_and_placement_errors() {
        let f = parse_formula("(exists a (exists b (exists c (edge a y1))))").unwrap();
        assert!(matches!(
            separated_expression(&f, &spec(&[], &[&["y1"]]), 2),
            Err(RewriteError::RankCap { .. })
        ));
        let g = parse_formula("(edge y1 w)").unwrap();
        assert_eq!(
            separated_expression(&g, &spec(&[], &[&["y1"]]), 2),
            Err(RewriteError::Unplaced("w".into()))
        );
    }

    fn all_graphs(n: usize) -> Vec<LabeledGraph> {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        (0..1u32 << pairs.len())
            .map(|mask| {
                let mut g = LabeledGraph::with_vertices(&names).unwrap();
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        g.add_edge(a, b).unwrap();
                    }
                }
                g
            })
            .collect()
    }

    fn check_equivalent(text: &str, x: &[&str], blocks: &[&[&str]]) -> usize {
        let f = parse_formula(text).unwrap();
        let s = spec(x, blocks);
        let e = separated_expression(&f, &s, 2).unwrap();
        assert!(e.is_structurally_separated(), "{:?}", e.separation_violations());
        let radius = 4usize.pow(f.quantifier_rank() as u32);
        let compiled = e.compile();
        let vars: Vec<&str> = x.iter().chain(blocks.iter().flat_map(|b| b.iter())).copied().collect();
        let mut checked = 0;
        for n in 1..=4 {
            for g in all_graphs(n) {
                let adj = g.gaifman_adjacency();
                let bound = compiled.on(&g);
                let direct = Program::compile(&f);
                let direct = direct.on(&g);
                let total = n.pow(vars.len() as u32);
                for code in 0..total {
                    let values: Vec<usize> = (0..vars.len()).map(|i| code / n.pow(i as u32) % n).collect();
                    let sep: Vec<usize> = values[..x.len()].to_vec();
                    let mut offset = x.len();
                    let parts: Vec<Vec<usize>> = blocks
                        .iter()
                        .map(|b| {
                            let p = values[offset..offset + b.len()].to_vec();
                            offset += b.len();
                            p
                        })
                        .collect();
                    if !r_separates(&adj, &sep, &parts, radius) {
                        continue;
                    }
                    let assignment: Vec<(&str, usize)> = vars.iter().copied().zip(values.iter().copied()).collect();
                    assert_eq!(
                        direct.eval(&assignment).unwrap(),
                        bound.eval(&assignment).unwrap(),
                        "{text} on {:?} at {:?}",
                        g.named_edges(),
                        assignment
                    );
                    checked += 1;
                }
            }
        }
        checked
    }

    #[test]
    fn equivalent_on_small_graphs_rank_one() {
        for text in [
            "(exists z (and (edge y1 z) (edge z y2)))",
            "(forall z (or (edge y1 z) (edge y2 z) (= z x)))",
            "(exists z (and (not (edge z y1)) (not (edge z y2)) (not (= z x))))",
            "(or (edge y1 y2) (= y1 y2) (exists z (and (edge z x) (not (edge z y1)))))",
        ] {
            assert!(check_equivalent(text, &["x"], &[&["y1"], &["y2"]]) > 0);
        }
        assert!(check_equivalent("(exists z (and (edge y1 z) (not (= z y2))))", &[], &[&["y1"], &["y2"]]) > 0);
    }

    #[test]
    fn equivalent_on_small_graphs_rank_two() {
        for text in [
            "(exists z (exists w (and (edge y1 z) (edge z w) (edge w y2))))",
            "(exists z (and (edge z x) (forall w (or (not (edge w z)) (= w x) (edge w y1)))))",
            "(exists z (exists w (and (edge z w) (not (edge z y1)) (not (edge w y2)))))",
            "(forall z (or (= z x) (exists w (and (edge z w) (not (= w y1))))))",
            "(forall z (or (edge z y1) (edge z y2) (forall w (or (= w z) (edge w z)))))",
            "(exists z (and (edge z y1) (forall w (or (not (edge w z)) (edge w y2) (= w x)))))",
        ] {
            assert!(check_equivalent(text, &["x"], &[&["y1"], &["y2"]]) > 0);
        }
    }

    #[test]
    fn oversized_universal_is_reported() {
        let f = parse_formula("(forall z (implies (edge z y1) (exists w (and (edge w z) (not (edge w y2))))))").unwrap();
        let e = separated_expression(&f, &spec(&["x"], &[&["y1"], &["y2"]]), 2);
        assert!(matches!(e, Err(RewriteError::TooLarge { .. })));
    }
}
