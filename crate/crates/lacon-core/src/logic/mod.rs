//! First-order logic over labeled graphs: syntax, evaluation, types,
//! separation, and the rewriting of formulas into separated expressions.

mod bdd;
pub mod determination;
pub mod eval;
pub mod formula;
pub mod rewrite;
pub mod separation;
pub mod syntax;
pub mod types;

pub use eval::{eval, eval_named, interpret, EvalError, Program};
pub use formula::{Formula, Var};
pub use syntax::{parse_formula, SyntaxError};
pub use types::{RankType, TypeId, TypeTable};
pub use rewrite::{separated_expression, BlockSpec, Conjunct, RewriteError, SeparatedExpression};
pub use determination::{check_determination, DeterminationError, Instance};
