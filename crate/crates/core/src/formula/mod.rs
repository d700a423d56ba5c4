//! Alternation-free HyperLTL: syntax, parsing, normal forms and atom evaluation.

mod ast;
mod atoms;
mod nnf;
mod parser;

pub use ast::{Atom, Cmp, HyperQuery, LinearConstraint, LtlExpr, Quantifier, Term};
pub use atoms::{eval_atom, AtomTable, ResolveError, ResolvedAtom};
pub use nnf::{is_nnf, negate_query, to_nnf};
pub use parser::{parse_query, QueryError};
