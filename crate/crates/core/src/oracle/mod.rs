//! Brute-force reference implementations. Nothing here uses the automaton
//! construction or the search engine.

mod lasso;
mod paths;
mod product;

pub use lasso::{eval_ltl_lasso, eval_positions, MaskTables, Shape};
pub use paths::{enumerate_loop_free_paths, max_edge_disjoint_paths};
pub use product::{brute_force_check, eval_on_marking_lasso, exists_traces, OracleError, OracleVerdict};
