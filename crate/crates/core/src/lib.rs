//! Explicit-state model checking of alternation-free HyperLTL on place/transition Petri nets.

pub mod buchi;
pub mod cli;
pub mod checker;
pub mod lp;
pub mod formula;
pub mod net;
pub mod scc;
pub mod words;
pub mod oracle;
pub mod encodings;
pub mod io;
