//! Büchi automata for LTL bodies.
//!
//! [`ltl_to_gba`] produces a state-labeled generalized automaton, which
//! [`degeneralize`] turns into an edge-labeled automaton with a single initial
//! state and state-based acceptance. An edge `(q, L, q')` is taken while reading
//! a position whose atom valuation satisfies every literal in `L`.

mod lasso;
mod tableau;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

pub use lasso::{accepts_lasso, LassoEvaluator};
pub use tableau::ltl_to_gba;

use crate::formula::{AtomTable, LtlExpr};

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: usize,
    pub positive: bool,
}

impl Literal {
    pub fn holds(&self, valuation: &[bool]) -> bool {
        valuation[self.atom] == self.positive
    }
}

/// Conjunction of literals; empty means `true`.
pub type Label = Vec<Literal>;

pub fn label_holds(label: &[Literal], valuation: &[bool]) -> bool {
    label.iter().all(|l| l.holds(valuation))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedBuchi {
    /// Literals that must hold while in each state.
    pub labels: Vec<Label>,
    pub initial: Vec<StateId>,
    /// `(source, label of target, target)`.
    pub edges: Vec<(StateId, Label, StateId)>,
    /// One set per eventuality subformula.
    pub acceptance: Vec<BTreeSet<StateId>>,
}

impl GeneralizedBuchi {
    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    /// Lasso acceptance by SCC analysis of the product with the word positions.
    /// Independent of degeneralization; used to cross-check it.
    pub fn accepts_lasso(&self, prefix: &[Vec<bool>], cycle: &[Vec<bool>]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let len = prefix.len() + cycle.len();
        let letter = |i: usize| if i < prefix.len() { &prefix[i] } else { &cycle[i - prefix.len()] };
        let succ_pos = |i: usize| if i + 1 < len { i + 1 } else { prefix.len() };
        let n = self.state_count();
        let mut adj = vec![Vec::new(); n];
        for (s, _, t) in &self.edges {
            adj[*s].push(*t);
        }
        // node (q, i): automaton is in q reading position i
        let id = |q: usize, i: usize| q * len + i;
        let total = n * len;
        let mut graph = vec![Vec::new(); total];
        let mut reach = vec![false; total];
        let mut queue = VecDeque::new();
        for &q in &self.initial {
            if label_holds(&self.labels[q], letter(0)) && !reach[id(q, 0)] {
                reach[id(q, 0)] = true;
                queue.push_back((q, 0));
            }
        }
        while let Some((q, i)) = queue.pop_front() {
            let j = succ_pos(i);
            for &r in &adj[q] {
                if label_holds(&self.labels[r], letter(j)) {
                    graph[id(q, i)].push(id(r, j));
                    if !reach[id(r, j)] {
                        reach[id(r, j)] = true;
                        queue.push_back((r, j));
                    }
                }
            }
        }
        let sccs = crate::scc::tarjan(total, |v| graph[v].iter().copied(), |v| reach[v]);
        sccs.iter().any(|comp| {
            let nontrivial = comp.len() > 1 || graph[comp[0]].contains(&comp[0]);
            nontrivial
                && self
                    .acceptance
                    .iter()
                    .all(|set| comp.iter().any(|&v| set.contains(&(v / len))))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BuchiAutomaton {
    pub initial: StateId,
    /// Outgoing edges per state, in deterministic order.
    pub edges: Vec<Vec<(Label, StateId)>>,
    pub accepting: Vec<bool>,
}

impl BuchiAutomaton {
    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Drops states that cannot reach an accepting cycle, then renumbers the
    /// rest in BFS order from the initial state. The language is unchanged.
    /// An empty language leaves one non-accepting state without edges.
    pub fn trim(&self) -> BuchiAutomaton {
        let n = self.state_count();
        let adj = |q: usize| self.edges[q].iter().map(|e| e.1);
        let mut live = vec![false; n];
        for comp in crate::scc::tarjan(n, adj, |_| true) {
            let cyclic = comp.len() > 1 || self.edges[comp[0]].iter().any(|e| e.1 == comp[0]);
            if cyclic && comp.iter().any(|&q| self.accepting[q]) {
                for &q in &comp {
                    live[q] = true;
                }
            }
        }
        // backward closure
        let mut rev = vec![Vec::new(); n];
        for q in 0..n {
            for (_, r) in &self.edges[q] {
                rev[*r].push(q);
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
        while let Some(q) = stack.pop() {
            for &p in &rev[q] {
                if !live[p] {
                    live[p] = true;
                    stack.push(p);
                }
            }
        }
        if !live[self.initial] {
            return BuchiAutomaton {
                initial: 0,
                edges: vec![Vec::new()],
                accepting: vec![false],
            };
        }
        let mut id = vec![usize::MAX; n];
        let mut order = vec![self.initial];
        id[self.initial] = 0;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for (_, r) in &self.edges[q] {
                if live[*r] && id[*r] == usize::MAX {
                    id[*r] = order.len();
                    order.push(*r);
                }
            }
        }
        BuchiAutomaton {
            initial: 0,
            edges: order
                .iter()
                .map(|&q| {
                    self.edges[q]
                        .iter()
                        .filter(|e| live[e.1])
                        .map(|(l, r)| (l.clone(), id[*r]))
                        .collect()
                })
                .collect(),
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
        }
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q]
    }

    /// Line-based dump: `states`, `initial`, `accepting`, then one `edge` per line.
    pub fn dump(&self, atoms: &AtomTable) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states {}", self.state_count());
        let _ = writeln!(out, "initial {}", self.initial);
        let acc: Vec<String> = (0..self.state_count())
            .filter(|&q| self.accepting[q])
            .map(|q| q.to_string())
            .collect();
        let _ = writeln!(out, "accepting {}", acc.join(" "));
        for (q, edges) in self.edges.iter().enumerate() {
            for (label, r) in edges {
                let lits: Vec<String> = label
                    .iter()
                    .map(|l| {
                        let a = atoms.get(l.atom);
                        if l.positive {
                            format!("{a}")
                        } else {
                            format!("!{a}")
                        }
                    })
                    .collect();
                let text = if lits.is_empty() { "true".to_string() } else { lits.join(" && ") };
                let _ = writeln!(out, "edge {q} -> {r} : {text}");
            }
        }
        out
    }
}

/// Counter construction. State `(q, i)` waits for acceptance set `i`; the
/// counter advances when leaving a state of set `i`. Accepting states are
/// `(q, 0)` with `q` in set 0. State 0 of the result is a fresh initial state.
pub fn degeneralize(g: &GeneralizedBuchi) -> BuchiAutomaton {
    let m = g.acceptance.len();
    let accepting_key = |(q, i): (StateId, usize)| m == 0 || (i == 0 && g.acceptance[0].contains(&q));
    let mut adj: Vec<Vec<(Label, StateId)>> = vec![Vec::new(); g.state_count()];
    for (s, l, t) in &g.edges {
        adj[*s].push((l.clone(), *t));
    }

    let mut edges: Vec<Vec<(Label, StateId)>> = vec![Vec::new()];
    let mut accepting = vec![m == 0];
    let mut keys: Vec<(StateId, usize)> = vec![(usize::MAX, 0)];
    let mut ids: HashMap<(StateId, usize), StateId> = HashMap::new();
    let mut queue: VecDeque<StateId> = VecDeque::new();
    let mut intern = |key: (StateId, usize),
                      edges: &mut Vec<Vec<(Label, StateId)>>,
                      accepting: &mut Vec<bool>,
                      keys: &mut Vec<(StateId, usize)>,
                      queue: &mut VecDeque<StateId>| {
        *ids.entry(key).or_insert_with(|| {
            let id = edges.len();
            edges.push(Vec::new());
            accepting.push(accepting_key(key));
            keys.push(key);
            queue.push_back(id);
            id
        })
    };

    for &q in &g.initial {
        let id = intern((q, 0), &mut edges, &mut accepting, &mut keys, &mut queue);
        edges[0].push((g.labels[q].clone(), id));
    }
    while let Some(src) = queue.pop_front() {
        let (q, i) = keys[src];
        let j = if m > 0 && g.acceptance[i].contains(&q) { (i + 1) % m } else { i };
        for (label, r) in &adj[q] {
            let dst = intern((*r, j), &mut edges, &mut accepting, &mut keys, &mut queue);
            edges[src].push((label.clone(), dst));
        }
    }
    BuchiAutomaton {
        initial: 0,
        edges,
        accepting,
    }
}

/// Tableau, degeneralization and [`BuchiAutomaton::trim`].
pub fn build(body: &LtlExpr, atoms: &mut AtomTable) -> BuchiAutomaton {
    degeneralize(&ltl_to_gba(body, atoms)).trim()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{to_nnf, Atom};

    fn p() -> LtlExpr {
        LtlExpr::atom(Atom::enabled("x", "p"))
    }
    fn q() -> LtlExpr {
        LtlExpr::atom(Atom::enabled("x", "q"))
    }

    fn table() -> AtomTable {
        let mut t = AtomTable::new();
        t.intern(&Atom::enabled("x", "p"));
        t.intern(&Atom::enabled("x", "q"));
        t
    }

    fn w(bits: &[(bool, bool)]) -> Vec<Vec<bool>> {
        bits.iter().map(|&(a, b)| vec![a, b]).collect()
    }

    #[test]
    fn true_is_one_state_accepting_everything() {
        let mut t = table();
        let g = ltl_to_gba(&LtlExpr::tt(), &mut t);
        assert_eq!(g.state_count(), 1);
        let ba = degeneralize(&g);
        assert!(accepts_lasso(&ba, &[], &w(&[(false, false)])));
        assert!(accepts_lasso(&ba, &w(&[(true, true)]), &w(&[(false, true)])));
    }

    #[test]
    fn false_has_empty_language() {
        let mut t = table();
        let ba = build(&LtlExpr::ff(), &mut t);
        assert_eq!(ba.state_count(), 1);
        assert_eq!(ba.edge_count(), 0);
        for a in [false, true] {
            for b in [false, true] {
                assert!(!accepts_lasso(&ba, &[], &w(&[(a, b)])));
            }
        }
    }

    #[test]
    fn finally() {
        let mut t = table();
        let ba = build(&LtlExpr::finally(p()), &mut t);
        assert!(accepts_lasso(&ba, &[], &w(&[(true, false)])));
        assert!(!accepts_lasso(&ba, &[], &w(&[(false, false)])));
        assert!(accepts_lasso(&ba, &w(&[(false, false), (true, false)]), &w(&[(false, true)])));
    }

    #[test]
    fn until() {
        let mut t = table();
        let ba = build(&LtlExpr::until(p(), q()), &mut t);
        // (p, !q) (q) (anything)^ω
        assert!(accepts_lasso(
            &ba,
            &w(&[(true, false), (false, true)]),
            &w(&[(false, false)])
        ));
        // (!p, !q) ...
        assert!(!accepts_lasso(&ba, &w(&[(false, false)]), &w(&[(true, true)])));
        // p forever without q
        assert!(!accepts_lasso(&ba, &[], &w(&[(true, false)])));
    }

    #[test]
    fn response_on_alternating_word() {
        let mut t = table();
        // G (p -> F q) = G (!p || F q)
        let body = LtlExpr::globally(LtlExpr::or(LtlExpr::not(p()), LtlExpr::finally(q())));
        let ba = build(&body, &mut t);
        assert!(accepts_lasso(&ba, &[], &w(&[(true, false), (false, true)])));
        assert!(!accepts_lasso(&ba, &w(&[(false, true)]), &w(&[(true, false)])));
    }

    #[test]
    fn conjunction_of_eventualities() {
        let mut t = table();
        let body = LtlExpr::and(LtlExpr::finally(p()), LtlExpr::finally(q()));
        let g = ltl_to_gba(&body, &mut t);
        assert_eq!(g.acceptance.len(), 2);
        let ba = degeneralize(&g);
        assert!(ba.state_count() <= 1 + g.state_count() * (g.acceptance.len() + 1));
        assert!(accepts_lasso(&ba, &w(&[(true, true)]), &w(&[(false, false)])));
        assert!(accepts_lasso(&ba, &w(&[(true, false)]), &w(&[(false, true)])));
        assert!(accepts_lasso(&ba, &w(&[(false, true), (false, false)]), &w(&[(true, false)])));
        assert!(!accepts_lasso(&ba, &w(&[(true, false)]), &w(&[(true, false)])));
    }

    #[test]
    fn zero_and_one_acceptance_sets() {
        let mut t = table();
        let g = ltl_to_gba(&LtlExpr::globally(p()), &mut t);
        assert!(g.acceptance.is_empty());
        let ba = degeneralize(&g);
        assert!(ba.accepting.iter().all(|&a| a));

        let g = ltl_to_gba(&LtlExpr::finally(p()), &mut t);
        assert_eq!(g.acceptance.len(), 1);
        let ba = degeneralize(&g);
        // initial state plus one copy of every GBA state
        assert_eq!(ba.state_count(), g.state_count() + 1);
        let accepting = ba.accepting.iter().filter(|&&a| a).count();
        assert_eq!(accepting, g.acceptance[0].len());
    }

    #[test]
    fn trim_keeps_language() {
        let mut t = table();
        let body = LtlExpr::or(
            LtlExpr::until(p(), LtlExpr::and(q(), LtlExpr::not(q()))),
            LtlExpr::globally(LtlExpr::finally(q())),
        );
        let raw = degeneralize(&ltl_to_gba(&body, &mut t));
        let trimmed = raw.trim();
        assert!(trimmed.state_count() <= raw.state_count());
        let words = crate::words::LassoWords::up_to(2, 4);
        for wd in &words.words {
            let (pre, cyc) = wd.valuations(2);
            assert_eq!(accepts_lasso(&raw, &pre, &cyc), accepts_lasso(&trimmed, &pre, &cyc));
        }
    }

    #[test]
    fn labels_are_consistent() {
        let mut t = table();
        let body = to_nnf(&LtlExpr::and(
            LtlExpr::until(p(), LtlExpr::not(p())),
            LtlExpr::globally(LtlExpr::or(q(), LtlExpr::not(p()))),
        ));
        let g = ltl_to_gba(&body, &mut t);
        for l in &g.labels {
            for a in l {
                assert!(!l.contains(&Literal { atom: a.atom, positive: !a.positive }));
            }
        }
    }

    #[test]
    fn dump_lists_every_edge() {
        let mut t = table();
        let ba = build(&LtlExpr::finally(p()), &mut t);
        let text = ba.dump(&t);
        assert!(text.starts_with(&format!("states {}\n", ba.state_count())));
        assert_eq!(text.lines().filter(|l| l.starts_with("edge ")).count(), ba.edge_count());
    }
}
