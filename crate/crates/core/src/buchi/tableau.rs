//! On-the-fly tableau construction (Gerth, Peled, Vardi, Wolper) from an NNF
//! body to a generalized Büchi automaton.

use std::collections::{BTreeSet, HashMap};

use super::{GeneralizedBuchi, Label, Literal};
use crate::formula::{is_nnf, to_nnf, AtomTable, LtlExpr};

type F = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Lit(Literal),
    And(F, F),
    Or(F, F),
    Next(F),
    Until(F, F),
    Release(F, F),
    Finally(F),
    Globally(F),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, F>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> F {
        if let Some(&f) = self.index.get(&n) {
            return f;
        }
        let f = self.nodes.len();
        self.nodes.push(n.clone());
        self.index.insert(n, f);
        f
    }

    fn tt(&mut self) -> F {
        self.intern(Node::True)
    }

    fn ff(&mut self) -> F {
        self.intern(Node::False)
    }

    fn is(&self, f: F, n: &Node) -> bool {
        self.nodes[f] == *n
    }

    // Syntactic simplification happens at construction time.
    fn and(&mut self, a: F, b: F) -> F {
        if a == b || self.is(b, &Node::True) {
            return a;
        }
        if self.is(a, &Node::True) {
            return b;
        }
        if self.is(a, &Node::False) || self.is(b, &Node::False) {
            return self.ff();
        }
        self.intern(Node::And(a, b))
    }

    fn or(&mut self, a: F, b: F) -> F {
        if a == b || self.is(b, &Node::False) {
            return a;
        }
        if self.is(a, &Node::False) {
            return b;
        }
        if self.is(a, &Node::True) || self.is(b, &Node::True) {
            return self.tt();
        }
        self.intern(Node::Or(a, b))
    }

    fn build(&mut self, e: &LtlExpr, atoms: &mut AtomTable) -> F {
        if let Some(v) = e.as_constant() {
            return if v { self.tt() } else { self.ff() };
        }
        match e {
            LtlExpr::Atom(a) => {
                let atom = atoms.intern(a);
                self.intern(Node::Lit(Literal { atom, positive: true }))
            }
            LtlExpr::Not(inner) => match &**inner {
                LtlExpr::Atom(a) => {
                    let atom = atoms.intern(a);
                    self.intern(Node::Lit(Literal { atom, positive: false }))
                }
                _ => unreachable!("body is in negation normal form"),
            },
            LtlExpr::And(a, b) => {
                let (a, b) = (self.build(a, atoms), self.build(b, atoms));
                self.and(a, b)
            }
            LtlExpr::Or(a, b) => {
                let (a, b) = (self.build(a, atoms), self.build(b, atoms));
                self.or(a, b)
            }
            LtlExpr::Next(a) => {
                let a = self.build(a, atoms);
                match self.nodes[a] {
                    Node::True | Node::False => a,
                    _ => self.intern(Node::Next(a)),
                }
            }
            LtlExpr::Finally(a) => {
                let a = self.build(a, atoms);
                match self.nodes[a] {
                    Node::True | Node::False | Node::Finally(_) => a,
                    _ => self.intern(Node::Finally(a)),
                }
            }
            LtlExpr::Globally(a) => {
                let a = self.build(a, atoms);
                match self.nodes[a] {
                    Node::True | Node::False | Node::Globally(_) => a,
                    _ => self.intern(Node::Globally(a)),
                }
            }
            LtlExpr::Until(a, b) => {
                let (a, b) = (self.build(a, atoms), self.build(b, atoms));
                if self.is(b, &Node::True) || self.is(b, &Node::False) || self.is(a, &Node::False) {
                    b
                } else if self.is(a, &Node::True) {
                    self.intern(Node::Finally(b))
                } else {
                    self.intern(Node::Until(a, b))
                }
            }
            LtlExpr::Release(a, b) => {
                let (a, b) = (self.build(a, atoms), self.build(b, atoms));
                if self.is(b, &Node::True) || self.is(b, &Node::False) || self.is(a, &Node::True) {
                    b
                } else if self.is(a, &Node::False) {
                    self.intern(Node::Globally(b))
                } else {
                    self.intern(Node::Release(a, b))
                }
            }
        }
    }
}

const INIT: usize = usize::MAX;

#[derive(Clone)]
struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<F>,
    old: BTreeSet<F>,
    next: BTreeSet<F>,
}

struct Finished {
    incoming: BTreeSet<usize>,
    old: BTreeSet<F>,
}

/// Builds a generalized Büchi automaton for `body`. The body is brought into
/// negation normal form first if necessary; atoms are interned into `atoms`.
pub fn ltl_to_gba(body: &LtlExpr, atoms: &mut AtomTable) -> GeneralizedBuchi {
    let nnf;
    let body = if is_nnf(body) {
        body
    } else {
        nnf = to_nnf(body);
        &nnf
    };
    let mut arena = Arena::default();
    let root = arena.build(body, atoms);

    let mut finished: Vec<Finished> = Vec::new();
    let mut by_key: HashMap<(BTreeSet<F>, BTreeSet<F>), usize> = HashMap::new();
    let mut stack = vec![Pending {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];

    while let Some(mut n) = stack.pop() {
        let Some(eta) = n.new.pop_first() else {
            let key = (n.old.clone(), n.next.clone());
            if let Some(&i) = by_key.get(&key) {
                finished[i].incoming.extend(n.incoming);
                continue;
            }
            let i = finished.len();
            by_key.insert(key, i);
            stack.push(Pending {
                incoming: BTreeSet::from([i]),
                new: n.next.clone(),
                old: BTreeSet::new(),
                next: BTreeSet::new(),
            });
            finished.push(Finished {
                incoming: n.incoming,
                old: n.old,
            });
            continue;
        };
        if n.old.contains(&eta) {
            stack.push(n);
            continue;
        }
        let add_new = |n: &mut Pending, f: F| {
            if !n.old.contains(&f) {
                n.new.insert(f);
            }
        };
        match arena.nodes[eta].clone() {
            Node::False => {}
            // not recorded in `old`, so `true` successors merge with their parent
            Node::True => stack.push(n),
            Node::Lit(l) => {
                let neg = Node::Lit(Literal {
                    atom: l.atom,
                    positive: !l.positive,
                });
                let clash = arena.index.get(&neg).is_some_and(|f| n.old.contains(f));
                if !clash {
                    n.old.insert(eta);
                    stack.push(n);
                }
            }
            Node::And(a, b) => {
                add_new(&mut n, a);
                add_new(&mut n, b);
                n.old.insert(eta);
                stack.push(n);
            }
            Node::Next(a) => {
                n.old.insert(eta);
                n.next.insert(a);
                stack.push(n);
            }
            Node::Globally(a) => {
                add_new(&mut n, a);
                n.old.insert(eta);
                n.next.insert(eta);
                stack.push(n);
            }
            Node::Or(a, b) => {
                n.old.insert(eta);
                let mut n2 = n.clone();
                add_new(&mut n, a);
                add_new(&mut n2, b);
                stack.push(n2);
                stack.push(n);
            }
            Node::Until(a, b) => {
                n.old.insert(eta);
                let mut n2 = n.clone();
                add_new(&mut n, a);
                n.next.insert(eta);
                add_new(&mut n2, b);
                stack.push(n2);
                stack.push(n);
            }
            Node::Finally(a) => {
                n.old.insert(eta);
                let mut n2 = n.clone();
                n.next.insert(eta);
                add_new(&mut n2, a);
                stack.push(n2);
                stack.push(n);
            }
            Node::Release(a, b) => {
                n.old.insert(eta);
                let mut n2 = n.clone();
                add_new(&mut n, b);
                n.next.insert(eta);
                add_new(&mut n2, a);
                add_new(&mut n2, b);
                stack.push(n2);
                stack.push(n);
            }
        }
    }

    let labels: Vec<Label> = finished
        .iter()
        .map(|f| {
            let mut lits: Vec<Literal> = f
                .old
                .iter()
                .filter_map(|&g| match arena.nodes[g] {
                    Node::Lit(l) => Some(l),
                    _ => None,
                })
                .collect();
            lits.sort();
            lits
        })
        .collect();
    let initial = (0..finished.len())
        .filter(|&i| finished[i].incoming.contains(&INIT))
        .collect();
    let mut edges = Vec::new();
    for (j, f) in finished.iter().enumerate() {
        for &i in f.incoming.iter().filter(|&&i| i != INIT) {
            edges.push((i, j));
        }
    }
    edges.sort_unstable();
    let edges = edges
        .into_iter()
        .map(|(i, j)| (i, labels[j].clone(), j))
        .collect();

    // one acceptance set per eventuality: a U b, F b
    let acceptance = (0..arena.nodes.len())
        .filter_map(|g| match arena.nodes[g] {
            Node::Until(_, b) | Node::Finally(b) => Some((g, b)),
            _ => None,
        })
        .map(|(g, b)| {
            (0..finished.len())
                .filter(|&i| !finished[i].old.contains(&g) || finished[i].old.contains(&b))
                .collect()
        })
        .collect();

    GeneralizedBuchi {
        labels,
        initial,
        edges,
        acceptance,
    }
}
