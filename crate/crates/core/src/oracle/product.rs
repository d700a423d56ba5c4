//! Explicit product of the marking-tuple system with a next-variable tableau.
//!
//! Every temporal subformula θ gets a boolean "next" variable holding the
//! truth of θ one position later. Truth at the current position follows from
//! the expansion laws, e.g. `a U b = b ∨ (a ∧ next)`. One fairness set per
//! U, F, G and R rules out the non-least or non-greatest solutions. Negation
//! is evaluated directly, so bodies need not be in negation normal form.

use std::collections::HashMap;

use thiserror::Error;

use super::lasso::{eval_positions, Shape};
use crate::formula::{AtomTable, HyperQuery, LtlExpr, Quantifier, ResolveError, ResolvedAtom};
use crate::net::{Marking, Net, NetError};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle state cap of {0} marking tuples exceeded")]
    CapExceeded(usize),
    #[error("more than 20 temporal subformulas")]
    TooManyTemporal,
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleVerdict {
    pub satisfied: bool,
    pub tuple_states: usize,
}

#[derive(Debug)]
enum Ox {
    Atom(usize),
    Not(Box<Ox>),
    And(Box<Ox>, Box<Ox>),
    Or(Box<Ox>, Box<Ox>),
    Next(usize, Box<Ox>),
    Until(usize, Box<Ox>, Box<Ox>),
    Release(usize, Box<Ox>, Box<Ox>),
}

struct Compiled {
    root: Ox,
    atoms: Vec<ResolvedAtom>,
    temporal: usize,
}

fn compile(e: &LtlExpr, table: &mut AtomTable, temporal: &mut usize) -> Ox {
    let mut fresh = || {
        *temporal += 1;
        *temporal - 1
    };
    match e {
        LtlExpr::Atom(a) => Ox::Atom(table.intern(a)),
        LtlExpr::Not(a) => Ox::Not(Box::new(compile(a, table, temporal))),
        LtlExpr::And(a, b) => Ox::And(Box::new(compile(a, table, temporal)), Box::new(compile(b, table, temporal))),
        LtlExpr::Or(a, b) => Ox::Or(Box::new(compile(a, table, temporal)), Box::new(compile(b, table, temporal))),
        LtlExpr::Next(a) => {
            let v = fresh();
            Ox::Next(v, Box::new(compile(a, table, temporal)))
        }
        // F a = true U a, G a = false R a
        LtlExpr::Finally(a) => {
            let v = fresh();
            Ox::Until(v, Box::new(Ox::Not(Box::new(Ox::Atom(usize::MAX)))), Box::new(compile(a, table, temporal)))
        }
        LtlExpr::Globally(a) => {
            let v = fresh();
            Ox::Release(v, Box::new(Ox::Atom(usize::MAX)), Box::new(compile(a, table, temporal)))
        }
        LtlExpr::Until(a, b) => {
            let v = fresh();
            Ox::Until(v, Box::new(compile(a, table, temporal)), Box::new(compile(b, table, temporal)))
        }
        LtlExpr::Release(a, b) => {
            let v = fresh();
            Ox::Release(v, Box::new(compile(a, table, temporal)), Box::new(compile(b, table, temporal)))
        }
    }
}

/// Per (marking tuple, next assignment): the value each next variable must
/// have had one step earlier, the truth of the root, and the fairness sets
/// the pair belongs to.
struct Eval {
    truth: u32,
    root: bool,
    fair: u32,
}

// Atom index usize::MAX is the constant false.
fn eval(o: &Ox, vals: &[bool], next: u32, out: &mut Eval) -> bool {
    let atom = |i: usize| i != usize::MAX && vals[i];
    match o {
        Ox::Atom(i) => atom(*i),
        Ox::Not(a) => !eval(a, vals, next, out),
        Ox::And(a, b) => {
            let x = eval(a, vals, next, out);
            let y = eval(b, vals, next, out);
            x && y
        }
        Ox::Or(a, b) => {
            let x = eval(a, vals, next, out);
            let y = eval(b, vals, next, out);
            x || y
        }
        // the variable of X a carries a, not X a
        Ox::Next(v, a) => {
            let x = eval(a, vals, next, out);
            out.truth |= (x as u32) << v;
            out.fair |= 1 << v;
            next >> v & 1 == 1
        }
        Ox::Until(v, a, b) => {
            let x = eval(a, vals, next, out);
            let y = eval(b, vals, next, out);
            let t = y || (x && next >> v & 1 == 1);
            out.truth |= (t as u32) << v;
            if !t || y {
                out.fair |= 1 << v;
            }
            t
        }
        Ox::Release(v, a, b) => {
            let x = eval(a, vals, next, out);
            let y = eval(b, vals, next, out);
            let t = y && (x || next >> v & 1 == 1);
            out.truth |= (t as u32) << v;
            if t || !y {
                out.fair |= 1 << v;
            }
            t
        }
    }
}

/// Whether some tuple of traces satisfies `body`; that is, the verdict of
/// `∃ vars : body`.
pub fn exists_traces(net: &Net, vars: &[String], body: &LtlExpr, cap: usize) -> Result<OracleVerdict, OracleError> {
    let mut table = AtomTable::new();
    let mut temporal = 0;
    let root = compile(body, &mut table, &mut temporal);
    if temporal > 20 {
        return Err(OracleError::TooManyTemporal);
    }
    let c = Compiled {
        root,
        atoms: table
            .iter()
            .map(|a| ResolvedAtom::resolve(a, net, vars))
            .collect::<Result<_, _>>()?,
        temporal,
    };
    let k = vars.len();
    let assignments = 1usize << c.temporal;

    // marking-tuple graph
    let mut succ_cache: HashMap<Marking, Vec<Marking>> = HashMap::new();
    let mut index: HashMap<Vec<Marking>, usize> = HashMap::new();
    let mut tuples: Vec<Vec<Marking>> = Vec::new();
    let mut tuple_succ: Vec<Vec<usize>> = Vec::new();
    let init = vec![net.initial_marking().clone(); k];
    index.insert(init.clone(), 0);
    tuples.push(init);
    let mut head = 0;
    while head < tuples.len() {
        let t = tuples[head].clone();
        head += 1;
        let mut options: Vec<Vec<Marking>> = Vec::with_capacity(k);
        for m in &t {
            if !succ_cache.contains_key(m) {
                let s = net.successors(m)?.into_iter().map(|(_, m)| m).collect();
                succ_cache.insert(m.clone(), s);
            }
            options.push(succ_cache[m].clone());
        }
        let mut out = Vec::new();
        let mut pick = vec![0usize; k];
        'cart: loop {
            let next: Vec<Marking> = (0..k).map(|i| options[i][pick[i]].clone()).collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if tuples.len() >= cap {
                        return Err(OracleError::CapExceeded(cap));
                    }
                    let id = tuples.len();
                    index.insert(next.clone(), id);
                    tuples.push(next);
                    id
                }
            };
            out.push(id);
            for i in (0..k).rev() {
                pick[i] += 1;
                if pick[i] < options[i].len() {
                    continue 'cart;
                }
                pick[i] = 0;
            }
            break;
        }
        out.sort_unstable();
        out.dedup();
        tuple_succ.push(out);
    }

    // per tuple and assignment
    let evals: Vec<Vec<Eval>> = tuples
        .iter()
        .map(|t| {
            let vals: Vec<bool> = c.atoms.iter().map(|a| a.eval(net, t)).collect();
            (0..assignments as u32)
                .map(|next| {
                    let mut e = Eval {
                        truth: 0,
                        root: false,
                        fair: 0,
                    };
                    e.root = eval(&c.root, &vals, next, &mut e);
                    e
                })
                .collect()
        })
        .collect();
    // fairness sets exist only for U/R nodes; X nodes always count as visited
    let all_fair: u32 = (1u32 << c.temporal) - 1;

    let node = |t: usize, v: usize| t * assignments + v;
    let successors = |n: usize| {
        let (t, v) = (n / assignments, n % assignments);
        let evals = &evals;
        tuple_succ[t].iter().flat_map(move |&t2| {
            (0..assignments)
                .filter(move |&v2| evals[t2][v2].truth as usize == v)
                .map(move |v2| node(t2, v2))
        })
    };
    let total = tuples.len() * assignments;
    let mut reach = vec![false; total];
    let mut stack: Vec<usize> = (0..assignments).filter(|&v| evals[0][v].root).map(|v| node(0, v)).collect();
    for &s in &stack {
        reach[s] = true;
    }
    while let Some(n) = stack.pop() {
        for m in successors(n) {
            if !reach[m] {
                reach[m] = true;
                stack.push(m);
            }
        }
    }
    let sccs = crate::scc::tarjan(total, successors, |n| reach[n]);
    let satisfied = sccs.iter().any(|comp| {
        let nontrivial = comp.len() > 1 || successors(comp[0]).any(|m| m == comp[0]);
        nontrivial
            && comp
                .iter()
                .fold(0u32, |acc, &n| acc | evals[n / assignments][n % assignments].fair)
                == all_fair
    });
    Ok(OracleVerdict {
        satisfied,
        tuple_states: tuples.len(),
    })
}

/// Decides `q` on `net` by full enumeration. Universal queries are decided as
/// the complement of the existential query on the negated body.
pub fn brute_force_check(net: &Net, q: &HyperQuery, cap: usize) -> Result<OracleVerdict, OracleError> {
    match q.quantifier {
        Quantifier::Exists => exists_traces(net, &q.vars, &q.body, cap),
        Quantifier::Forall => {
            let v = exists_traces(net, &q.vars, &LtlExpr::not(q.body.clone()), cap)?;
            Ok(OracleVerdict {
                satisfied: !v.satisfied,
                ..v
            })
        }
    }
}

/// Evaluates `body` on the lasso of marking tuples `prefix · cycle^ω`.
pub fn eval_on_marking_lasso(
    net: &Net,
    vars: &[String],
    body: &LtlExpr,
    prefix: &[Vec<Marking>],
    cycle: &[Vec<Marking>],
) -> Result<bool, ResolveError> {
    assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
    let mut resolved = HashMap::new();
    for a in body.atoms() {
        resolved.insert(a.clone(), ResolvedAtom::resolve(a, net, vars)?);
    }
    let s = Shape {
        prefix: prefix.len(),
        cycle: cycle.len(),
    };
    let at = |i: usize| if i < prefix.len() { &prefix[i] } else { &cycle[i - prefix.len()] };
    let lookup = |a: &crate::formula::Atom, i: usize| resolved[a].eval(net, at(i));
    Ok(eval_positions(body, s, &lookup)[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_query;

    fn one_place(tokens: u64) -> Net {
        let mut b = Net::builder();
        b.place("P", tokens).unwrap();
        b.build()
    }

    fn counter_net() -> Net {
        // P --t--> Q, then deadlock
        let mut b = Net::builder();
        b.place("P", 1).unwrap();
        b.place("Q", 0).unwrap();
        b.transition("t").unwrap();
        b.input("P", "t", 1).unwrap();
        b.output("t", "Q", 1).unwrap();
        b.transition("u").unwrap();
        b.input("P", "u", 1).unwrap();
        b.build()
    }

    fn check(net: &Net, q: &str) -> bool {
        brute_force_check(net, &parse_query(q).unwrap(), 10_000).unwrap().satisfied
    }

    #[test]
    fn stutter_only_trace() {
        let n = one_place(1);
        assert!(check(&n, "A p : G p.P = 1"));
        assert!(!check(&n, "A p : F p.P = 0"));
        assert!(check(&n, "E p : G p.P = 1"));
    }

    #[test]
    fn branching() {
        let n = counter_net();
        assert!(check(&n, "E p : F p.Q = 1"));
        assert!(!check(&n, "A p : F p.Q = 1"));
        assert!(check(&n, "E p q : F (p.Q = 1 && q.Q = 0 && q.P = 0)"));
        assert!(check(&n, "A p : X G p.P = 0"));
        assert!(!check(&n, "E p : X X p.en(t)"));
        assert!(check(&n, "A p q : G (p.Q - q.Q <= 1)"));
    }

    #[test]
    fn negation_under_temporal_operators() {
        let n = counter_net();
        assert!(check(&n, "E p : !(G p.P = 1)"));
        assert!(check(&n, "A p : !(F G p.P = 1)"));
        assert!(check(&n, "E p : !(p.P = 1 U p.Q = 1)"));
        assert!(!check(&n, "A p : !(p.P = 1 U p.Q = 1)"));
    }

    #[test]
    fn cap_is_enforced() {
        let mut b = Net::builder();
        b.place("P", 0).unwrap();
        b.transition("gen").unwrap();
        b.output("gen", "P", 1).unwrap();
        let n = b.build();
        let q = parse_query("E p : G p.P >= 0").unwrap();
        assert!(matches!(brute_force_check(&n, &q, 100), Err(OracleError::CapExceeded(100))));
    }

    #[test]
    fn marking_lasso_evaluation() {
        let n = counter_net();
        let vars = vec!["p".to_string()];
        let q = parse_query("E p : F p.Q = 1").unwrap();
        let m0 = vec![Marking::new(vec![1, 0])];
        let m1 = vec![Marking::new(vec![0, 1])];
        assert!(eval_on_marking_lasso(&n, &vars, &q.body, std::slice::from_ref(&m0), &[m1]).unwrap());
        assert!(!eval_on_marking_lasso(&n, &vars, &q.body, &[], &[m0]).unwrap());
    }
}
