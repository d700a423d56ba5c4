#![allow(dead_code)]

use hyperpn::formula::{Atom, Cmp, HyperQuery, LtlExpr, Quantifier, Term};
use hyperpn::net::Net;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// At most 5 places and 5 transitions, arc weights ≤ 2, ≤ 3 initial tokens.
pub fn random_net(r: &mut ChaCha8Rng) -> Net {
    let places = r.random_range(1..=5);
    let transitions = r.random_range(1..=5);
    let mut b = Net::builder();
    for p in 0..places {
        b.place(format!("P{p}"), r.random_range(0..=3)).unwrap();
    }
    for t in 0..transitions {
        let tn = format!("t{t}");
        b.transition(tn.clone()).unwrap();
        for p in 0..places {
            let pn = format!("P{p}");
            if r.random_bool(0.35) {
                b.input(&pn, &tn, r.random_range(1..=2)).unwrap();
            }
            if r.random_bool(0.35) {
                b.output(&tn, &pn, r.random_range(1..=2)).unwrap();
            }
            if r.random_bool(0.1) {
                b.inhibitor(&pn, &tn, r.random_range(1..=2)).unwrap();
            }
        }
    }
    b.build()
}

fn random_atom(r: &mut ChaCha8Rng, net: &Net, vars: &[String]) -> Atom {
    let var = |r: &mut ChaCha8Rng| vars[r.random_range(0..vars.len())].clone();
    if r.random_bool(0.3) {
        let t = net.transition_name(hyperpn::net::TransitionId(r.random_range(0..net.transition_count())));
        return Atom::enabled(var(r), t);
    }
    let n = r.random_range(1..=2);
    let terms = (0..n)
        .map(|_| {
            let p = net.place_name(hyperpn::net::PlaceId(r.random_range(0..net.place_count())));
            let coef = [1, 1, -1, 2][r.random_range(0..4)];
            Term::new(coef, var(r), p)
        })
        .collect();
    let cmp = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt][r.random_range(0..5)];
    Atom::linear(terms, cmp, r.random_range(0..=3))
}

/// Random surface body with exactly `ops` operators.
pub fn random_body(r: &mut ChaCha8Rng, net: &Net, vars: &[String], ops: usize) -> LtlExpr {
    if ops == 0 {
        return LtlExpr::atom(random_atom(r, net, vars));
    }
    match r.random_range(0..7) {
        k @ 0..=3 => {
            let a = random_body(r, net, vars, ops - 1);
            [LtlExpr::not, LtlExpr::next, LtlExpr::finally, LtlExpr::globally][k](a)
        }
        k => {
            let left = r.random_range(0..ops);
            let a = random_body(r, net, vars, left);
            let b = random_body(r, net, vars, ops - 1 - left);
            [LtlExpr::and, LtlExpr::or, LtlExpr::until][k - 4](a, b)
        }
    }
}

/// ≤ 2 trace variables, body with ≤ 4 operators.
pub fn random_query(r: &mut ChaCha8Rng, net: &Net) -> HyperQuery {
    let k = r.random_range(1..=2);
    let vars: Vec<String> = (1..=k).map(|i| format!("p{i}")).collect();
    let ops = r.random_range(0..=4);
    let body = random_body(r, net, &vars, ops);
    let quant = if r.random_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall };
    HyperQuery::new(quant, vars, body)
}

/// Every body over atoms `a`, `b` with at most `max_ops` operators from
/// ¬ X F G ∧ ∨ U, grouped by operator count. Each entry records how it was
/// built from earlier entries.
pub enum Built {
    Atom(usize),
    Unary(usize, usize),
    Binary(usize, usize, usize),
}

pub struct Enumeration {
    pub exprs: Vec<LtlExpr>,
    pub built: Vec<Built>,
    pub by_size: Vec<std::ops::Range<usize>>,
}

pub fn enumerate_bodies(a: &LtlExpr, b: &LtlExpr, max_ops: usize) -> Enumeration {
    let mut exprs = vec![a.clone(), b.clone()];
    let mut built = vec![Built::Atom(0), Built::Atom(1)];
    let mut by_size: Vec<std::ops::Range<usize>> = Vec::new();
    by_size.push(0..2);
    let unary = [LtlExpr::not, LtlExpr::next, LtlExpr::finally, LtlExpr::globally];
    let binary = [LtlExpr::and, LtlExpr::or, LtlExpr::until];
    for k in 1..=max_ops {
        let start = exprs.len();
        for c in by_size[k - 1].clone() {
            for (op, f) in unary.iter().enumerate() {
                exprs.push(f(exprs[c].clone()));
                built.push(Built::Unary(op, c));
            }
        }
        for i in 0..k {
            for x in by_size[i].clone() {
                for y in by_size[k - 1 - i].clone() {
                    for (op, f) in binary.iter().enumerate() {
                        exprs.push(f(exprs[x].clone(), exprs[y].clone()));
                        built.push(Built::Binary(op, x, y));
                    }
                }
            }
        }
        by_size.push(start..exprs.len());
    }
    Enumeration { exprs, built, by_size }
}
