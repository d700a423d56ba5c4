mod common;

use hyperpn::buchi::{build, degeneralize, ltl_to_gba, LassoEvaluator};
use hyperpn::checker::{check, CheckError, Options};
use hyperpn::encodings::{congestion_net, latency_net, parse_edgelist, Topology};
use hyperpn::formula::{negate_query, parse_query, to_nnf, Atom, AtomTable, Cmp, LtlExpr};
use hyperpn::io::{parse_net, write_net};
use hyperpn::lp::{lp_feasible, Feasibility, MarkingConstraint, StateEquationSystem};
use hyperpn::net::{Marking, PlaceId, Step};
use hyperpn::oracle::{brute_force_check, eval_on_marking_lasso};
use hyperpn::words::LassoWords;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use common::{random_body, random_net, random_query, rng};

const CAP: usize = 50_000;

fn opts() -> Options {
    Options {
        lp_prefilter: false,
        config_cap: CAP,
        timeout: None,
    }
}

fn random_marking(r: &mut ChaCha8Rng, places: usize) -> Marking {
    Marking::new((0..places).map(|_| r.random_range(0..=3)).collect())
}

fn two_atom_body(r: &mut ChaCha8Rng, ops: usize) -> LtlExpr {
    if ops == 0 {
        return LtlExpr::atom(Atom::enabled("x", ["a", "b"][r.random_range(0..2)]));
    }
    match r.random_range(0..7) {
        k @ 0..=3 => [LtlExpr::not, LtlExpr::next, LtlExpr::finally, LtlExpr::globally][k](two_atom_body(r, ops - 1)),
        k => {
            let left = r.random_range(0..ops);
            let a = two_atom_body(r, left);
            let b = two_atom_body(r, ops - 1 - left);
            [LtlExpr::and, LtlExpr::or, LtlExpr::until][k - 4](a, b)
        }
    }
}

fn two_atoms() -> AtomTable {
    let mut t = AtomTable::new();
    t.intern(&Atom::enabled("x", "a"));
    t.intern(&Atom::enabled("x", "b"));
    t
}

fn random_topology(r: &mut ChaCha8Rng) -> Topology {
    let n = r.random_range(2..=7);
    let mut text = String::new();
    for v in 1..n {
        let u = r.random_range(0..v);
        text.push_str(&format!("n{u} n{v} {}\nn{v} n{u} {}\n", r.random_range(1..=5), r.random_range(1..=5)));
    }
    for _ in 0..r.random_range(0..=3) {
        let (a, b) = (r.random_range(0..n), r.random_range(0..n));
        if a != b && !text.contains(&format!("n{a} n{b} ")) {
            text.push_str(&format!("n{a} n{b} {}\n", r.random_range(1..=5)));
        }
    }
    parse_edgelist(&text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn successors_total_and_conserving(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r);
        let m = random_marking(&mut r, net.place_count());
        let succ = net.successors(&m).unwrap();
        prop_assert!(!succ.is_empty());
        if net.is_deadlock(&m) {
            prop_assert_eq!(succ, vec![(Step::Stutter, m.clone())]);
        } else {
            for (s, m2) in succ {
                let Step::Fire(t) = s else { panic!("stutter from a live marking") };
                let delta: i128 = net.outputs(t).iter().map(|w| w.1 as i128).sum::<i128>()
                    - net.inputs(t).iter().map(|w| w.1 as i128).sum::<i128>();
                prop_assert_eq!(m2.total() as i128 - m.total() as i128, delta);
                for p in net.places() {
                    prop_assert_eq!(m2.get(p) as i128, m.get(p) as i128 + net.incidence(p, t));
                }
            }
        }
    }

    #[test]
    fn nnf_preserves_semantics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r);
        let q = random_query(&mut r, &net);
        let nnf = to_nnf(&q.body);
        let total = r.random_range(1..=5);
        let split = r.random_range(0..total);
        let tuple = |r: &mut ChaCha8Rng| (0..q.vars.len()).map(|_| random_marking(r, net.place_count())).collect::<Vec<_>>();
        let seq: Vec<Vec<Marking>> = (0..total).map(|_| tuple(&mut r)).collect();
        let (p, c) = seq.split_at(split);
        prop_assert_eq!(
            eval_on_marking_lasso(&net, &q.vars, &q.body, p, c).unwrap(),
            eval_on_marking_lasso(&net, &q.vars, &nnf, p, c).unwrap()
        );
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r);
        let q = random_query(&mut r, &net);
        prop_assert_eq!(parse_query(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn net_text_round_trip(seed in any::<u64>()) {
        let net = random_net(&mut rng(seed));
        prop_assert_eq!(parse_net(&write_net(&net)).unwrap(), net);
    }

    #[test]
    fn negation_flips_oracle_verdict(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r);
        let q = random_query(&mut r, &net);
        if let (Ok(a), Ok(b)) = (brute_force_check(&net, &q, CAP), brute_force_check(&net, &negate_query(&q), CAP)) {
            prop_assert_ne!(a.satisfied, b.satisfied);
        }
    }

    #[test]
    fn complement_partitions_words(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ops = r.random_range(0..=4);
        let body = two_atom_body(&mut r, ops);
        let words = LassoWords::up_to(2, 4);
        let table = two_atoms();
        let pos = LassoEvaluator::new(&build(&body, &mut table.clone()), 2).signature(&words);
        let neg = LassoEvaluator::new(&build(&to_nnf(&LtlExpr::not(body)), &mut table.clone()), 2).signature(&words);
        for (a, b) in pos.iter().zip(&neg) {
            prop_assert_ne!(a, b);
        }
    }

    #[test]
    fn degeneralize_preserves_language(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ops = r.random_range(0..=4);
        let body = to_nnf(&two_atom_body(&mut r, ops));
        let mut table = two_atoms();
        let g = ltl_to_gba(&body, &mut table);
        let ba = degeneralize(&g);
        let trimmed = ba.trim();
        for w in LassoWords::up_to(2, 4).words.iter().step_by(3) {
            let (p, c) = w.valuations(2);
            let want = g.accepts_lasso(&p, &c);
            prop_assert_eq!(hyperpn::buchi::accepts_lasso(&ba, &p, &c), want);
            prop_assert_eq!(hyperpn::buchi::accepts_lasso(&trimmed, &p, &c), want);
        }
    }

    #[test]
    fn checker_deterministic_and_dual(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r);
        let q = random_query(&mut r, &net);
        let run = |q| match check(&net, q, &opts()) {
            Ok(v) => Some(v),
            Err(CheckError::ConfigCap { .. }) => None,
            Err(e) => panic!("{e}"),
        };
        let (Some(a), Some(b), Some(n)) = (run(&q), run(&q), run(&negate_query(&q))) else {
            return Ok(());
        };
        prop_assert_eq!(&a.witness, &b.witness);
        prop_assert_eq!(a.satisfied, b.satisfied);
        prop_assert_eq!(a.stats.configurations_explored, b.stats.configurations_explored);
        prop_assert_ne!(a.satisfied, n.satisfied);
        // a witness exists iff (E and satisfied) or (A and not satisfied)
        let exists = q.quantifier == hyperpn::formula::Quantifier::Exists;
        prop_assert_eq!(a.witness.is_some(), exists == a.satisfied);
    }

    #[test]
    fn lp_exact_and_monotone(seed in any::<u64>()) {
        let mut r = rng(seed);
        let net = random_net(&mut r);
        let copies = r.random_range(1..=2);
        let mut sys = StateEquationSystem::new(&net, (0..copies).map(|i| format!("c{i}")).collect());
        let mut last = lp_feasible(&sys);
        prop_assert_eq!(last, Feasibility::Feasible);
        for _ in 0..r.random_range(1..=4) {
            let terms = (0..r.random_range(1..=3))
                .map(|_| (r.random_range(-2..=2), r.random_range(0..copies), PlaceId(r.random_range(0..net.place_count()))))
                .collect();
            let cmp = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt][r.random_range(0..5)];
            sys.constraints.push(MarkingConstraint { terms, cmp, bound: r.random_range(-2..=4) });
            let now = lp_feasible(&sys);
            prop_assert_eq!(now, lp_feasible(&sys));
            if last == Feasibility::Infeasible {
                prop_assert_eq!(now, Feasibility::Infeasible);
            }
            last = now;
        }
    }

    #[test]
    fn congestion_net_counts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let topo = random_topology(&mut r);
        let s = r.random_range(0..topo.node_count());
        let targets: Vec<usize> = (0..topo.node_count()).filter(|&v| v != s && r.random_bool(0.5)).collect();
        let cn = congestion_net(&topo, s, &targets).unwrap();
        prop_assert_eq!(cn.net.place_count(), topo.node_count() + topo.edge_count() + targets.len());
        prop_assert_eq!(cn.net.transition_count(), topo.edge_count() + targets.len());
    }

    #[test]
    fn latency_walks_stay_loop_free(seed in any::<u64>()) {
        let mut r = rng(seed);
        let topo = random_topology(&mut r);
        let s = r.random_range(0..topo.node_count());
        let t = (s + 1) % topo.node_count();
        let ln = latency_net(&topo, s, t).unwrap();
        let net = &ln.net;
        let counter = net.place(&ln.counter).unwrap();
        let nodes: Vec<PlaceId> = ln.node_places.iter().map(|p| net.place(p).unwrap()).collect();
        let once: Vec<PlaceId> = net.places().filter(|&p| net.place_name(p).starts_with("once_")).collect();
        let mut m = net.initial_marking().clone();
        for _ in 0..12 {
            let succ = net.successors(&m).unwrap();
            let next = succ[r.random_range(0..succ.len())].1.clone();
            prop_assert!(next.get(counter) >= m.get(counter));
            m = next;
            prop_assert!(nodes.iter().map(|&p| m.get(p)).sum::<u64>() <= 1);
            for &p in &once {
                prop_assert!(m.get(p) <= 1);
            }
        }
    }
}

#[test]
fn random_bodies_respect_operator_budget() {
    let mut r = rng(5);
    let net = random_net(&mut r);
    let vars = vec!["p1".to_string()];
    for ops in 0..=4 {
        assert_eq!(random_body(&mut r, &net, &vars, ops).operator_count(), ops);
    }
}
