//! The search engine: on-the-fly product of the marking-tuple system with a
//! Büchi automaton, explored by nested depth-first search.

mod witness;

use std::time::{Duration, Instant};

use indexmap::IndexSet;
use thiserror::Error;

pub use witness::{ReplayError, TraceWitness, Witness};

use crate::buchi::{self, BuchiAutomaton, StateId};
use crate::formula::{negate_query, to_nnf, AtomTable, HyperQuery, LtlExpr, Quantifier, ResolveError, ResolvedAtom};
use crate::net::{Marking, Net, NetError, Step, Tokens};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub lp_prefilter: bool,
    /// Maximum number of stored configurations.
    pub config_cap: usize,
    pub timeout: Option<Duration>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            lp_prefilter: true,
            config_cap: 50_000_000,
            timeout: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    /// Configurations expanded by the outer and inner searches.
    pub configurations_explored: usize,
    pub peak_stored: usize,
    pub buchi_states: usize,
    pub wall_time: Duration,
    pub refuted_by_lp: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub satisfied: bool,
    /// For existential queries a satisfying lasso, for universal ones a
    /// counterexample.
    pub witness: Option<Witness>,
    pub stats: Stats,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("configuration cap of {cap} exceeded")]
    ConfigCap { cap: usize, stats: Stats },
    #[error("timeout after {:.1}s", stats.wall_time.as_secs_f64())]
    Timeout { stats: Stats },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CheckError {
    /// Resource errors: cap or timeout.
    pub fn is_resource(&self) -> bool {
        matches!(self, CheckError::ConfigCap { .. } | CheckError::Timeout { .. })
    }
}

/// A marking per trace variable plus an automaton state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub markings: Vec<Marking>,
    pub buchi_state: StateId,
}

/// Everything the product needs besides the configuration.
pub struct Product<'a> {
    net: &'a Net,
    ba: &'a BuchiAutomaton,
    atoms: Vec<ResolvedAtom>,
    traces: usize,
}

impl<'a> Product<'a> {
    /// `atoms` must be the table the automaton was built against.
    pub fn new(net: &'a Net, ba: &'a BuchiAutomaton, atoms: &AtomTable, vars: &[String]) -> Result<Self, ResolveError> {
        Ok(Product {
            net,
            ba,
            atoms: atoms.iter().map(|a| ResolvedAtom::resolve(a, net, vars)).collect::<Result<_, _>>()?,
            traces: vars.len(),
        })
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            markings: vec![self.net.initial_marking().clone(); self.traces],
            buchi_state: self.ba.initial,
        }
    }

    /// Labels are evaluated on `c`'s markings. Order: automaton edges, then
    /// step tuples lexicographically with the first trace slowest.
    pub fn successors(&self, c: &Configuration) -> Result<Vec<(Vec<Step>, Configuration)>, NetError> {
        let places = self.net.place_count();
        let flat: Vec<Tokens> = c.markings.iter().flat_map(|m| m.tokens().iter().copied()).collect();
        let mut out = Vec::new();
        self.expand(&flat, c.buchi_state, |steps, next, q| {
            let markings = next.chunks(places.max(1)).take(self.traces).map(|m| Marking::new(m.to_vec())).collect();
            let markings = if places == 0 { vec![Marking::new(Vec::new()); self.traces] } else { markings };
            out.push((steps.to_vec(), Configuration { markings, buchi_state: q }));
        })?;
        Ok(out)
    }

    /// Calls `emit(steps, flat next markings, next state)` per successor.
    fn expand(&self, flat: &[Tokens], q: StateId, mut emit: impl FnMut(&[Step], &[Tokens], StateId)) -> Result<(), NetError> {
        let places = self.net.place_count();
        let mut cache: Vec<Option<bool>> = vec![None; self.atoms.len()];
        let mut enabled_edges = Vec::new();
        for (label, r) in &self.ba.edges[q] {
            let ok = label.iter().all(|l| {
                let v = *cache[l.atom].get_or_insert_with(|| self.atoms[l.atom].eval_flat(self.net, flat, places));
                v == l.positive
            });
            if ok {
                enabled_edges.push(*r);
            }
        }
        if enabled_edges.is_empty() {
            return Ok(());
        }
        let per_trace: Vec<Vec<(Step, Marking)>> = (0..self.traces)
            .map(|i| self.net.successors(&Marking::new(flat[i * places..(i + 1) * places].to_vec())))
            .collect::<Result<_, _>>()?;
        let mut pick = vec![0usize; self.traces];
        let mut steps = vec![Step::Stutter; self.traces];
        let mut next: Vec<Tokens> = vec![0; flat.len()];
        for r in enabled_edges {
            pick.iter_mut().for_each(|p| *p = 0);
            'cart: loop {
                for i in 0..self.traces {
                    let (s, m) = &per_trace[i][pick[i]];
                    steps[i] = *s;
                    next[i * places..(i + 1) * places].copy_from_slice(m.tokens());
                }
                emit(&steps, &next, r);
                for i in (0..self.traces).rev() {
                    pick[i] += 1;
                    if pick[i] < per_trace[i].len() {
                        continue 'cart;
                    }
                    pick[i] = 0;
                }
                break;
            }
        }
        Ok(())
    }
}

/// Free-standing form of [`Product::successors`].
pub fn product_successors(
    net: &Net,
    c: &Configuration,
    ba: &BuchiAutomaton,
    atoms: &AtomTable,
    vars: &[String],
) -> Result<Vec<(Vec<Step>, Configuration)>, CheckError> {
    Ok(Product::new(net, ba, atoms, vars)?.successors(c)?)
}

/// Accepting lasso in the product: step tuples of the prefix and of the loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub prefix: Vec<Vec<Step>>,
    pub cycle: Vec<Vec<Step>>,
}

type StepPath = Vec<Vec<Step>>;

const OUTER: u8 = 1;
const INNER: u8 = 2;
const ON_STACK: u8 = 4;

struct Frame {
    node: usize,
    /// Steps that led here from the previous frame.
    via: Vec<Step>,
    succ: Vec<(Vec<Step>, usize)>,
    next: usize,
}

struct Search<'p, 'a> {
    product: &'p Product<'a>,
    store: IndexSet<Box<[Tokens]>>,
    color: Vec<u8>,
    stats: Stats,
    cap: usize,
    deadline: Option<Instant>,
    started: Instant,
}

impl Search<'_, '_> {
    fn intern(&mut self, key: Box<[Tokens]>) -> Result<usize, CheckError> {
        if let Some(i) = self.store.get_index_of(&key) {
            return Ok(i);
        }
        if self.store.len() >= self.cap {
            return Err(CheckError::ConfigCap {
                cap: self.cap,
                stats: self.snapshot(),
            });
        }
        self.store.insert(key);
        self.color.push(0);
        Ok(self.store.len() - 1)
    }

    fn snapshot(&self) -> Stats {
        Stats {
            peak_stored: self.store.len(),
            wall_time: self.started.elapsed(),
            ..self.stats
        }
    }

    fn expand(&mut self, node: usize) -> Result<Vec<(Vec<Step>, usize)>, CheckError> {
        self.stats.configurations_explored += 1;
        if self.stats.configurations_explored.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(CheckError::Timeout { stats: self.snapshot() });
                }
            }
        }
        let key = &self.store[node];
        let (flat, q) = key.split_at(key.len() - 1);
        let flat = flat.to_vec();
        let q = q[0] as StateId;
        let mut raw: Vec<(Vec<Step>, Box<[Tokens]>)> = Vec::new();
        self.product.expand(&flat, q, |steps, next, r| {
            let mut k = Vec::with_capacity(next.len() + 1);
            k.extend_from_slice(next);
            k.push(r as Tokens);
            raw.push((steps.to_vec(), k.into_boxed_slice()));
        })?;
        raw.into_iter()
            .map(|(s, k)| Ok((s, self.intern(k)?)))
            .collect()
    }

    fn accepting(&self, node: usize) -> bool {
        let key = &self.store[node];
        self.product.ba.accepting[key[key.len() - 1] as usize]
    }

    fn run(&mut self) -> Result<Option<Lasso>, CheckError> {
        let init = self.product.initial();
        let mut key: Vec<Tokens> = init.markings.iter().flat_map(|m| m.tokens().iter().copied()).collect();
        key.push(init.buchi_state as Tokens);
        let root = self.intern(key.into_boxed_slice())?;
        self.color[root] |= OUTER | ON_STACK;
        let succ = self.expand(root)?;
        let mut outer = vec![Frame {
            node: root,
            via: Vec::new(),
            succ,
            next: 0,
        }];
        while let Some(top) = outer.last_mut() {
            if top.next < top.succ.len() {
                let (via, n) = top.succ[top.next].clone();
                top.next += 1;
                if self.color[n] & OUTER == 0 {
                    self.color[n] |= OUTER | ON_STACK;
                    let succ = self.expand(n)?;
                    outer.push(Frame { node: n, via, succ, next: 0 });
                }
                continue;
            }
            // post-order
            let node = top.node;
            if self.accepting(node) {
                if let Some((hit, inner_path)) = self.inner(node)? {
                    return Ok(Some(lasso(&outer, hit, inner_path)));
                }
            }
            self.color[node] &= !ON_STACK;
            outer.pop();
        }
        Ok(None)
    }

    /// Inner search from `seed`; stops at the first configuration on the outer
    /// stack. Returns it and the steps leading there from `seed`.
    fn inner(&mut self, seed: usize) -> Result<Option<(usize, StepPath)>, CheckError> {
        let succ = self.expand(seed)?;
        let mut stack = vec![Frame {
            node: seed,
            via: Vec::new(),
            succ,
            next: 0,
        }];
        while let Some(top) = stack.last_mut() {
            if top.next < top.succ.len() {
                let (via, n) = top.succ[top.next].clone();
                top.next += 1;
                if self.color[n] & ON_STACK != 0 {
                    let mut path: Vec<Vec<Step>> = stack.iter().skip(1).map(|f| f.via.clone()).collect();
                    path.push(via);
                    return Ok(Some((n, path)));
                }
                if self.color[n] & INNER == 0 {
                    self.color[n] |= INNER;
                    let succ = self.expand(n)?;
                    stack.push(Frame { node: n, via, succ, next: 0 });
                }
                continue;
            }
            stack.pop();
        }
        Ok(None)
    }
}

// The seed is the top of `outer`; `hit` lies on `outer`.
fn lasso(outer: &[Frame], hit: usize, inner: Vec<Vec<Step>>) -> Lasso {
    let at = outer.iter().position(|f| f.node == hit).expect("hit is on the outer stack");
    let prefix = outer[1..=at].iter().map(|f| f.via.clone()).collect();
    let mut cycle: Vec<Vec<Step>> = outer[at + 1..].iter().map(|f| f.via.clone()).collect();
    cycle.extend(inner);
    Lasso { prefix, cycle }
}

/// Searches for an accepting lasso of `ba` against `vars.len()` traces of `net`.
pub fn nested_dfs(
    net: &Net,
    ba: &BuchiAutomaton,
    atoms: &AtomTable,
    vars: &[String],
    opts: &Options,
) -> Result<(Option<Lasso>, Stats), CheckError> {
    let started = Instant::now();
    let product = Product::new(net, ba, atoms, vars)?;
    let mut search = Search {
        product: &product,
        store: IndexSet::new(),
        color: Vec::new(),
        stats: Stats {
            buchi_states: ba.state_count(),
            ..Stats::default()
        },
        cap: opts.config_cap,
        deadline: opts.timeout.map(|t| started + t),
        started,
    };
    let found = search.run()?;
    Ok((found, search.snapshot()))
}

/// Splits a lasso of step tuples into one trace per variable.
pub fn extract_witness(lasso: &Lasso, vars: &[String]) -> Result<Witness, CheckError> {
    if lasso.cycle.is_empty() {
        return Err(CheckError::Internal("lasso with an empty loop".into()));
    }
    if lasso.prefix.iter().chain(&lasso.cycle).any(|s| s.len() != vars.len()) {
        return Err(CheckError::Internal("step tuple arity differs from the variable count".into()));
    }
    Ok(Witness {
        traces: vars
            .iter()
            .enumerate()
            .map(|(i, v)| TraceWitness {
                var: v.clone(),
                prefix: lasso.prefix.iter().map(|s| s[i]).collect(),
                cycle: lasso.cycle.iter().map(|s| s[i]).collect(),
            })
            .collect(),
    })
}

/// The body whose lasso the engine looks for: the body itself for `E`, the
/// negated body in negation normal form for `A`.
pub fn search_body(q: &HyperQuery) -> LtlExpr {
    match q.quantifier {
        Quantifier::Exists => q.body.clone(),
        Quantifier::Forall => to_nnf(&negate_query(q).body),
    }
}

/// Decides `q` on `net`.
pub fn check(net: &Net, q: &HyperQuery, opts: &Options) -> Result<Verdict, CheckError> {
    let started = Instant::now();
    let exists = q.quantifier == Quantifier::Exists;
    for a in q.body.atoms() {
        ResolvedAtom::resolve(a, net, &q.vars)?;
    }
    if opts.lp_prefilter && crate::lp::prefilter(net, q).is_refuted() {
        return Ok(Verdict {
            satisfied: !exists,
            witness: None,
            stats: Stats {
                refuted_by_lp: true,
                wall_time: started.elapsed(),
                ..Stats::default()
            },
        });
    }
    let body = search_body(q);
    let mut atoms = AtomTable::new();
    let ba = buchi::build(&body, &mut atoms);
    let (found, mut stats) = nested_dfs(net, &ba, &atoms, &q.vars, opts)?;
    stats.wall_time = started.elapsed();
    let witness = found.as_ref().map(|l| extract_witness(l, &q.vars)).transpose()?;
    Ok(Verdict {
        satisfied: found.is_some() == exists,
        witness,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_query;

    fn one_place() -> Net {
        let mut b = Net::builder();
        b.place("P", 1).unwrap();
        b.build()
    }

    fn no_lp() -> Options {
        Options {
            lp_prefilter: false,
            ..Options::default()
        }
    }

    #[test]
    fn stutter_lasso() {
        let n = one_place();
        let q = parse_query("E p1 : G p1.P = 1").unwrap();
        let v = check(&n, &q, &no_lp()).unwrap();
        assert!(v.satisfied);
        let w = v.witness.unwrap();
        assert_eq!(w.traces[0].cycle, vec![Step::Stutter]);
        assert!(w.traces[0].prefix.len() <= 1);
        w.replay(&n).unwrap();
    }

    #[test]
    fn empty_language_finds_nothing() {
        let n = one_place();
        let q = parse_query("E p1 : false").unwrap();
        let v = check(&n, &q, &no_lp()).unwrap();
        assert!(!v.satisfied && v.witness.is_none());
    }

    #[test]
    fn cartesian_successors() {
        let mut b = Net::builder();
        b.place("P", 1).unwrap();
        for t in ["a", "b", "c"] {
            b.transition(t).unwrap();
            b.input("P", t, 1).unwrap();
        }
        let n = b.build();
        let vars = vec!["x".to_string(), "y".to_string()];
        let mut atoms = AtomTable::new();
        let ba = buchi::build(&LtlExpr::tt(), &mut atoms);
        let p = Product::new(&n, &ba, &atoms, &vars).unwrap();
        let succ = p.successors(&p.initial()).unwrap();
        assert_eq!(succ.len(), 9 * ba.edges[ba.initial].len());
        assert_eq!(succ[0].0, vec![Step::Fire(n.transition("a").unwrap()); 2]);
        // deadlocked afterwards: one stutter per edge
        let after = &succ[0].1;
        let s2 = p.successors(after).unwrap();
        assert_eq!(s2.len(), ba.edges[after.buchi_state].len());
        assert!(s2.iter().all(|(s, c)| s == &vec![Step::Stutter; 2] && c.markings == after.markings));
    }

    #[test]
    fn universal_counterexample() {
        let mut b = Net::builder();
        b.place("P", 1).unwrap();
        b.place("Q", 0).unwrap();
        b.transition("t").unwrap();
        b.input("P", "t", 1).unwrap();
        b.output("t", "Q", 1).unwrap();
        b.transition("u").unwrap();
        b.input("P", "u", 1).unwrap();
        let n = b.build();
        let q = parse_query("A p : F p.Q = 1").unwrap();
        let v = check(&n, &q, &no_lp()).unwrap();
        assert!(!v.satisfied);
        let w = v.witness.unwrap();
        assert_eq!(w.traces[0].prefix, vec![Step::Fire(n.transition("u").unwrap())]);
        w.replay(&n).unwrap();
        let q2 = negate_query(&q);
        assert!(check(&n, &q2, &no_lp()).unwrap().satisfied);
    }

    #[test]
    fn cap_and_timeout() {
        let mut b = Net::builder();
        b.place("P", 0).unwrap();
        b.transition("gen").unwrap();
        b.output("gen", "P", 1).unwrap();
        let n = b.build();
        let q = parse_query("E p : G p.P >= 0 && F p.P < 0").unwrap();
        let opts = Options {
            config_cap: 100,
            ..no_lp()
        };
        let err = check(&n, &q, &opts).unwrap_err();
        assert!(matches!(err, CheckError::ConfigCap { cap: 100, .. }));
        let opts = Options {
            timeout: Some(Duration::from_millis(50)),
            ..no_lp()
        };
        let err = check(&n, &q, &opts).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn extract_projects_each_trace() {
        let t = crate::net::TransitionId(0);
        let l = Lasso {
            prefix: vec![vec![Step::Fire(t), Step::Stutter]],
            cycle: vec![vec![Step::Stutter, Step::Stutter]],
        };
        let w = extract_witness(&l, &["a".into(), "b".into()]).unwrap();
        assert_eq!(w.traces[1].prefix, vec![Step::Stutter]);
        assert!(extract_witness(&l, &["a".into()]).is_err());
    }
}
