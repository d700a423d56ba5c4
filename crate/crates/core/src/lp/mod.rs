//! State-equation over-approximation used to refute queries before search.

mod simplex;

use std::collections::BTreeMap;
use std::fmt;


pub use simplex::{feasible, Row};

use crate::checker::search_body;
use crate::formula::{Atom, Cmp, HyperQuery, LinearConstraint, LtlExpr};
use crate::net::{Net, PlaceId};
use simplex::int;

/// A linear constraint over marking variables of several copies:
/// terms are `(coef, copy, place)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkingConstraint {
    pub terms: Vec<(i64, usize, PlaceId)>,
    pub cmp: Cmp,
    pub bound: i64,
}

/// `copies` independent state equations `m = m0 + C·x` plus constraints
/// across their marking variables. All variables are nonnegative rationals.
#[derive(Debug, Clone)]
pub struct StateEquationSystem<'a> {
    net: &'a Net,
    copy_names: Vec<String>,
    pub constraints: Vec<MarkingConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

impl<'a> StateEquationSystem<'a> {
    pub fn new(net: &'a Net, copy_names: Vec<String>) -> Self {
        StateEquationSystem {
            net,
            copy_names,
            constraints: Vec::new(),
        }
    }

    pub fn copies(&self) -> usize {
        self.copy_names.len()
    }

    fn stride(&self) -> usize {
        self.net.place_count() + self.net.transition_count()
    }

    /// Column of marking variable `m[copy, p]`.
    pub fn marking_var(&self, copy: usize, p: PlaceId) -> usize {
        copy * self.stride() + p.0
    }

    /// Column of firing-count variable `x[copy, t]`.
    pub fn firing_var(&self, copy: usize, t: usize) -> usize {
        copy * self.stride() + self.net.place_count() + t
    }

    pub fn variable_count(&self) -> usize {
        self.copies() * self.stride()
    }

    pub fn rows(&self) -> Vec<Row> {
        let net = self.net;
        let mut rows = Vec::new();
        for c in 0..self.copies() {
            for p in net.places() {
                // m_p - Σ_t C[p,t]·x_t = m0(p)
                let mut coeffs = vec![(self.marking_var(c, p), int(1))];
                for t in net.transitions() {
                    let w = net.incidence(p, t);
                    if w != 0 {
                        coeffs.push((self.firing_var(c, t.0), int(-w)));
                    }
                }
                rows.push(Row {
                    coeffs,
                    cmp: Cmp::Eq,
                    rhs: int(net.initial_marking().get(p) as i128),
                });
            }
        }
        for k in &self.constraints {
            rows.push(Row {
                coeffs: k
                    .terms
                    .iter()
                    .map(|&(a, c, p)| (self.marking_var(c, p), int(a as i128)))
                    .collect(),
                cmp: k.cmp,
                rhs: int(k.bound as i128),
            });
        }
        rows
    }

    pub fn solve(&self) -> Feasibility {
        if feasible(self.variable_count(), &self.rows()) {
            Feasibility::Feasible
        } else {
            Feasibility::Infeasible
        }
    }
}

impl fmt::Display for StateEquationSystem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let net = self.net;
        writeln!(f, "# {} copies, {} variables, all >= 0", self.copies(), self.variable_count())?;
        for name in &self.copy_names {
            for p in net.places() {
                write!(f, "m[{name}.{}] = {}", net.place_name(p), net.initial_marking().get(p))?;
                for t in net.transitions() {
                    let w = net.incidence(p, t);
                    if w != 0 {
                        let sign = if w < 0 { '-' } else { '+' };
                        let w = w.unsigned_abs();
                        let w = if w == 1 { String::new() } else { format!("{w}*") };
                        write!(f, " {sign} {w}x[{name}.{}]", net.transition_name(t))?;
                    }
                }
                writeln!(f)?;
            }
        }
        for k in &self.constraints {
            let mut first = true;
            for &(a, c, p) in &k.terms {
                let sign = match (first, a < 0) {
                    (true, true) => "-",
                    (true, false) => "",
                    (false, true) => " - ",
                    (false, false) => " + ",
                };
                let a = a.unsigned_abs();
                let a = if a == 1 { String::new() } else { format!("{a}*") };
                write!(f, "{sign}{a}m[{}.{}]", self.copy_names[c], net.place_name(p))?;
                first = false;
            }
            if first {
                write!(f, "0")?;
            }
            writeln!(f, " {} {}", k.cmp.symbol(), k.bound)?;
        }
        Ok(())
    }
}

/// Exact feasibility of a system.
pub fn lp_feasible(sys: &StateEquationSystem) -> Feasibility {
    sys.solve()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrefilterOutcome {
    Refuted,
    Inconclusive(String),
}

impl PrefilterOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, PrefilterOutcome::Refuted)
    }
}

fn linear_conjuncts(e: &LtlExpr) -> Option<Vec<&LinearConstraint>> {
    e.conjuncts()
        .into_iter()
        .filter(|c| c.as_constant() != Some(true))
        .map(|c| match c {
            LtlExpr::Atom(Atom::Linear(l)) => Some(l),
            _ => None,
        })
        .collect()
}

/// Builds the system for `q`'s search body if it fits the template
/// `∧ F(g_i) ∧ G(h)`; otherwise returns why not.
///
/// Each `g_i` mentions one trace variable, only places without outgoing arcs,
/// and only `=` or `>=`. If a variable has more than one `F` conjunct, its goals
/// must additionally be `>=` with nonnegative coefficients, so that they all
/// hold at the later of the two instants. `h` uses `>=` with nonnegative
/// coefficients on places without incoming arcs.
pub fn prefilter_system<'a>(net: &'a Net, q: &HyperQuery) -> Result<StateEquationSystem<'a>, String> {
    let body = search_body(q);
    let var = |v: &str| q.vars.iter().position(|x| x == v).ok_or_else(|| format!("unknown trace variable `{v}`"));
    let place = |name: &str| net.place(name).map_err(|e| e.to_string());
    let mut sys = StateEquationSystem::new(net, q.vars.clone());
    let mut goals: BTreeMap<usize, Vec<Vec<MarkingConstraint>>> = BTreeMap::new();
    for c in body.conjuncts() {
        match c {
            e if e.as_constant() == Some(true) => {}
            LtlExpr::Finally(g) => {
                let lits = linear_conjuncts(g).ok_or("template mismatch: F of a non-linear goal")?;
                let mut trace = None;
                let mut group = Vec::new();
                for l in lits {
                    if !matches!(l.cmp, Cmp::Eq | Cmp::Ge) {
                        return Err(format!("template mismatch: goal comparator `{}`", l.cmp.symbol()));
                    }
                    let mut terms = Vec::new();
                    for t in &l.terms {
                        let v = var(&t.var)?;
                        if *trace.get_or_insert(v) != v {
                            return Err("template mismatch: goal over several trace variables".into());
                        }
                        let p = place(&t.place)?;
                        if net.has_outgoing(p) {
                            return Err(format!("template mismatch: goal place `{}` has outgoing arcs", t.place));
                        }
                        terms.push((t.coef, v, p));
                    }
                    group.push(MarkingConstraint {
                        terms,
                        cmp: l.cmp,
                        bound: l.bound,
                    });
                }
                // a constant-free goal like `0 >= -1` has no trace; attach it to copy 0
                goals.entry(trace.unwrap_or(0)).or_default().push(group);
            }
            LtlExpr::Globally(h) => {
                let lits = linear_conjuncts(h).ok_or("template mismatch: G of a non-linear invariant")?;
                for l in lits {
                    if l.cmp != Cmp::Ge || l.terms.iter().any(|t| t.coef < 0) {
                        return Err("template mismatch: invariant is not a nonnegative >= sum".into());
                    }
                    let mut terms = Vec::new();
                    for t in &l.terms {
                        let p = place(&t.place)?;
                        if net.has_incoming(p) {
                            return Err(format!("template mismatch: invariant place `{}` has incoming arcs", t.place));
                        }
                        terms.push((t.coef, var(&t.var)?, p));
                    }
                    sys.constraints.push(MarkingConstraint {
                        terms,
                        cmp: Cmp::Ge,
                        bound: l.bound,
                    });
                }
            }
            _ => return Err("template mismatch".into()),
        }
    }
    for groups in goals.values() {
        let monotone = groups
            .iter()
            .flatten()
            .all(|k| k.cmp == Cmp::Ge && k.terms.iter().all(|t| t.0 >= 0));
        if groups.len() > 1 && !monotone {
            return Err("template mismatch: several equality goals on one trace variable".into());
        }
    }
    sys.constraints.extend(goals.into_values().flatten().flatten());
    Ok(sys)
}

/// Runs the state-equation check on `q`'s search body. `Refuted` means the
/// search body has no run, so an existential query is false and a universal
/// one true. A feasible system proves nothing.
pub fn prefilter(net: &Net, q: &HyperQuery) -> PrefilterOutcome {
    match prefilter_system(net, q) {
        Err(reason) => PrefilterOutcome::Inconclusive(reason),
        Ok(sys) => match sys.solve() {
            Feasibility::Infeasible => PrefilterOutcome::Refuted,
            Feasibility::Feasible => PrefilterOutcome::Inconclusive("state equation feasible".into()),
        },
    }
}
