use std::collections::HashMap;

use thiserror::Error;

use super::ast::{Atom, Cmp, LtlExpr};
use crate::net::{Marking, Net, NetError, PlaceId, Tokens, TransitionId};

/// Deduplicated atoms of a formula, indexed by first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomTable {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
}

impl AtomTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_expr(e: &LtlExpr) -> Self {
        let mut t = AtomTable::new();
        for a in e.atoms() {
            t.intern(a);
        }
        t
    }

    pub fn intern(&mut self, a: &Atom) -> usize {
        if let Some(&i) = self.index.get(a) {
            return i;
        }
        let i = self.atoms.len();
        self.atoms.push(a.clone());
        self.index.insert(a.clone(), i);
        i
    }

    pub fn index_of(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn get(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResolveError {
    #[error("trace variable `{0}` is not quantified")]
    UnknownVar(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// An atom with trace variables, places and transitions resolved to indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedAtom {
    Enabled {
        trace: usize,
        transition: TransitionId,
    },
    Linear {
        terms: Vec<(i64, usize, PlaceId)>,
        cmp: Cmp,
        bound: i64,
    },
}

impl ResolvedAtom {
    pub fn resolve(atom: &Atom, net: &Net, vars: &[String]) -> Result<Self, ResolveError> {
        let var = |v: &str| {
            vars.iter()
                .position(|x| x == v)
                .ok_or_else(|| ResolveError::UnknownVar(v.to_string()))
        };
        Ok(match atom {
            Atom::Enabled { var: v, transition } => ResolvedAtom::Enabled {
                trace: var(v)?,
                transition: net.transition(transition)?,
            },
            Atom::Linear(c) => ResolvedAtom::Linear {
                terms: c
                    .terms
                    .iter()
                    .map(|t| Ok((t.coef, var(&t.var)?, net.place(&t.place)?)))
                    .collect::<Result<_, ResolveError>>()?,
                cmp: c.cmp,
                bound: c.bound,
            },
        })
    }

    /// Evaluates against a flat token vector holding one marking per trace,
    /// each `stride` entries long.
    pub fn eval_flat(&self, net: &Net, tokens: &[Tokens], stride: usize) -> bool {
        match self {
            ResolvedAtom::Enabled { trace, transition } => {
                net.enabled_in(&tokens[trace * stride..(trace + 1) * stride], *transition)
            }
            ResolvedAtom::Linear { terms, cmp, bound } => {
                let sum = terms.iter().fold(0i128, |acc, &(c, tr, p)| {
                    let v = tokens[tr * stride + p.0] as i128;
                    (c as i128)
                        .checked_mul(v)
                        .and_then(|x| acc.checked_add(x))
                        .expect("linear atom arithmetic overflowed i128")
                });
                cmp.holds(sum, *bound as i128)
            }
        }
    }

    pub fn eval(&self, net: &Net, markings: &[Marking]) -> bool {
        let stride = net.place_count();
        let flat: Vec<Tokens> = markings.iter().flat_map(|m| m.tokens().iter().copied()).collect();
        self.eval_flat(net, &flat, stride)
    }
}

/// Evaluates `atom` on a tuple of markings indexed like `vars`.
pub fn eval_atom(net: &Net, atom: &Atom, vars: &[String], markings: &[Marking]) -> Result<bool, ResolveError> {
    Ok(ResolvedAtom::resolve(atom, net, vars)?.eval(net, markings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::ast::Term;

    fn net() -> Net {
        let mut b = Net::builder();
        b.place("P", 2).unwrap();
        b.place("counter", 0).unwrap();
        b.transition("t").unwrap();
        b.input("P", "t", 3).unwrap();
        b.build()
    }

    #[test]
    fn zero_form_is_true() {
        let n = net();
        let a = Atom::linear(vec![Term::new(0, "p1", "P")], Cmp::Ge, 0);
        let vars = vec!["p1".to_string()];
        assert!(eval_atom(&n, &a, &vars, &[Marking::new(vec![7, 1])]).unwrap());
    }

    #[test]
    fn counter_difference() {
        let n = net();
        let vars = vec!["p1".to_string(), "p2".to_string()];
        let a = Atom::linear(
            vec![Term::new(1, "p1", "counter"), Term::new(-1, "p2", "counter")],
            Cmp::Ge,
            6,
        );
        let ms = [Marking::new(vec![0, 8]), Marking::new(vec![0, 3])];
        assert!(!eval_atom(&n, &a, &vars, &ms).unwrap());
        let a5 = Atom::linear(
            vec![Term::new(1, "p1", "counter"), Term::new(-1, "p2", "counter")],
            Cmp::Ge,
            5,
        );
        assert!(eval_atom(&n, &a5, &vars, &ms).unwrap());
    }

    #[test]
    fn enabledness_per_trace() {
        let n = net();
        let vars = vec!["a".to_string(), "b".to_string()];
        let ms = [Marking::new(vec![3, 0]), Marking::new(vec![2, 0])];
        assert!(eval_atom(&n, &Atom::enabled("a", "t"), &vars, &ms).unwrap());
        assert!(!eval_atom(&n, &Atom::enabled("b", "t"), &vars, &ms).unwrap());
    }

    #[test]
    fn resolution_errors() {
        let n = net();
        let vars = vec!["a".to_string()];
        assert_eq!(
            ResolvedAtom::resolve(&Atom::enabled("z", "t"), &n, &vars),
            Err(ResolveError::UnknownVar("z".into()))
        );
        assert!(matches!(
            ResolvedAtom::resolve(&Atom::enabled("a", "nope"), &n, &vars),
            Err(ResolveError::Net(NetError::UnknownTransition(_)))
        ));
    }

    #[test]
    fn table_deduplicates() {
        let e = LtlExpr::and(
            LtlExpr::atom(Atom::enabled("a", "t")),
            LtlExpr::finally(LtlExpr::atom(Atom::enabled("a", "t"))),
        );
        assert_eq!(AtomTable::from_expr(&e).len(), 1);
    }
}
