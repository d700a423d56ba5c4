use super::ast::*;

/// Pushes negations down to atoms.
///
/// Negated linear atoms become the complementary comparison (`=` becomes a
/// disjunction of the two strict comparisons); negated enabledness atoms stay
/// as negative literals. Temporal duals: `!X a = X !a`, `!F a = G !a`,
/// `!G a = F !a`, `!(a U b) = !a R !b`, `!(a R b) = !a U !b`.
pub fn to_nnf(e: &LtlExpr) -> LtlExpr {
    nnf(e, false)
}

fn nnf(e: &LtlExpr, neg: bool) -> LtlExpr {
    use LtlExpr::*;
    match e {
        Atom(a) if !neg => Atom(a.clone()),
        Atom(super::ast::Atom::Linear(c)) => negate_linear(c),
        Atom(a) => LtlExpr::not(Atom(a.clone())),
        Not(a) => nnf(a, !neg),
        And(a, b) if !neg => LtlExpr::and(nnf(a, false), nnf(b, false)),
        And(a, b) => LtlExpr::or(nnf(a, true), nnf(b, true)),
        Or(a, b) if !neg => LtlExpr::or(nnf(a, false), nnf(b, false)),
        Or(a, b) => LtlExpr::and(nnf(a, true), nnf(b, true)),
        Next(a) => LtlExpr::next(nnf(a, neg)),
        Finally(a) if !neg => LtlExpr::finally(nnf(a, false)),
        Finally(a) => LtlExpr::globally(nnf(a, true)),
        Globally(a) if !neg => LtlExpr::globally(nnf(a, false)),
        Globally(a) => LtlExpr::finally(nnf(a, true)),
        Until(a, b) if !neg => LtlExpr::until(nnf(a, false), nnf(b, false)),
        Until(a, b) => LtlExpr::release(nnf(a, true), nnf(b, true)),
        Release(a, b) if !neg => LtlExpr::release(nnf(a, false), nnf(b, false)),
        Release(a, b) => LtlExpr::until(nnf(a, true), nnf(b, true)),
    }
}

fn negate_linear(c: &LinearConstraint) -> LtlExpr {
    let flip = |cmp| LtlExpr::Atom(Atom::Linear(LinearConstraint::new(c.terms.clone(), cmp, c.bound)));
    match c.cmp {
        Cmp::Lt => flip(Cmp::Ge),
        Cmp::Le => flip(Cmp::Gt),
        Cmp::Ge => flip(Cmp::Lt),
        Cmp::Gt => flip(Cmp::Le),
        Cmp::Eq => LtlExpr::or(flip(Cmp::Lt), flip(Cmp::Gt)),
    }
}

/// True if negation only appears directly above enabledness atoms and no
/// linear atom is negated.
pub fn is_nnf(e: &LtlExpr) -> bool {
    match e {
        LtlExpr::Not(a) => matches!(**a, LtlExpr::Atom(Atom::Enabled { .. })),
        e => e.children().into_iter().all(is_nnf),
    }
}

/// Dualizes the quantifier and negates the body. A body that is already a
/// negation is unwrapped instead, so negating twice gives back the original.
pub fn negate_query(q: &HyperQuery) -> HyperQuery {
    let body = match &q.body {
        LtlExpr::Not(inner) => (**inner).clone(),
        b => LtlExpr::not(b.clone()),
    };
    HyperQuery::new(q.quantifier.dual(), q.vars.clone(), body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_query;

    fn en(t: &str) -> LtlExpr {
        LtlExpr::atom(Atom::enabled("p", t))
    }

    fn lin(cmp: Cmp, b: i64) -> LtlExpr {
        LtlExpr::atom(Atom::linear(vec![Term::new(1, "p1", "P")], cmp, b))
    }

    #[test]
    fn not_finally_becomes_globally_not() {
        let e = LtlExpr::not(LtlExpr::finally(en("a")));
        assert_eq!(to_nnf(&e), LtlExpr::globally(LtlExpr::not(en("a"))));
        let e = LtlExpr::not(LtlExpr::finally(lin(Cmp::Ge, 3)));
        assert_eq!(to_nnf(&e), LtlExpr::globally(lin(Cmp::Lt, 3)));
    }

    #[test]
    fn comparator_flip() {
        assert_eq!(to_nnf(&LtlExpr::not(lin(Cmp::Ge, 3))), lin(Cmp::Lt, 3));
        assert_eq!(to_nnf(&LtlExpr::not(lin(Cmp::Le, 3))), lin(Cmp::Gt, 3));
        assert_eq!(
            to_nnf(&LtlExpr::not(lin(Cmp::Eq, 3))),
            LtlExpr::or(lin(Cmp::Lt, 3), lin(Cmp::Gt, 3))
        );
    }

    #[test]
    fn until_release_duality() {
        let e = LtlExpr::not(LtlExpr::until(en("a"), en("b")));
        assert_eq!(
            to_nnf(&e),
            LtlExpr::release(LtlExpr::not(en("a")), LtlExpr::not(en("b")))
        );
        assert_eq!(to_nnf(&LtlExpr::not(to_nnf(&e))), LtlExpr::until(en("a"), en("b")));
    }

    #[test]
    fn next_and_double_negation() {
        let e = LtlExpr::not(LtlExpr::next(LtlExpr::not(LtlExpr::not(en("a")))));
        assert_eq!(to_nnf(&e), LtlExpr::next(LtlExpr::not(en("a"))));
        assert!(is_nnf(&to_nnf(&e)));
        assert!(!is_nnf(&e));
    }

    #[test]
    fn negate_query_is_an_involution() {
        let q = parse_query("E p1 p2 : F p1.x = 1 && G p2.en(t)").unwrap();
        let n = negate_query(&q);
        assert_eq!(n.quantifier, Quantifier::Forall);
        assert_eq!(negate_query(&n), q);
    }

    #[test]
    fn negated_forall_globally() {
        let q = parse_query("A p1 : G p1.en(a)").unwrap();
        let n = negate_query(&q);
        assert_eq!(n.quantifier, Quantifier::Exists);
        assert_eq!(
            to_nnf(&n.body),
            LtlExpr::finally(LtlExpr::not(LtlExpr::atom(Atom::enabled("p1", "a"))))
        );
    }
}
