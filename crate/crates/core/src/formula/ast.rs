use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Self {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, lhs: i128, rhs: i128) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

/// `coef * var.place`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub coef: i64,
    pub var: String,
    pub place: String,
}

impl Term {
    pub fn new(coef: i64, var: impl Into<String>, place: impl Into<String>) -> Self {
        Term {
            coef,
            var: var.into(),
            place: place.into(),
        }
    }
}

/// `Σ terms  cmp  bound`. An empty term list is the constant `0 cmp bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearConstraint {
    pub terms: Vec<Term>,
    pub cmp: Cmp,
    pub bound: i64,
}

impl LinearConstraint {
    pub fn new(terms: Vec<Term>, cmp: Cmp, bound: i64) -> Self {
        LinearConstraint { terms, cmp, bound }
    }

    /// Truth value when there are no terms.
    pub fn constant_value(&self) -> Option<bool> {
        self.terms
            .is_empty()
            .then(|| self.cmp.holds(0, self.bound as i128))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// `var.en(transition)`
    Enabled { var: String, transition: String },
    Linear(LinearConstraint),
}

impl Atom {
    pub fn enabled(var: impl Into<String>, transition: impl Into<String>) -> Self {
        Atom::Enabled {
            var: var.into(),
            transition: transition.into(),
        }
    }

    pub fn linear(terms: Vec<Term>, cmp: Cmp, bound: i64) -> Self {
        Atom::Linear(LinearConstraint::new(terms, cmp, bound))
    }

    pub fn vars(&self) -> Vec<&str> {
        match self {
            Atom::Enabled { var, .. } => vec![var.as_str()],
            Atom::Linear(c) => c.terms.iter().map(|t| t.var.as_str()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtlExpr {
    Atom(Atom),
    Not(Box<LtlExpr>),
    And(Box<LtlExpr>, Box<LtlExpr>),
    Or(Box<LtlExpr>, Box<LtlExpr>),
    Next(Box<LtlExpr>),
    Finally(Box<LtlExpr>),
    Globally(Box<LtlExpr>),
    Until(Box<LtlExpr>, Box<LtlExpr>),
    /// Only produced by negation normal form; not part of the query syntax.
    Release(Box<LtlExpr>, Box<LtlExpr>),
}

impl LtlExpr {
    pub fn tt() -> Self {
        LtlExpr::Atom(Atom::linear(vec![], Cmp::Ge, 0))
    }

    pub fn ff() -> Self {
        LtlExpr::Atom(Atom::linear(vec![], Cmp::Ge, 1))
    }

    pub fn atom(a: Atom) -> Self {
        LtlExpr::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: LtlExpr) -> Self {
        LtlExpr::Not(Box::new(e))
    }

    pub fn and(a: LtlExpr, b: LtlExpr) -> Self {
        LtlExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: LtlExpr, b: LtlExpr) -> Self {
        LtlExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn next(e: LtlExpr) -> Self {
        LtlExpr::Next(Box::new(e))
    }

    pub fn finally(e: LtlExpr) -> Self {
        LtlExpr::Finally(Box::new(e))
    }

    pub fn globally(e: LtlExpr) -> Self {
        LtlExpr::Globally(Box::new(e))
    }

    pub fn until(a: LtlExpr, b: LtlExpr) -> Self {
        LtlExpr::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: LtlExpr, b: LtlExpr) -> Self {
        LtlExpr::Release(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(items: impl IntoIterator<Item = LtlExpr>) -> Self {
        items
            .into_iter()
            .reduce(LtlExpr::and)
            .unwrap_or_else(LtlExpr::tt)
    }

    /// Constant truth value, if this is a term-free linear atom.
    pub fn as_constant(&self) -> Option<bool> {
        match self {
            LtlExpr::Atom(Atom::Linear(c)) => c.constant_value(),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&LtlExpr> {
        use LtlExpr::*;
        match self {
            Atom(_) => vec![],
            Not(a) | Next(a) | Finally(a) | Globally(a) => vec![a],
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => vec![a, b],
        }
    }

    /// Number of operator nodes (atoms excluded).
    pub fn operator_count(&self) -> usize {
        match self {
            LtlExpr::Atom(_) => 0,
            e => 1 + e.children().iter().map(|c| c.operator_count()).sum::<usize>(),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let LtlExpr::Atom(a) = e {
                out.push(a);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a LtlExpr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Splits nested conjunctions into their conjuncts (left to right).
    pub fn conjuncts(&self) -> Vec<&LtlExpr> {
        match self {
            LtlExpr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            e => vec![e],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HyperQuery {
    pub quantifier: Quantifier,
    pub vars: Vec<String>,
    pub body: LtlExpr,
}

impl HyperQuery {
    pub fn new(quantifier: Quantifier, vars: Vec<String>, body: LtlExpr) -> Self {
        HyperQuery {
            quantifier,
            vars,
            body,
        }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coef == 1 {
            write!(f, "{}.{}", self.var, self.place)
        } else {
            write!(f, "{}*{}.{}", self.coef, self.var, self.place)
        }
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.constant_value() {
            return write!(f, "{}", if v { "true" } else { "false" });
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{t}")?;
            } else if t.coef < 0 && t.coef != i64::MIN {
                let pos = Term::new(-t.coef, t.var.clone(), t.place.clone());
                write!(f, " - {pos}")?;
            } else {
                write!(f, " + {t}")?;
            }
        }
        write!(f, " {} {}", self.cmp.symbol(), self.bound)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Enabled { var, transition } => write!(f, "{var}.en({transition})"),
            Atom::Linear(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for LtlExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use LtlExpr::*;
        match self {
            Atom(a) => write!(f, "{a}"),
            Not(a) => write!(f, "!{a}"),
            Next(a) => write!(f, "X {a}"),
            Finally(a) => write!(f, "F {a}"),
            Globally(a) => write!(f, "G {a}"),
            And(a, b) => write!(f, "({a} && {b})"),
            Or(a, b) => write!(f, "({a} || {b})"),
            Until(a, b) => write!(f, "({a} U {b})"),
            Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

impl fmt::Display for HyperQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = match self.quantifier {
            Quantifier::Exists => "E",
            Quantifier::Forall => "A",
        };
        write!(f, "{q} {} : {}", self.vars.join(" "), self.body)
    }
}
