//! Recursive-descent parser for the query language.
//!
//! ```text
//! query   := ("E"|"A") ident+ ":" expr
//! expr    := "(" expr ")" | "!" expr | expr "&&" expr | expr "||" expr
//!          | ("X"|"F"|"G") expr | expr "U" expr | atom
//! atom    := ident "." "en" "(" ident ")" | linexpr cmp int
//! linexpr := term (("+"|"-") term)*
//! term    := [int "*"] ident "." ident
//! cmp     := "<" | "<=" | "=" | ">=" | ">"
//! ```
//!
//! Precedence, tightest first: `!`, then `X F G`, then `U` (right associative),
//! then `&&`, then `||`. `true` and `false` are accepted as constants.

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: alternation not supported")]
    Alternation { line: usize, col: usize },
    #[error("{line}:{col}: unbound trace variable `{var}`")]
    Unbound { var: String, line: usize, col: usize },
    #[error("{line}:{col}: duplicate trace variable `{var}`")]
    Duplicate { var: String, line: usize, col: usize },
}

const RESERVED: &[&str] = &["E", "A", "X", "F", "G", "U", "true", "false"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Dot,
    LParen,
    RParen,
    Bang,
    AndAnd,
    OrOr,
    Plus,
    Minus,
    Star,
    Colon,
    Cmp(Cmp),
    Eof,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| QueryError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '.' => Tok::Dot,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            ':' => Tok::Colon,
            '=' => Tok::Cmp(Cmp::Eq),
            '!' => Tok::Bang,
            '&' if chars.get(i + 1) == Some(&'&') => {
                adv = 2;
                Tok::AndAnd
            }
            '|' if chars.get(i + 1) == Some(&'|') => {
                adv = 2;
                Tok::OrOr
            }
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                if eq {
                    adv = 2;
                }
                Tok::Cmp(match (c, eq) {
                    ('<', false) => Cmp::Lt,
                    ('<', true) => Cmp::Le,
                    ('>', false) => Cmp::Gt,
                    _ => Cmp::Ge,
                })
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i + adv < chars.len() && chars[i + adv].is_ascii_digit() {
                    adv += 1;
                }
                let s: String = chars[start..start + adv].iter().collect();
                let n = s
                    .parse::<u64>()
                    .map_err(|_| err(l0, c0, format!("integer `{s}` out of range")))?;
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i + adv < chars.len()
                    && (chars[i + adv].is_ascii_alphanumeric() || chars[i + adv] == '_')
                {
                    adv += 1;
                }
                Tok::Ident(chars[start..start + adv].iter().collect())
            }
            c => return Err(err(l0, c0, format!("unexpected character `{c}`"))),
        };
        out.push(Spanned { tok, line: l0, col: c0 });
        i += adv;
        col += adv;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    // every trace-variable occurrence in the body, for scoping diagnostics
    uses: Vec<(String, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, QueryError> {
        let (line, col) = self.here();
        Err(QueryError::Syntax {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), QueryError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn quantifier_kw(&self) -> Option<Quantifier> {
        // a quantifier keyword must be followed by a variable name
        match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::Ident(_)) if s == "E" => Some(Quantifier::Exists),
            (Tok::Ident(s), Tok::Ident(_)) if s == "A" => Some(Quantifier::Forall),
            _ => None,
        }
    }

    fn query(&mut self) -> Result<HyperQuery, QueryError> {
        let quantifier = match self.quantifier_kw() {
            Some(q) => q,
            None => return self.error("expected quantifier `E` or `A`"),
        };
        let mut vars: Vec<String> = Vec::new();
        loop {
            // one quantifier block: Q ident+ [":"]
            self.bump();
            let mut count = 0;
            while let Tok::Ident(name) = self.peek().clone() {
                if RESERVED.contains(&name.as_str()) {
                    break;
                }
                let (line, col) = self.here();
                if vars.contains(&name) {
                    return Err(QueryError::Duplicate { var: name, line, col });
                }
                vars.push(name);
                self.bump();
                count += 1;
            }
            if count == 0 {
                return self.error("expected trace variable");
            }
            if *self.peek() == Tok::Colon {
                self.bump();
            }
            match self.quantifier_kw() {
                Some(q) if q == quantifier => continue,
                Some(_) => {
                    let (line, col) = self.here();
                    return Err(QueryError::Alternation { line, col });
                }
                None => break,
            }
        }
        let body = self.or()?;
        if *self.peek() != Tok::Eof {
            return self.error(format!("unexpected {}", describe(self.peek())));
        }
        for (var, line, col) in &self.uses {
            if !vars.contains(var) {
                return Err(QueryError::Unbound {
                    var: var.clone(),
                    line: *line,
                    col: *col,
                });
            }
        }
        Ok(HyperQuery::new(quantifier, vars, body))
    }

    fn or(&mut self) -> Result<LtlExpr, QueryError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::OrOr {
            self.bump();
            lhs = LtlExpr::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<LtlExpr, QueryError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::AndAnd {
            self.bump();
            lhs = LtlExpr::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<LtlExpr, QueryError> {
        let lhs = self.unary()?;
        if self.is_kw("U") {
            self.bump();
            let rhs = self.until()?;
            return Ok(LtlExpr::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlExpr, QueryError> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(LtlExpr::not(self.unary()?));
        }
        for (kw, ctor) in [
            ("X", LtlExpr::next as fn(LtlExpr) -> LtlExpr),
            ("F", LtlExpr::finally),
            ("G", LtlExpr::globally),
        ] {
            if self.is_kw(kw) && *self.peek_at(1) != Tok::Dot {
                self.bump();
                return Ok(ctor(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<LtlExpr, QueryError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(LtlExpr::tt())
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(LtlExpr::ff())
            }
            Tok::Ident(_) | Tok::Int(_) | Tok::Minus => self.atom().map(LtlExpr::Atom),
            t => self.error(format!("expected formula, found {}", describe(&t))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, QueryError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected {what}, found {}", describe(&t))),
        }
    }

    fn var_ref(&mut self) -> Result<String, QueryError> {
        let (line, col) = self.here();
        let v = self.ident("trace variable")?;
        self.uses.push((v.clone(), line, col));
        Ok(v)
    }

    fn int(&mut self) -> Result<i64, QueryError> {
        let neg = *self.peek() == Tok::Minus;
        if neg {
            self.bump();
        }
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = if neg {
                    0i64.checked_sub_unsigned(n)
                } else {
                    i64::try_from(n).ok()
                };
                match v {
                    Some(v) => {
                        self.bump();
                        Ok(v)
                    }
                    None => self.error("integer out of range"),
                }
            }
            t => self.error(format!("expected integer, found {}", describe(&t))),
        }
    }

    fn atom(&mut self) -> Result<Atom, QueryError> {
        // enabledness: ident "." "en" "("
        if let (Tok::Ident(_), Tok::Dot, Tok::Ident(en), Tok::LParen) =
            (self.peek(), self.peek_at(1), self.peek_at(2), self.peek_at(3))
        {
            if en == "en" {
                let var = self.var_ref()?;
                self.bump();
                self.bump();
                self.bump();
                let transition = self.ident("transition name")?;
                self.expect(Tok::RParen, "`)`")?;
                return Ok(Atom::Enabled { var, transition });
            }
        }
        let mut terms = vec![self.term(false)?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term(false)?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(self.term(true)?);
                }
                _ => break,
            }
        }
        let cmp = match self.peek() {
            Tok::Cmp(c) => *c,
            t => return self.error(format!("expected comparison, found {}", describe(t))),
        };
        self.bump();
        let bound = self.int()?;
        Ok(Atom::linear(terms, cmp, bound))
    }

    fn term(&mut self, negate: bool) -> Result<Term, QueryError> {
        let coef = if matches!(self.peek(), Tok::Int(_) | Tok::Minus) {
            let c = self.int()?;
            self.expect(Tok::Star, "`*`")?;
            c
        } else {
            1
        };
        let coef = if negate {
            match coef.checked_neg() {
                Some(c) => c,
                None => return self.error("coefficient out of range"),
            }
        } else {
            coef
        };
        let var = self.var_ref()?;
        self.expect(Tok::Dot, "`.`")?;
        let place = self.ident("place name")?;
        Ok(Term { coef, var, place })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Dot => "`.`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Bang => "`!`".into(),
        Tok::AndAnd => "`&&`".into(),
        Tok::OrOr => "`||`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Cmp(c) => format!("`{}`", c.symbol()),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_query(text: &str) -> Result<HyperQuery, QueryError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        uses: Vec::new(),
    };
    p.query()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn en(v: &str, t: &str) -> LtlExpr {
        LtlExpr::atom(Atom::enabled(v, t))
    }

    #[test]
    fn single_globally() {
        let q = parse_query("A p1 : G p1.en(t0)").unwrap();
        assert_eq!(q.quantifier, Quantifier::Forall);
        assert_eq!(q.vars, vec!["p1"]);
        assert_eq!(q.body, LtlExpr::globally(en("p1", "t0")));
    }

    #[test]
    fn unbound_variable() {
        let err = parse_query("E p1 : F p2.P >= 1").unwrap_err();
        assert_eq!(
            err,
            QueryError::Unbound {
                var: "p2".into(),
                line: 1,
                col: 10
            }
        );
    }

    #[test]
    fn alternation_rejected() {
        let err = parse_query("E p1 A p2 : F p1.x = 1").unwrap_err();
        assert!(matches!(err, QueryError::Alternation { .. }));
        assert!(err.to_string().contains("alternation not supported"));
        let err = parse_query("A p1 : E p2 : F p1.x = 1").unwrap_err();
        assert!(matches!(err, QueryError::Alternation { .. }));
    }

    #[test]
    fn repeated_same_quantifier_merges() {
        let q = parse_query("E p1 E p2 : F (p1.x = 1 && p2.x = 1)").unwrap();
        assert_eq!(q.vars, vec!["p1", "p2"]);
        let q = parse_query("E p1 : E p2 : F (p1.x = 1 && p2.x = 1)").unwrap();
        assert_eq!(q.vars, vec!["p1", "p2"]);
    }

    #[test]
    fn precedence() {
        let q = parse_query("E a : !a.en(t) U a.en(u) && F a.en(t) || X a.en(u)").unwrap();
        let expected = LtlExpr::or(
            LtlExpr::and(
                LtlExpr::until(LtlExpr::not(en("a", "t")), en("a", "u")),
                LtlExpr::finally(en("a", "t")),
            ),
            LtlExpr::next(en("a", "u")),
        );
        assert_eq!(q.body, expected);
    }

    #[test]
    fn until_is_right_associative() {
        let q = parse_query("E a : a.en(x) U a.en(y) U a.en(z)").unwrap();
        assert_eq!(
            q.body,
            LtlExpr::until(en("a", "x"), LtlExpr::until(en("a", "y"), en("a", "z")))
        );
    }

    #[test]
    fn linear_terms_and_signs() {
        let q = parse_query("E p1 p2 : p1.counter - p2.counter >= 6").unwrap();
        assert_eq!(
            q.body,
            LtlExpr::atom(Atom::linear(
                vec![Term::new(1, "p1", "counter"), Term::new(-1, "p2", "counter")],
                Cmp::Ge,
                6
            ))
        );
        let q = parse_query("E p : -2*p.x + 3*p.y - 4*p.z < -1").unwrap();
        assert_eq!(
            q.body,
            LtlExpr::atom(Atom::linear(
                vec![Term::new(-2, "p", "x"), Term::new(3, "p", "y"), Term::new(-4, "p", "z")],
                Cmp::Lt,
                -1
            ))
        );
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_query("E p :\n  F (p.x = 1").unwrap_err();
        assert_eq!(
            err,
            QueryError::Syntax {
                line: 2,
                col: 13,
                msg: "expected `)`, found end of input".into()
            }
        );
    }

    #[test]
    fn place_named_like_keyword() {
        let q = parse_query("E p : F p.F = 1").unwrap();
        assert_eq!(
            q.body,
            LtlExpr::finally(LtlExpr::atom(Atom::linear(vec![Term::new(1, "p", "F")], Cmp::Eq, 1)))
        );
    }

    #[test]
    fn duplicate_variable() {
        assert!(matches!(
            parse_query("E p p : F p.x = 1"),
            Err(QueryError::Duplicate { .. })
        ));
    }
}
