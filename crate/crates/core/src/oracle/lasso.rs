//! Direct LTL semantics on lasso words.

use crate::formula::{Atom, AtomTable, LtlExpr};

/// Positions `0..n` of a lasso with `prefix` positions before the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub prefix: usize,
    pub cycle: usize,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.prefix + self.cycle
    }

    pub fn is_empty(&self) -> bool {
        self.cycle == 0
    }

    pub fn succ(&self, i: usize) -> usize {
        if i + 1 < self.len() {
            i + 1
        } else {
            self.prefix
        }
    }
}

pub fn next(s: Shape, a: &[bool]) -> Vec<bool> {
    (0..s.len()).map(|i| a[s.succ(i)]).collect()
}

/// Least solution of `r = b ∨ (a ∧ X r)`.
pub fn until(s: Shape, a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut r = vec![false; s.len()];
    loop {
        let n: Vec<bool> = (0..s.len()).map(|i| b[i] || (a[i] && r[s.succ(i)])).collect();
        if n == r {
            return r;
        }
        r = n;
    }
}

/// Greatest solution of `r = b ∧ (a ∨ X r)`.
pub fn release(s: Shape, a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut r = vec![true; s.len()];
    loop {
        let n: Vec<bool> = (0..s.len()).map(|i| b[i] && (a[i] || r[s.succ(i)])).collect();
        if n == r {
            return r;
        }
        r = n;
    }
}

/// Truth of `e` at every position, with atoms looked up through `atom`.
pub fn eval_positions(e: &LtlExpr, s: Shape, atom: &impl Fn(&Atom, usize) -> bool) -> Vec<bool> {
    let n = s.len();
    let rec = |x: &LtlExpr| eval_positions(x, s, atom);
    match e {
        LtlExpr::Atom(a) => (0..n).map(|i| atom(a, i)).collect(),
        LtlExpr::Not(a) => rec(a).into_iter().map(|v| !v).collect(),
        LtlExpr::And(a, b) => rec(a).into_iter().zip(rec(b)).map(|(x, y)| x && y).collect(),
        LtlExpr::Or(a, b) => rec(a).into_iter().zip(rec(b)).map(|(x, y)| x || y).collect(),
        LtlExpr::Next(a) => next(s, &rec(a)),
        LtlExpr::Finally(a) => until(s, &vec![true; n], &rec(a)),
        LtlExpr::Globally(a) => release(s, &vec![false; n], &rec(a)),
        LtlExpr::Until(a, b) => until(s, &rec(a), &rec(b)),
        LtlExpr::Release(a, b) => release(s, &rec(a), &rec(b)),
    }
}

/// Evaluates `body` at position 0 of `prefix · cycle^ω`, where valuations are
/// indexed like `atoms`. Atoms missing from the table are false, except the
/// constant linear forms.
pub fn eval_ltl_lasso(body: &LtlExpr, atoms: &AtomTable, prefix: &[Vec<bool>], cycle: &[Vec<bool>]) -> bool {
    assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
    let s = Shape {
        prefix: prefix.len(),
        cycle: cycle.len(),
    };
    let letter = |i: usize| if i < prefix.len() { &prefix[i] } else { &cycle[i - prefix.len()] };
    let lookup = |a: &Atom, i: usize| {
        if let Atom::Linear(c) = a {
            if let Some(v) = c.constant_value() {
                return v;
            }
        }
        atoms.index_of(a).is_some_and(|k| letter(i)[k])
    };
    eval_positions(body, s, &lookup)[0]
}

/// Operator tables over position bitmasks, for every shape up to `max_len`
/// positions. Entries are computed with the functions above.
#[derive(Debug, Clone)]
pub struct MaskTables {
    max_len: usize,
    shapes: Vec<Shape>,
    next: Vec<Vec<u32>>,
    finally: Vec<Vec<u32>>,
    globally: Vec<Vec<u32>>,
    until: Vec<Vec<u32>>,
}

fn to_bits(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

fn to_mask(bits: &[bool]) -> u32 {
    bits.iter().enumerate().fold(0, |m, (i, &b)| m | (b as u32) << i)
}

impl MaskTables {
    pub fn new(max_len: usize) -> Self {
        assert!(max_len <= 8, "tables grow as 4^len");
        let mut t = MaskTables {
            max_len,
            shapes: Vec::new(),
            next: Vec::new(),
            finally: Vec::new(),
            globally: Vec::new(),
            until: Vec::new(),
        };
        for total in 1..=max_len {
            for prefix in 0..total {
                let s = Shape {
                    prefix,
                    cycle: total - prefix,
                };
                let size = 1u32 << total;
                let ones = vec![true; total];
                let zeros = vec![false; total];
                let un = |f: &dyn Fn(&[bool]) -> Vec<bool>| (0..size).map(|a| to_mask(&f(&to_bits(a, total)))).collect();
                t.next.push(un(&|a| next(s, a)));
                t.finally.push(un(&|a| until(s, &ones, a)));
                t.globally.push(un(&|a| release(s, &zeros, a)));
                let mut u = Vec::with_capacity((size * size) as usize);
                for a in 0..size {
                    for b in 0..size {
                        u.push(to_mask(&until(s, &to_bits(a, total), &to_bits(b, total))));
                    }
                }
                t.until.push(u);
                t.shapes.push(s);
            }
        }
        t
    }

    pub fn shape_id(&self, s: Shape) -> usize {
        let total = s.len();
        assert!(total >= 1 && total <= self.max_len && s.cycle >= 1);
        total * (total - 1) / 2 + s.prefix
    }

    pub fn shape(&self, id: usize) -> Shape {
        self.shapes[id]
    }

    pub fn full(&self, id: usize) -> u32 {
        (1u32 << self.shapes[id].len()) - 1
    }

    pub fn next(&self, id: usize, a: u32) -> u32 {
        self.next[id][a as usize]
    }

    pub fn finally(&self, id: usize, a: u32) -> u32 {
        self.finally[id][a as usize]
    }

    pub fn globally(&self, id: usize, a: u32) -> u32 {
        self.globally[id][a as usize]
    }

    pub fn until(&self, id: usize, a: u32, b: u32) -> u32 {
        let n = self.shapes[id].len();
        self.until[id][((a as usize) << n) | b as usize]
    }
}
