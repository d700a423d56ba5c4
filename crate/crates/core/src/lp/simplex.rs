//! Dense two-phase simplex over exact rationals with Bland's rule.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::formula::Cmp;

/// `Σ coeffs[j]·x_j cmp rhs` with all x_j ≥ 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<(usize, BigRational)>,
    pub cmp: Cmp,
    pub rhs: BigRational,
}

pub fn int(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

struct Tableau {
    /// rows × (cols + 1); the last column is the right-hand side.
    a: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [BigRational]) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for v in self.a[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = self.a[r].clone();
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |row: &mut [BigRational]| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        };
        for (i, row) in self.a.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.basis[r] = c;
    }

    /// Minimizes the objective whose reduced-cost row is `obj` (last entry is
    /// minus the current value). Only columns in `allowed` may enter.
    fn minimize(&mut self, obj: &mut [BigRational], allowed: &dyn Fn(usize) -> bool) -> bool {
        loop {
            let Some(c) = (0..self.cols).find(|&j| allowed(j) && obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(BigRational, usize)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((b, bi)) => ratio < *b || (ratio == *b && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((ratio, i));
                }
            }
            match best {
                Some((_, r)) => self.pivot(r, c, obj),
                None => return false,
            }
        }
    }
}

/// Exact feasibility of `rows` over nonnegative rationals in `vars` variables.
/// Strict comparisons are handled with an auxiliary ε ≤ 1 that is maximized.
pub fn feasible(vars: usize, rows: &[Row]) -> bool {
    let strict = rows.iter().any(|r| matches!(r.cmp, Cmp::Lt | Cmp::Gt));
    let eps = vars;
    let structural = vars + usize::from(strict);
    let mut rows: Vec<Row> = rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            match r.cmp {
                Cmp::Lt => {
                    r.coeffs.push((eps, BigRational::one()));
                    r.cmp = Cmp::Le;
                }
                Cmp::Gt => {
                    r.coeffs.push((eps, -BigRational::one()));
                    r.cmp = Cmp::Ge;
                }
                _ => {}
            }
            r
        })
        .collect();
    if strict {
        rows.push(Row {
            coeffs: vec![(eps, BigRational::one())],
            cmp: Cmp::Le,
            rhs: BigRational::one(),
        });
    }
    let slacks = rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
    let art0 = structural + slacks;
    let cols = art0 + rows.len();
    let mut a = Vec::with_capacity(rows.len());
    let mut next_slack = structural;
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![BigRational::zero(); cols + 1];
        for (j, v) in &r.coeffs {
            row[*j] += v;
        }
        match r.cmp {
            Cmp::Le => row[next_slack] = BigRational::one(),
            Cmp::Ge => row[next_slack] = -BigRational::one(),
            _ => {}
        }
        if r.cmp != Cmp::Eq {
            next_slack += 1;
        }
        row[cols] = r.rhs.clone();
        if row[cols].is_negative() {
            row.iter_mut().for_each(|v| *v = -v.clone());
        }
        row[art0 + i] = BigRational::one();
        a.push(row);
    }
    let mut t = Tableau {
        basis: (art0..cols).collect(),
        a,
        cols,
    };

    // phase 1: minimize the sum of artificials
    let mut obj = vec![BigRational::zero(); cols + 1];
    for row in &t.a {
        for j in 0..art0 {
            obj[j] -= &row[j];
        }
        obj[cols] -= &row[cols];
    }
    t.minimize(&mut obj, &|j| j < art0);
    if !obj[cols].is_zero() {
        return false;
    }
    if !strict {
        return true;
    }

    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.a.len() {
        if t.basis[i] >= art0 {
            match (0..art0).find(|&j| !t.a[i][j].is_zero()) {
                Some(c) => t.pivot(i, c, &mut obj),
                None => {
                    t.a.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // phase 2: maximize ε, i.e. minimize -ε
    let mut obj = vec![BigRational::zero(); cols + 1];
    obj[eps] = -BigRational::one();
    for (i, &b) in t.basis.iter().enumerate() {
        if !obj[b].is_zero() {
            let f = obj[b].clone();
            for (o, v) in obj.iter_mut().zip(&t.a[i]) {
                if !v.is_zero() {
                    *o -= &f * v;
                }
            }
        }
    }
    let bounded = t.minimize(&mut obj, &|j| j < art0);
    debug_assert!(bounded, "ε is bounded by 1");
    // obj[cols] = -(objective value) = ε*
    obj[cols].is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(coeffs: &[(usize, i128)], cmp: Cmp, rhs: i128) -> Row {
        Row {
            coeffs: coeffs.iter().map(|&(j, v)| (j, int(v))).collect(),
            cmp,
            rhs: int(rhs),
        }
    }

    #[test]
    fn trivial() {
        assert!(feasible(2, &[]));
        assert!(feasible(1, &[row(&[(0, 1)], Cmp::Ge, 3)]));
        assert!(!feasible(1, &[row(&[(0, 1)], Cmp::Le, -1)]));
    }

    #[test]
    fn equalities() {
        // x + y = 1, x - y = 1 → x = 1, y = 0
        let rs = [row(&[(0, 1), (1, 1)], Cmp::Eq, 1), row(&[(0, 1), (1, -1)], Cmp::Eq, 1)];
        assert!(feasible(2, &rs));
        let mut bad = rs.to_vec();
        bad.push(row(&[(1, 1)], Cmp::Ge, 1));
        assert!(!feasible(2, &bad));
    }

    #[test]
    fn strictness() {
        // x ≤ 2 ∧ x ≥ 2 feasible; x < 2 ∧ x ≥ 2 not
        assert!(feasible(1, &[row(&[(0, 1)], Cmp::Le, 2), row(&[(0, 1)], Cmp::Ge, 2)]));
        assert!(!feasible(1, &[row(&[(0, 1)], Cmp::Lt, 2), row(&[(0, 1)], Cmp::Ge, 2)]));
        // rational solutions count: 0 < 2x < 1
        assert!(feasible(1, &[row(&[(0, 2)], Cmp::Gt, 0), row(&[(0, 2)], Cmp::Lt, 1)]));
        assert!(!feasible(1, &[row(&[(0, 1)], Cmp::Lt, 0)]));
    }

    #[test]
    fn redundant_rows_with_strictness() {
        let rs = [
            row(&[(0, 1), (1, 1)], Cmp::Eq, 2),
            row(&[(0, 2), (1, 2)], Cmp::Eq, 4),
            row(&[(0, 1)], Cmp::Gt, 1),
        ];
        assert!(feasible(2, &rs));
        let mut more = rs.to_vec();
        more.push(row(&[(1, 1)], Cmp::Gt, 1));
        assert!(!feasible(2, &more));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example constraints; Bland's rule must terminate.
        let rs = [
            Row {
                coeffs: vec![
                    (0, BigRational::new(1.into(), 4.into())),
                    (1, int(-60)),
                    (2, BigRational::new((-1).into(), 25.into())),
                    (3, int(9)),
                ],
                cmp: Cmp::Le,
                rhs: int(0),
            },
            Row {
                coeffs: vec![
                    (0, BigRational::new(1.into(), 2.into())),
                    (1, int(-90)),
                    (2, BigRational::new((-1).into(), 50.into())),
                    (3, int(3)),
                ],
                cmp: Cmp::Le,
                rhs: int(0),
            },
            row(&[(2, 1)], Cmp::Le, 1),
            row(&[(2, 1)], Cmp::Gt, 0),
        ];
        assert!(feasible(4, &rs));
    }
}
