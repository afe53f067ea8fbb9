//! Exact linear systems over ℚ.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::poly::Rational;

/// A sparse linear equation `Σ coeffs[j] · u_j = rhs`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Equation {
    pub coeffs: BTreeMap<usize, Rational>,
    pub rhs: Rational,
}

impl Equation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, var: usize, c: &Rational) {
        let e = self.coeffs.entry(var).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&var);
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty() && self.rhs.is_zero()
    }
}

/// Reduced row echelon form of an augmented system.
#[derive(Clone, Debug)]
pub struct Rref {
    /// `(pivot column, row)`; rows are dense over `unknowns` plus rhs.
    pub rows: Vec<(usize, Vec<Rational>)>,
    pub unknowns: usize,
    /// Some row reduced to `0 = c` with `c ≠ 0`.
    pub inconsistent: bool,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        let pivots = self.pivots();
        (0..self.unknowns).filter(|c| !pivots.contains(c)).collect()
    }

    /// Solution with the free variables set to `free` (indexed by column).
    pub fn solve_with(&self, free: &BTreeMap<usize, Rational>) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.unknowns];
        for (c, v) in free {
            x[*c] = v.clone();
        }
        for (p, row) in &self.rows {
            let mut v = row[self.unknowns].clone();
            for (c, coef) in row.iter().enumerate().take(self.unknowns) {
                if c != *p && !coef.is_zero() {
                    v -= coef * &x[c];
                }
            }
            x[*p] = v;
        }
        x
    }
}

/// Gauss–Jordan elimination.
pub fn rref(equations: &[Equation], unknowns: usize) -> Rref {
    let mut m: Vec<Vec<Rational>> = equations
        .iter()
        .filter(|e| !e.is_trivial())
        .map(|e| {
            let mut row = vec![Rational::zero(); unknowns + 1];
            for (c, v) in &e.coeffs {
                row[*c] = v.clone();
            }
            row[unknowns] = e.rhs.clone();
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..unknowns {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let inconsistent = m[r..].iter().any(|row| !row[unknowns].is_zero());
    m.truncate(r);
    Rref {
        rows: pivots.into_iter().zip(m).collect(),
        unknowns,
        inconsistent,
    }
}

/// The rational with the smallest denominator (then numerator) in `[lo, hi]`.
pub fn simplest_rational_in(lo: f64, hi: f64) -> Rational {
    assert!(lo <= hi, "empty interval");
    if lo <= 0.0 && hi >= 0.0 {
        return Rational::zero();
    }
    if hi < 0.0 {
        return -simplest_rational_in(-hi, -lo);
    }
    // Stern–Brocot descent on positive reals
    let (mut a, mut b, mut c, mut d) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..10_000 {
        let (p, q) = (a + c, b + d);
        let v = p as f64 / q as f64;
        if v < lo {
            // move right: skip as many steps as possible
            let k = step_count(a, b, c, d, lo, true);
            a += k * c;
            b += k * d;
        } else if v > hi {
            let k = step_count(c, d, a, b, hi, false);
            c += k * a;
            d += k * b;
        } else {
            return Rational::new(p.into(), q.into());
        }
    }
    Rational::from_float((lo + hi) / 2.0).unwrap_or_else(Rational::zero)
}

// largest k ≥ 1 with (a + k c)/(b + k d) still on the wrong side of `bound`
fn step_count(a: i64, b: i64, c: i64, d: i64, bound: f64, below: bool) -> i64 {
    let mut k = 1i64;
    let wrong = |k: i64| {
        let v = (a + k * c) as f64 / (b + k * d) as f64;
        if below {
            v < bound
        } else {
            v > bound
        }
    };
    while wrong(k * 2) && k < (1 << 40) {
        k *= 2;
    }
    let (mut lo, mut hi) = (k, k * 2);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if wrong(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.max(1)
}

/// Nearest f64, saturating to ±∞.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(if x.is_positive() { f64::INFINITY } else { f64::NEG_INFINITY })
}
