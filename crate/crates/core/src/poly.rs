//! Multivariate polynomials over exact rationals.
//!
//! Sparse representation: a sorted map from exponent multi-index to a
//! nonzero [`Rational`] coefficient. Every multi-index stored in a
//! polynomial has length `dim`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::text;

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exponent vector. Used both for monomials `x^K` and for derivative
/// multi-indices `∂^K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn from_vec(exps: Vec<u32>) -> Self {
        MultiIndex(exps)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn bump(&self, var: usize, by: u32) -> MultiIndex {
        let mut e = self.0.clone();
        e[var] += by;
        MultiIndex(e)
    }

    /// `self - other`, or `None` when some component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    /// Componentwise `self ≤ other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `K!` = product of factorials of the components.
    pub fn factorial(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &e| acc * factorial(e))
    }

    /// `K!/(K-I)!`, the coefficient produced by `∂^I x^K`. Zero unless `I ≤ K`.
    pub fn falling_factorial(&self, by: &MultiIndex) -> BigInt {
        let mut acc = BigInt::one();
        for (&k, &i) in self.0.iter().zip(&by.0) {
            if i > k {
                return BigInt::zero();
            }
            for j in 0..i {
                acc *= BigInt::from(k - j);
            }
        }
        acc
    }

    /// All multi-indices of the given dimension with total degree ≤ `max`,
    /// in increasing total degree.
    pub fn all_up_to(dim: usize, max: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for total in 0..=max {
            let mut cur = vec![0u32; dim];
            compositions(dim, total, 0, &mut cur, &mut out);
        }
        out
    }
}

fn compositions(dim: usize, left: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if dim == 0 {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == dim - 1 {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e;
        compositions(dim, left - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Polynomial in `dim` variables with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::one())
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(dim, MultiIndex::zero(dim), c)
    }

    /// The coordinate function `x_var` (0-based).
    pub fn var(dim: usize, var: usize) -> Self {
        assert!(var < dim, "variable index {var} out of range for dim {dim}");
        Self::monomial(dim, MultiIndex::unit(dim, var), Rational::one())
    }

    pub fn monomial(dim: usize, exps: MultiIndex, c: Rational) -> Self {
        assert_eq!(exps.dim(), dim, "multi-index length must equal dim");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Polynomial { dim, terms }
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Rational)>,
    {
        let mut p = Polynomial::zero(dim);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MultiIndex) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::total).max()
    }

    pub fn add_term(&mut self, m: MultiIndex, c: Rational) {
        debug_assert_eq!(m.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &MultiIndex, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.add(m), v * c)).collect(),
        }
    }

    /// `∂/∂x_var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, c) in &self.terms {
            let e = m.get(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.terms.insert(MultiIndex(exps), c * int(e as i64));
        }
        out
    }

    /// `∂^K` for a derivative multi-index `K`.
    pub fn derivative_multi(&self, k: &MultiIndex) -> Polynomial {
        if k.is_zero() {
            return self.clone();
        }
        let mut out = Polynomial::zero(self.dim);
        for (m, c) in &self.terms {
            if let Some(rest) = m.checked_sub(k) {
                let f = m.falling_factorial(k);
                out.terms.insert(rest, c * Rational::from_integer(f));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::one(self.dim);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.dim);
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exps()) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    pub fn parse(dim: usize, src: &str) -> Result<Polynomial> {
        let terms = text::parse_terms(dim, src)?;
        let mut p = Polynomial::zero(dim);
        for t in terms {
            if let Some(pos) = t.basis_position() {
                return Err(Error::parse(src, pos, "polynomial term without derivative factors"));
            }
            p.add_term(t.mono, t.coef);
        }
        Ok(p)
    }

    /// Terms in display order: descending total degree, then descending
    /// lexicographic exponent order.
    pub(crate) fn display_terms(&self) -> Vec<(&MultiIndex, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| b.0.total().cmp(&a.0.total()).then_with(|| b.0.cmp(a.0)));
        v
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.display_terms().into_iter().enumerate() {
            let body = text::format_scaled_monomial(self.dim, &c.abs(), m);
            match (i, c.is_negative()) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.dim);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.add(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(dim: usize, s: &str) -> Polynomial {
        Polynomial::parse(dim, s).unwrap()
    }

    #[test]
    fn arithmetic() {
        let a = p(2, "x + y");
        let b = p(2, "x - y");
        assert_eq!(&a * &b, p(2, "x^2 - y^2"));
        assert_eq!(&a + &b, p(2, "2*x"));
        assert!((&a - &a).is_zero());
        assert_eq!(a.pow(2), p(2, "x^2 + 2*x*y + y^2"));
    }

    #[test]
    fn derivatives() {
        let f = p(2, "x^3*y^2 + 5*y");
        assert_eq!(f.derivative(0), p(2, "3*x^2*y^2"));
        assert_eq!(f.derivative(1), p(2, "2*x^3*y + 5"));
        let k = MultiIndex::from_vec(vec![2, 1]);
        assert_eq!(f.derivative_multi(&k), p(2, "12*x*y"));
        assert!(f.derivative_multi(&MultiIndex::from_vec(vec![4, 0])).is_zero());
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "1", "-3/4", "x*y", "-x^2 + 1/2*x*y - 7", "x4^3*x1 - x2"] {
            let dim = if s.contains("x4") { 4 } else { 2 };
            let a = p(dim, s);
            assert_eq!(p(dim, &a.to_string()), a, "{s}");
        }
        assert_eq!(p(2, "y*x + x*y").to_string(), "2*x*y");
        assert_eq!(p(2, "1 - x^2").to_string(), "-x^2 + 1");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Polynomial::parse(2, "x + z").is_err());
        assert!(Polynomial::parse(2, "x * d/dx").is_err());
        assert!(Polynomial::parse(2, "x +").is_err());
        assert!(Polynomial::parse(2, "3/0").is_err());
    }

    #[test]
    fn all_up_to_counts() {
        // C(d + k, d) monomials of degree ≤ k
        assert_eq!(MultiIndex::all_up_to(2, 3).len(), 10);
        assert_eq!(MultiIndex::all_up_to(3, 2).len(), 10);
        assert_eq!(MultiIndex::all_up_to(1, 4).len(), 5);
    }
}
