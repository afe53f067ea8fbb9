//! Multidifferential operators with polynomial coefficients.
//!
//! An operator of arity `m+1` is a finite sum
//! `(f₀,…,f_m) ↦ Σ C^{I₀…I_m} ∂^{I₀}f₀ ⋯ ∂^{I_m}f_m`, stored as a map from
//! the tuple of slot multi-indices to the coefficient polynomial. Equality
//! is equality of this normal form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Polynomial, Rational};
use crate::text;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultidiffOperator {
    dim: usize,
    arity: usize,
    terms: BTreeMap<Vec<MultiIndex>, Polynomial>,
}

impl MultidiffOperator {
    pub fn zero(dim: usize, arity: usize) -> Self {
        MultidiffOperator {
            dim,
            arity,
            terms: BTreeMap::new(),
        }
    }

    /// Arity-0 operator, i.e. a function.
    pub fn function(f: Polynomial) -> Self {
        let mut op = Self::zero(f.dim(), 0);
        op.add_term(Vec::new(), f);
        op
    }

    /// `f ↦ f`.
    pub fn identity(dim: usize) -> Self {
        let mut op = Self::zero(dim, 1);
        op.add_term(vec![MultiIndex::zero(dim)], Polynomial::one(dim));
        op
    }

    /// Pointwise multiplication `μ(f, g) = fg`.
    pub fn multiplication(dim: usize) -> Self {
        let mut op = Self::zero(dim, 2);
        op.add_term(
            vec![MultiIndex::zero(dim), MultiIndex::zero(dim)],
            Polynomial::one(dim),
        );
        op
    }

    /// Single term `c · ∂^{I₀} ⊗ … ⊗ ∂^{I_m}`.
    pub fn from_term(key: Vec<MultiIndex>, coef: Polynomial) -> Self {
        let mut op = Self::zero(coef.dim(), key.len());
        op.add_term(key, coef);
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<MultiIndex>, &Polynomial)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &[MultiIndex]) -> Polynomial {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(self.dim))
    }

    pub fn add_term(&mut self, key: Vec<MultiIndex>, coef: Polynomial) {
        assert_eq!(key.len(), self.arity, "term arity mismatch");
        debug_assert!(key.iter().all(|k| k.dim() == self.dim));
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coef);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        self.check_dim(other)?;
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let mut out = self.clone();
        out.add_assign(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    /// In-place sum; panics on shape mismatch.
    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.dim, other.dim, "operator dimension mismatch");
        assert_eq!(self.arity, other.arity, "operator arity mismatch");
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &Rational) {
        assert_eq!(self.arity, other.arity, "operator arity mismatch");
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v.scale(c));
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), v.scale(c));
        }
        out
    }

    /// Left multiplication by a function: `(pφ)(f…) = p · φ(f…)`.
    pub fn mul_function(&self, p: &Polynomial) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * p);
        }
        out
    }

    /// Evaluate on polynomial arguments.
    pub fn apply(&self, args: &[Polynomial]) -> Result<Polynomial> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        if let Some(bad) = args.iter().find(|a| a.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: bad.dim(),
            });
        }
        let mut out = Polynomial::zero(self.dim);
        for (k, c) in &self.terms {
            let mut t = c.clone();
            for (idx, f) in k.iter().zip(args) {
                if t.is_zero() {
                    break;
                }
                t = &t * &f.derivative_multi(idx);
            }
            out += &t;
        }
        Ok(out)
    }

    /// The operator `(f…) ↦ ∂_var(φ(f…))`, expanded by the Leibniz rule.
    pub fn derive(&self, var: usize) -> Self {
        let mut out = Self::zero(self.dim, self.arity);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.derivative(var));
            for s in 0..self.arity {
                let mut key = k.clone();
                key[s] = key[s].bump(var, 1);
                out.add_term(key, c.clone());
            }
        }
        out
    }

    /// `(f…) ↦ ∂^K(φ(f…))`.
    pub fn derive_multi(&self, k: &MultiIndex) -> Self {
        let mut out = self.clone();
        for (var, &e) in k.exps().iter().enumerate() {
            for _ in 0..e {
                out = out.derive(var);
            }
        }
        out
    }

    /// `(φ ⊗ ψ)(f₀…f_{a-1}, g₀…g_{b-1}) = φ(f…) · ψ(g…)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.arity + other.arity);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut key = ka.clone();
                key.extend(kb.iter().cloned());
                out.add_term(key, ca * cb);
            }
        }
        out
    }

    /// Operadic composition `φ(ψ₀(…), ψ₁(…), …)`; the inner operators take
    /// consecutive, disjoint groups of slots.
    pub fn compose(&self, inner: &[MultidiffOperator]) -> Result<Self> {
        if inner.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: inner.len(),
            });
        }
        for op in inner {
            self.check_dim(op)?;
        }
        let arity: usize = inner.iter().map(|o| o.arity).sum();
        let mut out = Self::zero(self.dim, arity);
        let mut cache: HashMap<(usize, MultiIndex), MultidiffOperator> = HashMap::new();
        'terms: for (key, coef) in &self.terms {
            let mut acc = MultidiffOperator::function(coef.clone());
            for (s, idx) in key.iter().enumerate() {
                let d = cache
                    .entry((s, idx.clone()))
                    .or_insert_with(|| inner[s].derive_multi(idx));
                acc = acc.tensor(d);
                if acc.is_zero() {
                    continue 'terms;
                }
            }
            out.add_assign(&acc);
        }
        Ok(out)
    }

    /// Insert `psi` into slot `slot`: `φ(f₀,…,f_{i−1}, ψ(f_i,…), …)`.
    pub fn insert(&self, slot: usize, psi: &MultidiffOperator) -> Result<Self> {
        if slot >= self.arity {
            return Err(Error::InvalidArgument(format!(
                "slot {slot} out of range for arity {}",
                self.arity
            )));
        }
        let id = MultidiffOperator::identity(self.dim);
        let inner: Vec<_> = (0..self.arity)
            .map(|s| if s == slot { psi.clone() } else { id.clone() })
            .collect();
        self.compose(&inner)
    }

    /// `(f₀,…,f_m) ↦ φ(f_{perm[0]}, …, f_{perm[m]})`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.arity];
        if perm.len() != self.arity || perm.iter().any(|&p| p >= self.arity || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of {} slots",
                self.arity
            )));
        }
        let mut out = Self::zero(self.dim, self.arity);
        for (k, c) in &self.terms {
            // slot s of φ sees f_{perm[s]}, so f_{perm[s]} carries k[s]
            let mut key = vec![MultiIndex::zero(self.dim); self.arity];
            for (s, &p) in perm.iter().enumerate() {
                key[p] = k[s].clone();
            }
            out.add_term(key, c.clone());
        }
        Ok(out)
    }

    /// Symmetric part `½(φ(f,g) + φ(g,f))` of an arity-2 operator.
    pub fn symmetric_part(&self) -> Result<Self> {
        let sw = self.bi_swap()?;
        Ok(self.add(&sw)?.scale(&crate::poly::rat(1, 2)))
    }

    /// Skew part `½(φ(f,g) − φ(g,f))` of an arity-2 operator.
    pub fn skew_part(&self) -> Result<Self> {
        let sw = self.bi_swap()?;
        Ok(self.sub(&sw)?.scale(&crate::poly::rat(1, 2)))
    }

    fn bi_swap(&self) -> Result<Self> {
        if self.arity != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: self.arity,
            });
        }
        self.permute_slots(&[1, 0])
    }

    /// Highest total derivative order over all terms.
    pub fn total_order(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().map(MultiIndex::total).sum())
            .max()
            .unwrap_or(0)
    }

    /// Highest derivative order in any single slot.
    pub fn max_slot_order(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|k| k.iter().map(MultiIndex::total))
            .max()
            .unwrap_or(0)
    }

    /// For arity 1: `φ(1) = 0`.
    pub fn vanishes_on_constants(&self) -> bool {
        self.terms
            .keys()
            .all(|k| k.iter().any(|idx| !idx.is_zero()))
    }

    /// Reconstruct the arity-1 operator that agrees with `values` on every
    /// monomial `x^K`, `|K| ≤ max_order`, assuming derivative order
    /// `≤ max_order`. Uses `P(x^K) = Σ_{I ≤ K} c_I K!/(K−I)! x^{K−I}`.
    pub fn from_monomial_values(
        dim: usize,
        max_order: u32,
        mut values: impl FnMut(&MultiIndex) -> Polynomial,
    ) -> Self {
        let mut op = Self::zero(dim, 1);
        for k in MultiIndex::all_up_to(dim, max_order) {
            let x_k = Polynomial::monomial(dim, k.clone(), Rational::one());
            let mut rest = values(&k);
            rest -= &op.apply(std::slice::from_ref(&x_k)).expect("arity 1");
            // what is left is c_K · K!
            let c = rest.scale(&Rational::from_integer(k.factorial()).recip());
            op.add_term(vec![k], c);
        }
        op
    }

    /// Parse `arity N: <term list>`.
    pub fn parse(dim: usize, src: &str) -> Result<Self> {
        let s = src.trim_start();
        let offset = src.len() - s.len();
        let rest = s
            .strip_prefix("arity")
            .ok_or_else(|| Error::parse(src, offset, "expected 'arity N:' prefix"))?;
        let (num, body) = rest
            .split_once(':')
            .ok_or_else(|| Error::parse(src, offset, "expected ':' after arity"))?;
        let arity: usize = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(src, offset + 5, "arity must be a non-negative integer"))?;
        let body_at = src.len() - body.len();
        let terms = text::parse_terms(dim, body).map_err(|e| match e {
            Error::Parse {
                position, message, ..
            } => Error::parse(src, body_at + position, message),
            other => other,
        })?;
        let mut op = Self::zero(dim, arity);
        for t in terms {
            if !t.wedge.is_empty() {
                return Err(Error::parse(
                    src,
                    body_at + t.basis_at.unwrap_or(0),
                    "multivector basis 'd/dx' in an operator; use slot derivatives 'dK/dx'",
                ));
            }
            let mut key = vec![MultiIndex::zero(dim); arity];
            for (slot, var, e) in t.slots {
                if slot >= arity {
                    return Err(Error::parse(
                        src,
                        body_at + t.basis_at.unwrap_or(0),
                        format!("slot {slot} out of range for arity {arity}"),
                    ));
                }
                key[slot] = key[slot].bump(var, e);
            }
            op.add_term(key, Polynomial::monomial(dim, t.mono, t.coef));
        }
        Ok(op)
    }
}

fn format_slot_derivatives(dim: usize, key: &[MultiIndex]) -> Vec<String> {
    let mut parts = Vec::new();
    for (s, idx) in key.iter().enumerate() {
        for (v, &e) in idx.exps().iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(format!("d{s}/d{}", text::var_name(dim, v))),
                _ => parts.push(format!("d{s}/d{}^{e}", text::var_name(dim, v))),
            }
        }
    }
    parts
}

impl fmt::Display for MultidiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arity {}: ", self.arity)?;
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            let ders = format_slot_derivatives(self.dim, k).join(" * ");
            for (m, v) in c.display_terms() {
                let neg = v.is_negative();
                let mag = v.abs();
                let body = if ders.is_empty() {
                    text::format_scaled_monomial(self.dim, &mag, m)
                } else if m.is_zero() && mag.is_one() {
                    ders.clone()
                } else {
                    format!("{} * {}", text::format_scaled_monomial(self.dim, &mag, m), ders)
                };
                match (first, neg) {
                    (true, false) => write!(f, "{body}")?,
                    (true, true) => write!(f, "-{body}")?,
                    (false, false) => write!(f, " + {body}")?,
                    (false, true) => write!(f, " - {body}")?,
                }
                first = false;
            }
        }
        Ok(())
    }
}

/// Difference of two operators of equal arity evaluated on every tuple of
/// monomials of total degree `≤ max_degree`; returns the first tuple where
/// they disagree. A sampling oracle for the normal-form equality.
pub fn first_monomial_disagreement(
    a: &MultidiffOperator,
    b: &MultidiffOperator,
    max_degree: u32,
) -> Result<Option<Vec<MultiIndex>>> {
    a.check_shape(b)?;
    let monos = MultiIndex::all_up_to(a.dim, max_degree);
    let mut tuple = vec![0usize; a.arity];
    loop {
        let args: Vec<Polynomial> = tuple
            .iter()
            .map(|&i| Polynomial::monomial(a.dim, monos[i].clone(), Rational::one()))
            .collect();
        if a.apply(&args)? != b.apply(&args)? {
            return Ok(Some(tuple.iter().map(|&i| monos[i].clone()).collect()));
        }
        // odometer over tuples
        let mut s = 0;
        loop {
            if s == a.arity {
                return Ok(None);
            }
            tuple[s] += 1;
            if tuple[s] < monos.len() {
                break;
            }
            tuple[s] = 0;
            s += 1;
        }
    }
}
