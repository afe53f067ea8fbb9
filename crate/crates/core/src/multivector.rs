//! Polynomial multivector fields on ℝᵈ and the Schouten–Nijenhuis bracket.
//!
//! A k-vector field is stored as a map from strictly increasing index tuples
//! `(i₁ < … < i_k)` to polynomial coefficients, i.e. `Σ a_I ∂_{i₁}∧…∧∂_{i_k}`.
//! Internally the bracket treats `∂_i` as an odd variable `ξ_i`:
//!
//! ```text
//! [A, B] = Σ_i (A ∂⃖ξ_i)(∂_{x_i} B) − (−1)^{(a−1)(b−1)} (B ∂⃖ξ_i)(∂_{x_i} A)
//! ```
//!
//! with `∂⃖ξ_i` the right derivative. For two vector fields this is the Lie
//! bracket `XY − YX`, and for `a = 1` it is the Lie derivative. Degree-0
//! arguments follow from the same formula: `[X, f] = X(f)` and
//! `[f, X] = −X(f)`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{rat, Polynomial, Rational};
use crate::series::FormalSeries;
use crate::text;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultivectorField {
    dim: usize,
    degree: usize,
    components: BTreeMap<Vec<usize>, Polynomial>,
}

/// ħ-series of multivector fields of one common degree.
pub type FormalMultivector = FormalSeries<MultivectorField>;

/// Sort `idx` in place, returning the permutation sign, or `None` when an
/// index repeats (the wedge vanishes).
fn sort_with_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl MultivectorField {
    pub fn zero(dim: usize, degree: usize) -> Self {
        MultivectorField {
            dim,
            degree,
            components: BTreeMap::new(),
        }
    }

    /// Degree-0 field.
    pub fn function(f: Polynomial) -> Self {
        let mut m = Self::zero(f.dim(), 0);
        if !f.is_zero() {
            m.components.insert(Vec::new(), f);
        }
        m
    }

    /// `Σ X^i ∂_i`.
    pub fn vector_field(components: Vec<Polynomial>) -> Self {
        let dim = components.len();
        let mut m = Self::zero(dim, 1);
        for (i, c) in components.into_iter().enumerate() {
            m.add_component(&[i], c);
        }
        m
    }

    /// Build from `(indices, coefficient)` pairs; indices need not be sorted.
    pub fn from_components<I>(dim: usize, degree: usize, comps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Polynomial)>,
    {
        let mut m = Self::zero(dim, degree);
        for (idx, c) in comps {
            if idx.len() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: idx.len(),
                });
            }
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: c.dim(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::InvalidArgument(format!(
                    "index {bad} out of range for dim {dim}"
                )));
            }
            m.add_component(&idx, c);
        }
        Ok(m)
    }

    /// Add `c · ∂_{idx[0]} ∧ … ∧ ∂_{idx[k-1]}` with sign normalisation.
    pub fn add_component(&mut self, idx: &[usize], c: Polynomial) {
        assert_eq!(idx.len(), self.degree, "component degree mismatch");
        let mut key = idx.to_vec();
        let Some(sign) = sort_with_sign(&mut key) else {
            return;
        };
        let c = if sign < 0 { -c } else { c };
        let slot = self
            .components
            .entry(key.clone())
            .or_insert_with(|| Polynomial::zero(self.dim));
        *slot += &c;
        if slot.is_zero() {
            self.components.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Polynomial)> {
        self.components.iter()
    }

    /// Coefficient on `∂_{idx}` with the sign of the permutation that sorts
    /// `idx`.
    pub fn component(&self, idx: &[usize]) -> Polynomial {
        let mut key = idx.to_vec();
        match sort_with_sign(&mut key) {
            None => Polynomial::zero(self.dim),
            Some(s) => {
                let c = self
                    .components
                    .get(&key)
                    .cloned()
                    .unwrap_or_else(|| Polynomial::zero(self.dim));
                if s < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    /// True when every coefficient is a constant polynomial.
    pub fn is_constant(&self) -> bool {
        self.components.values().all(Polynomial::is_constant)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, v) in &self.components {
            let s = v.scale(c);
            if !s.is_zero() {
                out.components.insert(k.clone(), s);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.components {
            out.add_component(k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(())
    }

    /// Right derivative with respect to the odd variable `ξ_i`.
    fn odd_right_derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (k, v) in &self.components {
            if let Some(p) = k.iter().position(|&j| j == i) {
                let mut rest = k.clone();
                rest.remove(p);
                let sign_neg = (k.len() - 1 - p) % 2 == 1;
                let c = if sign_neg { -v } else { v.clone() };
                out.add_component(&rest, c);
            }
        }
        out
    }

    fn coefficient_derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        for (k, v) in &self.components {
            let d = v.derivative(var);
            if !d.is_zero() {
                out.components.insert(k.clone(), d);
            }
        }
        out
    }

    /// Exterior (wedge) product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let mut out = Self::zero(self.dim, self.degree + other.degree);
        for (ka, va) in &self.components {
            for (kb, vb) in &other.components {
                let mut idx: Vec<usize> = ka.iter().chain(kb.iter()).copied().collect();
                if let Some(sign) = sort_with_sign(&mut idx) {
                    let c = va * vb;
                    let c = if sign < 0 { -c } else { c };
                    let slot = out
                        .components
                        .entry(idx.clone())
                        .or_insert_with(|| Polynomial::zero(self.dim));
                    *slot += &c;
                    if slot.is_zero() {
                        out.components.remove(&idx);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn parse(dim: usize, src: &str) -> Result<Self> {
        let terms = text::parse_terms(dim, src)?;
        let degree = terms.iter().map(|t| t.wedge.len()).max().unwrap_or(0);
        let mut m = Self::zero(dim, degree);
        for t in terms {
            if !t.slots.is_empty() {
                return Err(Error::parse(
                    src,
                    t.basis_at.unwrap_or(0),
                    "slot derivatives are not allowed in a multivector",
                ));
            }
            if t.wedge.len() != degree {
                return Err(Error::parse(
                    src,
                    t.basis_at.unwrap_or(0),
                    format!("term of degree {} in a degree-{degree} field", t.wedge.len()),
                ));
            }
            m.add_component(&t.wedge, Polynomial::monomial(dim, t.mono, t.coef));
        }
        Ok(m)
    }
}

impl fmt::Display for MultivectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = |i: usize| format!("d/d{}", text::var_name(self.dim, i));
        if self.is_zero() {
            if self.degree == 0 {
                return write!(f, "0");
            }
            let basis: Vec<String> = (0..self.degree).map(|i| d(i % self.dim.max(1))).collect();
            return write!(f, "0 * {}", basis.join(" ^ "));
        }
        let mut first = true;
        for (k, v) in &self.components {
            let basis: Vec<String> = k.iter().map(|&i| d(i)).collect();
            let basis = basis.join(" ^ ");
            for (m, c) in v.display_terms() {
                let neg = c < &Rational::zero();
                let mag = if neg { -c.clone() } else { c.clone() };
                let body = if basis.is_empty() {
                    text::format_scaled_monomial(self.dim, &mag, m)
                } else if m.is_zero() && mag.is_one() {
                    basis.clone()
                } else {
                    format!("{} * {}", text::format_scaled_monomial(self.dim, &mag, m), basis)
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

/// Schouten–Nijenhuis bracket; result has degree `deg a + deg b − 1`.
pub fn schouten_bracket(a: &MultivectorField, b: &MultivectorField) -> Result<MultivectorField> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    if a.degree == 0 && b.degree == 0 {
        return Err(Error::InvalidArgument(
            "the bracket of two functions would have degree -1".into(),
        ));
    }
    let deg = a.degree + b.degree - 1;
    let mut out = MultivectorField::zero(a.dim, deg);
    let sign_neg = ((a.degree as i64 - 1) * (b.degree as i64 - 1)).rem_euclid(2) == 1;
    for i in 0..a.dim {
        if a.degree > 0 {
            let t = a.odd_right_derivative(i).wedge(&b.coefficient_derivative(i))?;
            out = out.add(&t)?;
        }
        if b.degree > 0 {
            let t = b.odd_right_derivative(i).wedge(&a.coefficient_derivative(i))?;
            out = if sign_neg { out.add(&t)? } else { out.sub(&t)? };
        }
    }
    Ok(out)
}

/// Lie derivative `𝓛_X B = [X, B]` along a vector field.
pub fn lie_derivative(x: &MultivectorField, b: &MultivectorField) -> Result<MultivectorField> {
    if x.degree != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            found: x.degree,
        });
    }
    schouten_bracket(x, b)
}

fn require_bivector(pi: &MultivectorField) -> Result<()> {
    if pi.degree != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: pi.degree,
        });
    }
    Ok(())
}

/// `[π, π]_S = 0`.
pub fn is_poisson(pi: &MultivectorField) -> Result<bool> {
    require_bivector(pi)?;
    Ok(schouten_bracket(pi, pi)?.is_zero())
}

/// `{f, g} = Σ_{i<j} π^{ij} (∂_i f ∂_j g − ∂_j f ∂_i g)`.
pub fn poisson_apply(pi: &MultivectorField, f: &Polynomial, g: &Polynomial) -> Result<Polynomial> {
    require_bivector(pi)?;
    for p in [f, g] {
        if p.dim() != pi.dim {
            return Err(Error::DimensionMismatch {
                left: pi.dim,
                right: p.dim(),
            });
        }
    }
    let mut out = Polynomial::zero(pi.dim);
    for (k, c) in &pi.components {
        let (i, j) = (k[0], k[1]);
        let t = &(&f.derivative(i) * &g.derivative(j)) - &(&f.derivative(j) * &g.derivative(i));
        out += &(c * &t);
    }
    Ok(out)
}

/// `Σ_cyc {f, {g, h}}`.
pub fn jacobiator(
    pi: &MultivectorField,
    f: &Polynomial,
    g: &Polynomial,
    h: &Polynomial,
) -> Result<Polynomial> {
    let a = poisson_apply(pi, f, &poisson_apply(pi, g, h)?)?;
    let b = poisson_apply(pi, g, &poisson_apply(pi, h, f)?)?;
    let c = poisson_apply(pi, h, &poisson_apply(pi, f, g)?)?;
    Ok(&(&a + &b) + &c)
}

fn check_formal(series: &FormalMultivector) -> Result<(usize, usize)> {
    let first = series.coeff(0);
    let (dim, degree) = (first.dim, first.degree);
    for c in series.coeffs() {
        first.check_same_shape(c)?;
    }
    Ok((dim, degree))
}

/// Every ħ-order `k ≤ N` of `[π_ħ, π_ħ]_S` vanishes. `π₀` must be zero.
pub fn is_formal_poisson(pi_h: &FormalMultivector) -> Result<bool> {
    let (_, degree) = check_formal(pi_h)?;
    if degree != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: degree,
        });
    }
    if !pi_h.coeff(0).is_zero() {
        return Err(Error::InvalidArgument(
            "formal Poisson structure must have vanishing order-0 term".into(),
        ));
    }
    for k in 0..=pi_h.order() {
        let mut acc = MultivectorField::zero(pi_h.coeff(0).dim, 3);
        for i in 0..=k {
            acc = acc.add(&schouten_bracket(pi_h.coeff(i), pi_h.coeff(k - i))?)?;
        }
        if !acc.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `exp(ħ𝓛_X) π_ħ` truncated at `order`, for a formal vector field
/// `X = Σ ħⁱ Xᵢ`.
pub fn apply_formal_diffeo(
    x: &FormalMultivector,
    pi_h: &FormalMultivector,
    order: usize,
) -> Result<FormalMultivector> {
    let (xdim, xdeg) = check_formal(x)?;
    let (dim, degree) = check_formal(pi_h)?;
    if xdeg != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            found: xdeg,
        });
    }
    if xdim != dim {
        return Err(Error::DimensionMismatch {
            left: xdim,
            right: dim,
        });
    }
    for s in [x.order(), pi_h.order()] {
        if s < order {
            return Err(Error::TruncationMismatch {
                left: s,
                right: order,
            });
        }
    }
    // ħ·𝓛_X applied to a truncated series
    let step = |y: &[MultivectorField]| -> Result<Vec<MultivectorField>> {
        let mut out = vec![MultivectorField::zero(dim, degree); order + 1];
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            for i in 0..k {
                let j = k - 1 - i;
                *slot = slot.add(&schouten_bracket(x.coeff(i), &y[j])?)?;
            }
        }
        Ok(out)
    };
    let mut term: Vec<MultivectorField> = pi_h.coeffs()[..=order].to_vec();
    let mut total = term.clone();
    for n in 1..=order {
        term = step(&term)?;
        let inv = rat(1, n as i64);
        term = term.iter().map(|t| t.scale(&inv)).collect();
        for (t, s) in total.iter_mut().zip(&term) {
            *t = t.add(s)?;
        }
    }
    FormalSeries::new(total)
}
