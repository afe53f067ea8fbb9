//! Hochschild side: Gerstenhaber composition and bracket, the Hochschild
//! differential, the HKR map, associativity of formal deformations, gauge
//! transformations and the order-1 symmetrisation of a star product.
//!
//! Degrees follow the shifted grading: an operator of arity `m+1` has degree
//! `m`, so `μ` has degree 1 and functions have degree −1.
//!
//! The differential is `d φ = −[φ, μ]_G`; at arity 1 this reads
//! `dT(f, g) = −T(fg) + f T(g) + T(f) g`, so derivations are exactly the
//! 1-cocycles.

use std::collections::HashMap;

use num_traits::One;

use crate::error::{Error, Result};
use crate::multivector::MultivectorField;
use crate::operator::MultidiffOperator;
use crate::poly::{factorial, MultiIndex, Polynomial, Rational};
use crate::series::FormalSeries;

/// `B₀ + ħB₁ + … + ħᴺB_N`, all of arity 2.
pub type FormalBidiffSeries = FormalSeries<MultidiffOperator>;

fn degree(op: &MultidiffOperator) -> i64 {
    op.arity() as i64 - 1
}

fn sign(exp: i64) -> Rational {
    if exp.rem_euclid(2) == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// `(φ∘ψ)(f₀…) = Σ_i (−1)^{m₂ i} φ(f₀,…,ψ(f_i,…,f_{i+m₂}),…)`.
pub fn gerstenhaber_compose(
    phi: &MultidiffOperator,
    psi: &MultidiffOperator,
) -> Result<MultidiffOperator> {
    phi.check_dim(psi)?;
    let m2 = degree(psi);
    let arity = (phi.arity() + psi.arity()).saturating_sub(1);
    let mut out = MultidiffOperator::zero(phi.dim(), arity);
    if phi.arity() == 0 {
        return Ok(out);
    }
    for i in 0..phi.arity() {
        let term = phi.insert(i, psi)?;
        out.add_scaled(&term, &sign(m2 * i as i64));
    }
    Ok(out)
}

/// `[φ, ψ]_G = φ∘ψ − (−1)^{m₁m₂} ψ∘φ`.
pub fn gerstenhaber_bracket(
    phi: &MultidiffOperator,
    psi: &MultidiffOperator,
) -> Result<MultidiffOperator> {
    let a = gerstenhaber_compose(phi, psi)?;
    let b = gerstenhaber_compose(psi, phi)?;
    let mut out = a;
    out.add_scaled(&b, &-sign(degree(phi) * degree(psi)));
    Ok(out)
}

/// Hochschild differential `d φ = −[φ, μ]_G`.
pub fn hochschild_d(phi: &MultidiffOperator) -> Result<MultidiffOperator> {
    let mu = MultidiffOperator::multiplication(phi.dim());
    Ok(gerstenhaber_bracket(phi, &mu)?.scale(&-Rational::one()))
}

/// HKR map: `X₀∧…∧X_n ↦ (f₀…f_n) ↦ 1/(n+1)! Σ_σ sgn σ Π X_{σ(i)}(f_i)`.
pub fn hkr(a: &MultivectorField) -> Result<MultidiffOperator> {
    let k = a.degree();
    if k == 0 {
        return Err(Error::HkrDegreeZero);
    }
    let dim = a.dim();
    let norm = Rational::from_integer(factorial(k as u32)).recip();
    let perms = permutations(k);
    let mut out = MultidiffOperator::zero(dim, k);
    for (idx, coef) in a.components() {
        let c = coef.scale(&norm);
        for (perm, sgn) in &perms {
            let key: Vec<MultiIndex> = perm.iter().map(|&p| MultiIndex::unit(dim, idx[p])).collect();
            let term = if *sgn > 0 { c.clone() } else { -&c };
            out.add_term(key, term);
        }
    }
    Ok(out)
}

/// All permutations of `0..k` with their signs.
fn permutations(k: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut all = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut all);
    all.into_iter()
        .map(|p| {
            let inversions = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let s = if inversions % 2 == 0 { 1 } else { -1 };
            (p, s)
        })
        .collect()
}

fn check_bidiff(series: &FormalBidiffSeries) -> Result<usize> {
    let dim = series.coeff(0).dim();
    for b in series.coeffs() {
        if b.arity() != 2 {
            return Err(Error::ArityMismatch {
                expected: 2,
                found: b.arity(),
            });
        }
        if b.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: b.dim(),
            });
        }
    }
    Ok(dim)
}

/// Order-by-order associativity defect `Σ_{i+j=n} Bᵢ∘Bⱼ`, i.e.
/// `Σ Bᵢ(Bⱼ(f,g),h) − Bᵢ(f,Bⱼ(g,h))`, for `n = 0..=N`.
pub fn associativity_residuals(b: &FormalBidiffSeries) -> Result<Vec<MultidiffOperator>> {
    let dim = check_bidiff(b)?;
    let mut cache: HashMap<(usize, usize), MultidiffOperator> = HashMap::new();
    let mut out = Vec::with_capacity(b.order() + 1);
    for n in 0..=b.order() {
        let mut r = MultidiffOperator::zero(dim, 3);
        for i in 0..=n {
            let j = n - i;
            if b.coeff(i).is_zero() || b.coeff(j).is_zero() {
                continue;
            }
            let c = match cache.get(&(i, j)) {
                Some(c) => c.clone(),
                None => {
                    let c = gerstenhaber_compose(b.coeff(i), b.coeff(j))?;
                    cache.insert((i, j), c.clone());
                    c
                }
            };
            r.add_assign(&c);
        }
        out.push(r);
    }
    Ok(out)
}

/// `μ + Σ ħⁱBᵢ` is associative up to the truncation order, checked as an
/// identity of operators. A series whose `B₀` is not `μ` is not a
/// deformation of the product and yields `false`.
pub fn is_associative_deformation(b: &FormalBidiffSeries) -> Result<bool> {
    let dim = check_bidiff(b)?;
    if b.coeff(0) != &MultidiffOperator::multiplication(dim) {
        return Ok(false);
    }
    Ok(associativity_residuals(b)?.iter().all(MultidiffOperator::is_zero))
}

/// `T = 𝟙 + ħT₁ + … + ħᴺT_N` with every `T_n` a differential operator
/// vanishing on constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaugeSeries {
    ops: Vec<MultidiffOperator>,
}

impl GaugeSeries {
    /// From `T₀ … T_N`; `T₀` must be the identity.
    pub fn new(ops: Vec<MultidiffOperator>) -> Result<Self> {
        let first = ops.first().ok_or(Error::GaugeNotIdentity)?;
        let dim = first.dim();
        if first != &MultidiffOperator::identity(dim) {
            return Err(Error::GaugeNotIdentity);
        }
        for (n, t) in ops.iter().enumerate().skip(1) {
            if t.arity() != 1 {
                return Err(Error::ArityMismatch {
                    expected: 1,
                    found: t.arity(),
                });
            }
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: t.dim(),
                });
            }
            if !t.vanishes_on_constants() {
                return Err(Error::GaugeOnConstants { order: n });
            }
        }
        Ok(GaugeSeries { ops })
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        let mut ops = vec![MultidiffOperator::zero(dim, 1); order + 1];
        ops[0] = MultidiffOperator::identity(dim);
        GaugeSeries { ops }
    }

    pub fn order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn ops(&self) -> &[MultidiffOperator] {
        &self.ops
    }

    /// `D = T⁻¹`: `D₀ = 𝟙`, `D_n = −Σ_{m=1}^{n} T_m D_{n−m}`.
    pub fn inverse(&self) -> Result<Vec<MultidiffOperator>> {
        inverse_ops(&self.ops)
    }
}

fn inverse_ops(ts: &[MultidiffOperator]) -> Result<Vec<MultidiffOperator>> {
    let dim = ts[0].dim();
    let mut ds = vec![MultidiffOperator::identity(dim)];
    for n in 1..ts.len() {
        let mut d = MultidiffOperator::zero(dim, 1);
        for m in 1..=n {
            if ts[m].is_zero() || ds[n - m].is_zero() {
                continue;
            }
            d.add_assign(&ts[m].compose(std::slice::from_ref(&ds[n - m]))?);
        }
        ds.push(d.scale(&-Rational::one()));
    }
    Ok(ds)
}

/// Conjugate by `T`: `f ⋆′ g = T(T⁻¹f ⋆ T⁻¹g)`, so that
/// `T(f ⋆ g) = T(f) ⋆′ T(g)`.
pub fn gauge_transform(t: &GaugeSeries, b: &FormalBidiffSeries) -> Result<FormalBidiffSeries> {
    if t.order() != b.order() {
        return Err(Error::TruncationMismatch {
            left: t.order(),
            right: b.order(),
        });
    }
    let dim = check_bidiff(b)?;
    if t.ops[0].dim() != dim {
        return Err(Error::DimensionMismatch {
            left: t.ops[0].dim(),
            right: dim,
        });
    }
    conjugate(&t.ops, b)
}

/// Gauge action for an arbitrary list `T₀ = 𝟙, T₁, …` (no constant check).
fn conjugate(ts: &[MultidiffOperator], b: &FormalBidiffSeries) -> Result<FormalBidiffSeries> {
    let dim = b.coeff(0).dim();
    let n_max = b.order();
    let ds = inverse_ops(ts)?;
    // inner_k = Σ_{p+c+e=k} B_p(D_c ⊗ D_e)
    let mut inner = Vec::with_capacity(n_max + 1);
    for k in 0..=n_max {
        let mut acc = MultidiffOperator::zero(dim, 2);
        for p in 0..=k {
            if b.coeff(p).is_zero() {
                continue;
            }
            for c in 0..=k - p {
                let e = k - p - c;
                if ds[c].is_zero() || ds[e].is_zero() {
                    continue;
                }
                acc.add_assign(&b.coeff(p).compose(&[ds[c].clone(), ds[e].clone()])?);
            }
        }
        inner.push(acc);
    }
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = MultidiffOperator::zero(dim, 2);
        for a in 0..=n {
            if ts[a].is_zero() || inner[n - a].is_zero() {
                continue;
            }
            acc.add_assign(&ts[a].compose(std::slice::from_ref(&inner[n - a]))?);
        }
        out.push(acc);
    }
    FormalSeries::new(out)
}

/// Recover the bivector `β` with `B₁⁻(f,g) = Σ_{i<j} β^{ij}(∂_i f ∂_j g − ∂_j f ∂_i g)`.
pub fn extract_b1_minus(b: &FormalBidiffSeries) -> Result<MultivectorField> {
    let dim = check_bidiff(b)?;
    if b.order() < 1 {
        return Err(Error::TruncationMismatch {
            left: b.order(),
            right: 1,
        });
    }
    let skew = b.coeff(1).skew_part()?;
    let mut beta = MultivectorField::zero(dim, 2);
    for (key, c) in skew.terms() {
        if key[0].total() != 1 || key[1].total() != 1 {
            return Err(Error::NotBivector(skew.to_string()));
        }
        let i = key[0].exps().iter().position(|&e| e == 1).expect("order 1");
        let j = key[1].exps().iter().position(|&e| e == 1).expect("order 1");
        if i < j {
            beta.add_component(&[i, j], c.clone());
        }
    }
    Ok(beta)
}

/// `d(B₁) = 0`, the order-ħ² associativity constraint on `B₁`.
pub fn is_hochschild_cocycle(op: &MultidiffOperator) -> Result<bool> {
    Ok(hochschild_d(op)?.is_zero())
}

/// Gauge a star product to one whose order-1 term is skew-symmetric.
///
/// The first step removes the zeroth-order term `a₀·fg` of `B₁` with
/// `T₁ = a₀`. The rest of `T₁` is defined on monomials by
/// `T₁(x^n) = T₁(x^{n−1})x − B₁⁺(x^{n−1}, x)` per variable and
/// `T₁(x_k^a p) = T₁(x_k^a)p + x_k^a T₁(p) − B₁⁺(x_k^a, p)` across variables,
/// with `T₁` zero on constants and linear functions, and then read off as a
/// differential operator from its values on monomials. Returns `T₁` and
/// the transformed series.
pub fn symmetrize_order1(
    b: &FormalBidiffSeries,
) -> Result<(MultidiffOperator, FormalBidiffSeries)> {
    let dim = check_bidiff(b)?;
    if b.order() < 1 {
        return Err(Error::TruncationMismatch {
            left: b.order(),
            right: 1,
        });
    }
    let b1 = b.coeff(1);
    let d_b1 = hochschild_d(b1)?;
    if !d_b1.is_zero() {
        return Err(Error::CocycleViolated(d_b1.to_string()));
    }
    let zero_key = vec![MultiIndex::zero(dim), MultiIndex::zero(dim)];
    let a0 = b1.coefficient(&zero_key);
    let mut t1 = MultidiffOperator::zero(dim, 1);
    t1.add_term(vec![MultiIndex::zero(dim)], a0.clone());

    let mu = MultidiffOperator::multiplication(dim);
    let reduced = b1.sub(&mu.mul_function(&a0))?;
    let sym = reduced.symmetric_part()?;

    if !sym.is_zero() {
        let order = sym.total_order();
        let mut memo: HashMap<MultiIndex, Polynomial> = HashMap::new();
        let rec = MultidiffOperator::from_monomial_values(dim, order, |k| {
            t1_on_monomial(&sym, k, &mut memo)
        });
        // T₁(fg) = fT₁(g) + T₁(f)g − B₁⁺(f,g), i.e. d(T₁) = B₁⁺
        let check = hochschild_d(&rec)?.sub(&sym)?;
        if !check.is_zero() {
            return Err(Error::CocycleViolated(format!(
                "symmetric part is not the coboundary of the reconstructed operator: {check}"
            )));
        }
        t1.add_assign(&rec);
    }

    let mut ts = vec![MultidiffOperator::zero(dim, 1); b.order() + 1];
    ts[0] = MultidiffOperator::identity(dim);
    ts[1] = t1.clone();
    let bp = conjugate(&ts, b)?;
    Ok((t1, bp))
}

fn mono(dim: usize, k: &MultiIndex) -> Polynomial {
    Polynomial::monomial(dim, k.clone(), Rational::one())
}

fn t1_on_monomial(
    sym: &MultidiffOperator,
    k: &MultiIndex,
    memo: &mut HashMap<MultiIndex, Polynomial>,
) -> Polynomial {
    let dim = k.dim();
    if k.total() <= 1 {
        return Polynomial::zero(dim);
    }
    if let Some(v) = memo.get(k) {
        return v.clone();
    }
    let nonzero: Vec<usize> = (0..dim).filter(|&v| k.get(v) > 0).collect();
    let value = if nonzero.len() == 1 {
        // T₁(x^n) = T₁(x^{n−1}) x − B₁⁺(x^{n−1}, x)
        let v = nonzero[0];
        let prev = power_of(dim, v, k.get(v) - 1);
        let x = Polynomial::var(dim, v);
        let tp = t1_on_monomial(sym, &prev, memo);
        let s = sym.apply(&[mono(dim, &prev), x.clone()]).expect("arity 2");
        &(&tp * &x) - &s
    } else {
        // split off the highest variable
        let v = *nonzero.last().expect("nonempty");
        let top = power_of(dim, v, k.get(v));
        let rest = k.checked_sub(&top).expect("top divides k");
        let t_top = t1_on_monomial(sym, &top, memo);
        let t_rest = t1_on_monomial(sym, &rest, memo);
        let s = sym.apply(&[mono(dim, &top), mono(dim, &rest)]).expect("arity 2");
        let a = &t_top * &mono(dim, &rest);
        let b = &mono(dim, &top) * &t_rest;
        &(&a + &b) - &s
    };
    memo.insert(k.clone(), value.clone());
    value
}

fn power_of(dim: usize, var: usize, n: u32) -> MultiIndex {
    MultiIndex::zero(dim).bump(var, n)
}

/// `true` when the arity-2 operator satisfies `B(f,g) + B(g,f) = 0`.
pub fn is_skew(op: &MultidiffOperator) -> Result<bool> {
    Ok(op.symmetric_part()?.is_zero())
}
