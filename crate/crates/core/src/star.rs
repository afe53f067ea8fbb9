//! The graph formula `f ⋆ g = Σ_n ħⁿ/n! Σ_{Γ∈G_n} ω_Γ B_{Γ,π}(f, g)`.
//!
//! The engine consumes `π` directly: `B₁(f, g) = Σ πⁱʲ ∂ᵢf ∂ⱼg`, so the
//! commutator starts with `2ħ{f, g}`. [`StarOptions::dirac`] feeds `½π`
//! instead, which gives `B₁⁻ = ½{·,·}`.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::{enumerate, AdmissibleGraph, Target};
use crate::hochschild::{associativity_residuals, extract_b1_minus, FormalBidiffSeries};
use crate::multivector::{is_poisson, MultivectorField};
use crate::operator::MultidiffOperator;
use crate::poly::{factorial, MultiIndex, Polynomial, Rational};
use crate::series::FormalSeries;
use crate::weights::{weight_exact, weight_mc, WeightTable, WeightValue};

fn check_bivector(pi: &MultivectorField) -> Result<()> {
    if pi.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            found: pi.degree(),
        });
    }
    Ok(())
}

/// `B_{Γ,π}`: `f` sits at `L`, `g` at `R`, vertex `k` carries `π^{ab}` with
/// `a, b` the labels of its two out-edges, and every edge differentiates
/// its target in the direction of its label; summed over all labellings.
pub fn build_operator(g: &AdmissibleGraph, pi: &MultivectorField) -> Result<MultidiffOperator> {
    check_bivector(pi)?;
    if !crate::graphs::validate(g) {
        return Err(Error::InvalidGraph(g.encode()));
    }
    let dim = pi.dim();
    let n = g.order();
    let mut out = MultidiffOperator::zero(dim, 2);
    if n == 0 {
        return Ok(MultidiffOperator::multiplication(dim));
    }
    if dim == 0 {
        return Ok(out);
    }
    let edges: Vec<(usize, Target)> = g.edges().collect();
    let mut cache: HashMap<(usize, usize, MultiIndex), Polynomial> = HashMap::new();
    let mut labels = vec![0usize; 2 * n];
    'outer: loop {
        if (0..n).all(|k| labels[2 * k] != labels[2 * k + 1]) {
            let mut incoming = vec![MultiIndex::zero(dim); n + 2];
            for (e, (_, t)) in edges.iter().enumerate() {
                let slot = match t {
                    Target::Vertex(v) => v - 1,
                    Target::L => n,
                    Target::R => n + 1,
                };
                incoming[slot] = incoming[slot].bump(labels[e], 1);
            }
            let mut coef = Polynomial::one(dim);
            for k in 0..n {
                let (a, b) = (labels[2 * k], labels[2 * k + 1]);
                let key = (a, b, incoming[k].clone());
                let factor = cache
                    .entry(key)
                    .or_insert_with(|| pi.component(&[a, b]).derivative_multi(&incoming[k]));
                if factor.is_zero() {
                    coef = Polynomial::zero(dim);
                    break;
                }
                coef = &coef * factor;
            }
            if !coef.is_zero() {
                out.add_term(vec![incoming[n].clone(), incoming[n + 1].clone()], coef);
            }
        }
        // next labelling
        let mut e = 2 * n;
        loop {
            if e == 0 {
                break 'outer;
            }
            e -= 1;
            labels[e] += 1;
            if labels[e] < dim {
                break;
            }
            labels[e] = 0;
        }
    }
    Ok(out)
}

/// Where the weights of a star product come from.
#[derive(Clone, Debug)]
pub enum WeightSource {
    /// Built-in exact values, then the given table.
    Exact(WeightTable),
    /// Only the given table.
    Table(WeightTable),
    /// Monte-Carlo means, converted exactly to rationals.
    MonteCarlo { samples: u64, seed: u64 },
}

impl WeightSource {
    pub fn builtin() -> Self {
        WeightSource::Exact(WeightTable::default())
    }

    fn is_exact(&self) -> bool {
        !matches!(self, WeightSource::MonteCarlo { .. })
    }

    fn weight(&self, g: &AdmissibleGraph) -> Result<Rational> {
        let value: Option<WeightValue> = match self {
            WeightSource::Exact(extra) => weight_exact(g, Some(extra))?,
            WeightSource::Table(t) => t.get(g).cloned(),
            WeightSource::MonteCarlo { samples, seed } => {
                let e = weight_mc(g, *samples, *seed)?;
                let r = Rational::from_float(e.mean)
                    .ok_or_else(|| Error::InvalidArgument(format!("non-finite estimate {e:?}")))?;
                return Ok(r);
            }
        };
        let value = value.ok_or_else(|| Error::MissingWeight(g.encode()))?;
        value
            .as_rational()
            .ok_or_else(|| Error::NonRationalWeight(format!("{}: {value}", g.encode())))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StarOptions {
    /// Accept `π` with `[π, π] ≠ 0`.
    pub allow_non_poisson: bool,
    /// Use `½π`, so that `B₁⁻ = ½{·,·}`.
    pub dirac: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StarProduct {
    input: MultivectorField,
    pi: MultivectorField,
    series: FormalBidiffSeries,
    exact: bool,
}

impl StarProduct {
    /// Wrap an arbitrary series, e.g. a gauge-transformed one.
    pub fn from_series(pi: MultivectorField, series: FormalBidiffSeries) -> Result<Self> {
        check_bivector(&pi)?;
        Ok(StarProduct {
            input: pi.clone(),
            pi,
            series,
            exact: true,
        })
    }

    /// The structure given by the caller.
    pub fn input_pi(&self) -> &MultivectorField {
        &self.input
    }

    /// The structure fed into the graph sum.
    pub fn pi(&self) -> &MultivectorField {
        &self.pi
    }

    pub fn series(&self) -> &FormalBidiffSeries {
        &self.series
    }

    pub fn order(&self) -> usize {
        self.series.order()
    }

    pub fn dim(&self) -> usize {
        self.pi.dim()
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// One `order n: arity 2: …` line per order.
    pub fn to_text(&self) -> String {
        let mut s = format!("dim: {}\n", self.dim());
        for (n, b) in self.series.coeffs().iter().enumerate() {
            s.push_str(&format!("order {n}: {b}\n"));
        }
        s
    }
}

impl fmt::Display for StarProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// `B_n = (1/n!) Σ_{Γ∈G_n} ω_Γ B_{Γ,π}` for `n ≤ order`. Weights are only
/// looked up for graphs whose operator does not vanish.
pub fn star_product(
    pi: &MultivectorField,
    order: usize,
    weights: &WeightSource,
    opts: StarOptions,
) -> Result<StarProduct> {
    check_bivector(pi)?;
    if !opts.allow_non_poisson && !is_poisson(pi)? {
        return Err(Error::NotPoisson(pi.to_string()));
    }
    let used = if opts.dirac {
        pi.scale(&Rational::new(1.into(), 2.into()))
    } else {
        pi.clone()
    };
    let dim = pi.dim();
    let mut coeffs = vec![MultidiffOperator::multiplication(dim)];
    for n in 1..=order {
        let graphs = enumerate(n)?;
        let ops: Vec<Result<(AdmissibleGraph, MultidiffOperator)>> = graphs
            .into_par_iter()
            .map(|g| build_operator(&g, &used).map(|op| (g, op)))
            .collect();
        let norm = Rational::from_integer(factorial(n as u32)).recip();
        let mut b = MultidiffOperator::zero(dim, 2);
        for r in ops {
            let (g, op) = r?;
            if op.is_zero() {
                continue;
            }
            let w = weights.weight(&g)?;
            if !w.is_zero() {
                b.add_scaled(&op, &(&w * &norm));
            }
        }
        coeffs.push(b);
    }
    Ok(StarProduct {
        input: pi.clone(),
        pi: used,
        series: FormalSeries::new(coeffs)?,
        exact: weights.is_exact(),
    })
}

/// `Σ_n (ħⁿ/n!) Σ Π π^{i_k j_k} ∂_{i₁…i_n} f ∂_{j₁…j_n} g` for constant `π`.
pub fn moyal(
    pi: &MultivectorField,
    f: &Polynomial,
    g: &Polynomial,
    order: usize,
) -> Result<FormalSeries<Polynomial>> {
    check_bivector(pi)?;
    if !pi.is_constant() {
        return Err(Error::NotConstant(pi.to_string()));
    }
    let dim = pi.dim();
    if f.dim() != dim || g.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: if f.dim() != dim { f.dim() } else { g.dim() },
        });
    }
    let mut entries = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let c = pi.component(&[i, j]).constant_term();
            if !c.is_zero() {
                entries.push((i, j, c));
            }
        }
    }
    // power of P = Σ πⁱʲ ∂ᵢ ⊗ ∂ⱼ as a map (I, J) ↦ coefficient
    let mut power: HashMap<(MultiIndex, MultiIndex), Rational> = HashMap::new();
    power.insert((MultiIndex::zero(dim), MultiIndex::zero(dim)), Rational::one());
    let mut out = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let mut value = Polynomial::zero(dim);
        let norm = Rational::from_integer(factorial(n as u32)).recip();
        for ((a, b), c) in &power {
            let fa = f.derivative_multi(a);
            if fa.is_zero() {
                continue;
            }
            let gb = g.derivative_multi(b);
            if gb.is_zero() {
                continue;
            }
            value += &(&fa * &gb).scale(&(c * &norm));
        }
        out.push(value);
        let mut next: HashMap<(MultiIndex, MultiIndex), Rational> = HashMap::new();
        for ((a, b), c) in &power {
            for (i, j, p) in &entries {
                let key = (a.bump(*i, 1), b.bump(*j, 1));
                *next.entry(key).or_insert_with(Rational::zero) += c * p;
            }
        }
        next.retain(|_, c| !c.is_zero());
        power = next;
    }
    FormalSeries::new(out)
}

/// `f ⋆ g` order by order.
pub fn apply_star(
    s: &StarProduct,
    f: &Polynomial,
    g: &Polynomial,
) -> Result<FormalSeries<Polynomial>> {
    let coeffs = s
        .series
        .coeffs()
        .iter()
        .map(|b| b.apply(&[f.clone(), g.clone()]))
        .collect::<Result<Vec<_>>>()?;
    FormalSeries::new(coeffs)
}

/// Outcome of [`verify_associativity`].
#[derive(Clone, Debug, PartialEq)]
pub struct AssociativityReport {
    /// `Σ_{i+j=n} Bᵢ∘Bⱼ` for each order `n`.
    pub residuals: Vec<MultidiffOperator>,
    /// First monomial triple `(f, g, h)` and order where
    /// `(f⋆g)⋆h ≠ f⋆(g⋆h)`.
    pub sample_failure: Option<(Polynomial, Polynomial, Polynomial, usize)>,
    pub triples_checked: usize,
}

impl AssociativityReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(MultidiffOperator::is_zero) && self.sample_failure.is_none()
    }

    /// Lowest order with a nonzero residual.
    pub fn first_failing_order(&self) -> Option<usize> {
        self.residuals.iter().position(|r| !r.is_zero())
    }
}

impl fmt::Display for AssociativityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, r) in self.residuals.iter().enumerate() {
            writeln!(f, "order {n}: {r}")?;
        }
        match &self.sample_failure {
            None => writeln!(f, "samples: {} triples agree", self.triples_checked)?,
            Some((a, b, c, n)) => writeln!(f, "samples: differ at order {n} on ({a}, {b}, {c})")?,
        }
        write!(f, "{}", if self.passed() { "associative" } else { "not associative" })
    }
}

/// Operator-level residuals plus evaluation on monomial triples of degree
/// at most `degree_cap`.
pub fn verify_associativity(s: &StarProduct, degree_cap: u32) -> Result<AssociativityReport> {
    let residuals = associativity_residuals(&s.series)?;
    let dim = s.dim();
    let monos: Vec<Polynomial> = MultiIndex::all_up_to(dim, degree_cap)
        .into_iter()
        .map(|m| Polynomial::monomial(dim, m, Rational::one()))
        .collect();
    let mut products: HashMap<(usize, usize), FormalSeries<Polynomial>> = HashMap::new();
    for (i, a) in monos.iter().enumerate() {
        for (j, b) in monos.iter().enumerate() {
            products.insert((i, j), apply_star(s, a, b)?);
        }
    }
    let order = s.order();
    let b = s.series.coeffs();
    let mut checked = 0;
    for i in 0..monos.len() {
        for j in 0..monos.len() {
            let fg = &products[&(i, j)];
            for k in 0..monos.len() {
                let gh = &products[&(j, k)];
                checked += 1;
                for n in 0..=order {
                    let mut diff = Polynomial::zero(dim);
                    for (p, bp) in b.iter().enumerate().take(n + 1) {
                        let q = n - p;
                        diff += &bp.apply(&[fg.coeff(q).clone(), monos[k].clone()])?;
                        diff -= &b[p].apply(&[monos[i].clone(), gh.coeff(q).clone()])?;
                    }
                    if !diff.is_zero() {
                        return Ok(AssociativityReport {
                            residuals,
                            sample_failure: Some((
                                monos[i].clone(),
                                monos[j].clone(),
                                monos[k].clone(),
                                n,
                            )),
                            triples_checked: checked,
                        });
                    }
                }
            }
        }
    }
    Ok(AssociativityReport {
        residuals,
        sample_failure: None,
        triples_checked: checked,
    })
}

/// `B₁⁻` recovers the structure that was fed into the graph sum.
pub fn verify_quantization(s: &StarProduct) -> bool {
    match extract_b1_minus(&s.series) {
        Ok(beta) => &beta == s.pi(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multivector::poisson_apply;
    use crate::poly::rat;

    fn mv(dim: usize, s: &str) -> MultivectorField {
        MultivectorField::parse(dim, s).unwrap()
    }
    fn poly(dim: usize, s: &str) -> Polynomial {
        Polynomial::parse(dim, s).unwrap()
    }
    fn graph(s: &str) -> AdmissibleGraph {
        AdmissibleGraph::decode(s).unwrap()
    }

    #[test]
    fn order_one_operator() {
        let pi = mv(2, "x * d/dx ^ d/dy");
        let op = build_operator(&graph("1; L R"), &pi).unwrap();
        let (f, g) = (poly(2, "x^2*y"), poly(2, "y^2 + x"));
        assert_eq!(op.apply(&[f.clone(), g.clone()]).unwrap(), poisson_apply(&pi, &f, &g).unwrap());
        let swapped = build_operator(&graph("1; R L"), &pi).unwrap();
        assert_eq!(swapped, op.scale(&rat(-1, 1)));
    }

    #[test]
    fn constant_structure_kills_internal_edges() {
        let pi = mv(3, "d/dx ^ d/dy + 2 * d/dy ^ d/dz");
        for g in enumerate(2).unwrap() {
            let op = build_operator(&g, &pi).unwrap();
            assert_eq!(op.is_zero(), g.has_internal_target(), "{g}");
        }
    }

    /// Direct six-index sum for the graph `3; L 2; 1 L; 2 R`.
    fn figure_graph_oracle(pi: &MultivectorField, f: &Polynomial, g: &Polynomial) -> Polynomial {
        let d = pi.dim();
        let mut total = Polynomial::zero(d);
        let p = |a: usize, b: usize| pi.component(&[a, b]);
        for i1 in 0..d {
            for i2 in 0..d {
                for i3 in 0..d {
                    for i4 in 0..d {
                        for i5 in 0..d {
                            for i6 in 0..d {
                                let t = &(&(&p(i5, i6) * &p(i3, i4).derivative(i5).derivative(i2))
                                    * &p(i1, i2).derivative(i3))
                                    * &(&f.derivative(i1).derivative(i4) * &g.derivative(i6));
                                total += &t;
                            }
                        }
                    }
                }
            }
        }
        total
    }

    #[test]
    fn order_three_example_graph() {
        // vertex 1 → (L, 2), vertex 2 → (1, L), vertex 3 → (2, R)
        let g = graph("3; L 2; 1 L; 2 R");
        let pi = mv(3, "x*y * d/dx ^ d/dy + z^2 * d/dy ^ d/dz + x^2*z * d/dx ^ d/dz");
        let op = build_operator(&g, &pi).unwrap();
        assert!(!op.is_zero());
        let (f, h) = (poly(3, "x^3*y + z^2*x*y"), poly(3, "y^2*z + x"));
        assert_eq!(op.apply(&[f.clone(), h.clone()]).unwrap(), figure_graph_oracle(&pi, &f, &h));
    }

    #[test]
    fn moyal_examples() {
        let pi = mv(2, "d/dx ^ d/dy");
        let s = |f: &str, g: &str| moyal(&pi, &poly(2, f), &poly(2, g), 3).unwrap().to_string();
        assert_eq!(s("x", "y"), "x*y + 1*h");
        assert_eq!(s("y", "x"), "x*y - 1*h");
        assert_eq!(s("x^2", "y^2"), "x^2*y^2 + 4*x*y*h + 2*h^2");
        assert!(moyal(&mv(2, "x * d/dx ^ d/dy"), &poly(2, "x"), &poly(2, "y"), 2).is_err());
    }

    #[test]
    fn star_examples() {
        let pi = mv(2, "d/dx ^ d/dy");
        let s = star_product(&pi, 2, &WeightSource::builtin(), StarOptions::default()).unwrap();
        let ap = |f: &str, g: &str| apply_star(&s, &poly(2, f), &poly(2, g)).unwrap().to_string();
        assert_eq!(ap("x", "y"), "x*y + 1*h");
        assert_eq!(ap("x^2", "y^2"), "x^2*y^2 + 4*x*y*h + 2*h^2");
        assert!(verify_quantization(&s));

        let pi = mv(2, "x * d/dx ^ d/dy");
        let s = star_product(&pi, 2, &WeightSource::builtin(), StarOptions::default()).unwrap();
        let (f, g) = (poly(2, "x^2*y + y^3"), poly(2, "x*y^2"));
        let r = apply_star(&s, &f, &g).unwrap();
        assert_eq!(r.coeff(0), &(&f * &g));
        assert_eq!(r.coeff(1), &poisson_apply(&pi, &f, &g).unwrap());
    }

    #[test]
    fn unit_is_preserved() {
        let pi = mv(3, "x * d/dy ^ d/dz + y * d/dz ^ d/dx + z * d/dx ^ d/dy");
        let s = star_product(&pi, 2, &WeightSource::builtin(), StarOptions::default()).unwrap();
        let one = Polynomial::one(3);
        for f in ["x^2*y + z", "y*z^2", "1"] {
            let f = poly(3, f);
            let a = apply_star(&s, &f, &one).unwrap();
            let b = apply_star(&s, &one, &f).unwrap();
            for n in 0..=2 {
                let expected = if n == 0 { f.clone() } else { Polynomial::zero(3) };
                assert_eq!(a.coeff(n), &expected);
                assert_eq!(b.coeff(n), &expected);
            }
        }
    }

    #[test]
    fn associativity_of_shipped_structures() {
        for (dim, src) in [
            (2, "d/dx ^ d/dy"),
            (2, "x * d/dx ^ d/dy"),
            (3, "x * d/dy ^ d/dz + y * d/dz ^ d/dx + z * d/dx ^ d/dy"),
        ] {
            let pi = mv(dim, src);
            let s = star_product(&pi, 2, &WeightSource::builtin(), StarOptions::default()).unwrap();
            let report = verify_associativity(&s, 2).unwrap();
            assert!(report.passed(), "{src}: {report}");
        }
    }

    #[test]
    fn corrupted_weight_breaks_associativity() {
        let pi = mv(2, "d/dx ^ d/dy");
        let mut table = WeightTable::builtin(2).unwrap();
        let moyal_graph = graph("2; L R; L R");
        assert_eq!(table.get(&moyal_graph), Some(&WeightValue::rational(rat(1, 4))));
        table.insert(moyal_graph, WeightValue::rational(rat(1, 3)));
        let s = star_product(&pi, 2, &WeightSource::Table(table), StarOptions::default()).unwrap();
        let report = verify_associativity(&s, 2).unwrap();
        assert_eq!(report.first_failing_order(), Some(2));
        assert!(report.sample_failure.is_some());
    }

    #[test]
    fn dirac_scaling_and_symmetric_part() {
        let pi = mv(2, "x * d/dx ^ d/dy");
        let opts = StarOptions { dirac: true, ..Default::default() };
        let s = star_product(&pi, 1, &WeightSource::builtin(), opts).unwrap();
        assert!(verify_quantization(&s));
        assert_eq!(extract_b1_minus(s.series()).unwrap(), pi.scale(&rat(1, 2)));

        let s = star_product(&pi, 1, &WeightSource::builtin(), StarOptions::default()).unwrap();
        let sym = s.series().coeff(1).symmetric_part().unwrap();
        let series = FormalSeries::new(vec![s.series().coeff(0).clone(), sym]).unwrap();
        let broken = StarProduct::from_series(pi, series).unwrap();
        assert!(!verify_quantization(&broken));
    }

    #[test]
    fn rejects_non_poisson_unless_allowed() {
        let pi = mv(3, "z * d/dx ^ d/dy + x * d/dx ^ d/dz");
        assert!(matches!(
            star_product(&pi, 1, &WeightSource::builtin(), StarOptions::default()),
            Err(Error::NotPoisson(_))
        ));
        let opts = StarOptions { allow_non_poisson: true, ..Default::default() };
        let s = star_product(&pi, 2, &WeightSource::builtin(), opts).unwrap();
        assert!(!verify_associativity(&s, 1).unwrap().passed());
    }

    #[test]
    fn missing_weights_reported() {
        let pi = mv(2, "x * d/dx ^ d/dy");
        assert!(matches!(
            star_product(&pi, 3, &WeightSource::builtin(), StarOptions::default()),
            Err(Error::MissingWeight(_))
        ));
        // constant structures only need the factorising graphs
        let s = star_product(&mv(2, "d/dx ^ d/dy"), 3, &WeightSource::builtin(), StarOptions::default())
            .unwrap();
        assert_eq!(s.order(), 3);
    }
}
