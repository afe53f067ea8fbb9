//! Algebraic identities on random polynomial data: dimension ≤ 3,
//! coefficient degree ≤ 2. Shared by the property tests and the
//! acceptance run.

#![allow(dead_code)]

use deformq_core::hochschild::{
    extract_b1_minus, gauge_transform, gerstenhaber_bracket, hkr, hochschild_d,
    is_associative_deformation, is_hochschild_cocycle, is_skew, symmetrize_order1,
};
use deformq_core::graphs::{enumerate, swap_edges};
use deformq_core::multivector::{
    apply_formal_diffeo, is_formal_poisson, is_poisson, jacobiator, poisson_apply, schouten_bracket,
    MultivectorField,
};
use deformq_core::poly::{int, MultiIndex};
use deformq_core::star::{build_operator, star_product, StarOptions, WeightSource};
use deformq_core::{FormalSeries, GaugeSeries, MultidiffOperator, Polynomial, Rational};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

fn sign(e: usize) -> Rational {
    if e.is_multiple_of(2) {
        int(1)
    } else {
        int(-1)
    }
}

fn index(dim: usize, max: u32) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0..=max, dim)
        .prop_filter("total order", move |v| v.iter().sum::<u32>() <= max)
        .prop_map(MultiIndex::from_vec)
}

fn poly(dim: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((index(dim, 2), -3i64..=3), 0..4).prop_map(move |terms| {
        let mut p = Polynomial::zero(dim);
        for (m, c) in terms {
            p.add_term(m, int(c));
        }
        p
    })
}

fn increasing(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            go(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, dim, k, &mut Vec::new(), &mut out);
    out
}

fn multivector(dim: usize, k: usize) -> impl Strategy<Value = MultivectorField> {
    let slots = increasing(dim, k);
    prop::collection::vec(poly(dim), slots.len()).prop_map(move |cs| {
        let mut a = MultivectorField::zero(dim, k);
        for (idx, c) in slots.iter().zip(cs) {
            a.add_component(idx, c);
        }
        a
    })
}

fn operator(dim: usize, arity: usize, min_order: u32) -> impl Strategy<Value = MultidiffOperator> {
    let key = prop::collection::vec(
        index(dim, 2).prop_filter("order", move |m| m.total() >= min_order),
        arity,
    );
    prop::collection::vec((key, poly(dim)), 1..3).prop_map(move |terms| {
        let mut op = MultidiffOperator::zero(dim, arity);
        for (k, c) in terms {
            op.add_term(k, c);
        }
        op
    })
}

fn dim_and<S, F>(f: F) -> impl Strategy<Value = S::Value>
where
    S: Strategy,
    F: Fn(usize) -> S,
{
    (1usize..=3).prop_flat_map(f)
}

fn add(a: &MultivectorField, b: &MultivectorField) -> MultivectorField {
    a.add(b).unwrap()
}

// [a,b] + (−1)^{(kₐ−1)(k_b−1)}[b,a] = 0
fn schouten_skew_holds(a: &MultivectorField, b: &MultivectorField) -> bool {
    let (ka, kb) = (a.degree(), b.degree());
    let ab = schouten_bracket(a, b).unwrap();
    let ba = schouten_bracket(b, a).unwrap();
    let s = sign((ka + 1) * (kb + 1));
    add(&ab, &ba.scale(&s)).is_zero()
}

fn schouten_jacobi_holds(a: &MultivectorField, b: &MultivectorField, c: &MultivectorField) -> bool {
    let s = |x: &MultivectorField, y: &MultivectorField| sign((x.degree() + 1) * (y.degree() + 1));
    let br = |x: &MultivectorField, y: &MultivectorField| schouten_bracket(x, y).unwrap();
    let t1 = br(a, &br(b, c)).scale(&s(a, c));
    let t2 = br(b, &br(c, a)).scale(&s(b, a));
    let t3 = br(c, &br(a, b)).scale(&s(c, b));
    add(&add(&t1, &t2), &t3).is_zero()
}

fn gdeg(op: &MultidiffOperator) -> usize {
    op.arity() + 1
}

// (−1)^{m₁m₃}[φ,[ψ,χ]] + cyclic = 0 with mᵢ = arityᵢ − 1
fn gerstenhaber_jacobi_holds(a: &MultidiffOperator, b: &MultidiffOperator, c: &MultidiffOperator) -> bool {
    let s = |x: &MultidiffOperator, y: &MultidiffOperator| sign(gdeg(x) * gdeg(y));
    let br = |x: &MultidiffOperator, y: &MultidiffOperator| gerstenhaber_bracket(x, y).unwrap();
    let mut sum = br(a, &br(b, c)).scale(&s(a, c));
    sum.add_assign(&br(b, &br(c, a)).scale(&s(b, a)));
    sum.add_assign(&br(c, &br(a, b)).scale(&s(c, b)));
    sum.is_zero()
}

/// The textbook Hochschild coboundary, evaluated pointwise.
fn coboundary_at(phi: &MultidiffOperator, fs: &[Polynomial]) -> Polynomial {
    let n = phi.arity();
    let mut out = &fs[0] * &phi.apply(&fs[1..]).unwrap();
    for i in 0..n {
        let mut args: Vec<Polynomial> = fs[..i].to_vec();
        args.push(&fs[i] * &fs[i + 1]);
        args.extend_from_slice(&fs[i + 2..]);
        out += &phi.apply(&args).unwrap().scale(&sign(i + 1));
    }
    out += &(&phi.apply(&fs[..n]).unwrap() * &fs[n]).scale(&sign(n + 1));
    out
}

fn poisson_2d() -> impl Strategy<Value = MultivectorField> {
    // every bivector in two variables is Poisson
    multivector(2, 2).prop_filter("nonzero", |p| !p.is_zero())
}

/// `π^{ij} = ε_{ijk} ∂_k C`, Poisson for every `C`.
fn nambu(c: &Polynomial) -> MultivectorField {
    let mut pi = MultivectorField::zero(3, 2);
    pi.add_component(&[1, 2], c.derivative(0));
    pi.add_component(&[0, 2], -c.derivative(1));
    pi.add_component(&[0, 1], c.derivative(2));
    pi
}

fn cubic(dim: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((index(dim, 3), -3i64..=3), 1..5).prop_map(move |terms| {
        let mut p = Polynomial::zero(dim);
        for (m, c) in terms {
            p.add_term(m, int(c));
        }
        p
    })
}

fn bivector_3d() -> impl Strategy<Value = MultivectorField> {
    prop_oneof![cubic(3).prop_map(|c| nambu(&c)), multivector(3, 2)]
}

fn gauge(dim: usize, order: usize) -> impl Strategy<Value = GaugeSeries> {
    prop::collection::vec(operator(dim, 1, 1), order).prop_map(move |ts| {
        let mut ops = vec![MultidiffOperator::identity(dim)];
        ops.extend(ts);
        GaugeSeries::new(ops).unwrap()
    })
}

fn kontsevich(pi: &MultivectorField, order: usize) -> FormalSeries<MultidiffOperator> {
    star_product(pi, order, &WeightSource::builtin(), StarOptions::default())
        .unwrap()
        .series()
        .clone()
}

/// Run `test` on `cases` inputs from a fixed-seed generator.
fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    TestRunner::new_with_rng(config, rng)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

pub fn schouten_graded_skew(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (0..=d, 0..=d) .prop_filter("two functions", |(x, y)| x + y > 0) .prop_flat_map(move |(x, y)| (multivector(d, x), multivector(d, y)))), |(a, b)| {
            prop_assert!(schouten_skew_holds(&a, &b));
        Ok(())
    })
}

pub fn schouten_graded_jacobi(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (1..=d, 1..=d, 1..=d) .prop_flat_map(move |(x, y, z)| (multivector(d, x), multivector(d, y), multivector(d, z)))), |(a, b, c)| {
            prop_assert!(schouten_jacobi_holds(&a, &b, &c));
        Ok(())
    })
}

pub fn gerstenhaber_graded_skew(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (1usize..=3, 1usize..=3) .prop_flat_map(move |(x, y)| (operator(d, x, 0), operator(d, y, 0)))), |(a, b)| {
            let ab = gerstenhaber_bracket(&a, &b).unwrap();
            let mut sum = gerstenhaber_bracket(&b, &a).unwrap().scale(&sign(gdeg(&a) * gdeg(&b)));
            sum.add_assign(&ab);
            prop_assert!(sum.is_zero());
        Ok(())
    })
}

pub fn gerstenhaber_graded_jacobi(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (1usize..=2, 1usize..=2, 1usize..=2) .prop_flat_map(move |(x, y, z)| (operator(d, x, 0), operator(d, y, 0), operator(d, z, 0)))), |(a, b, c)| {
            prop_assert!(gerstenhaber_jacobi_holds(&a, &b, &c));
        Ok(())
    })
}

pub fn hochschild_d_squares_to_zero(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (1usize..=3).prop_flat_map(move |n| operator(d, n, 0))), |phi| {
            prop_assert!(hochschild_d(&hochschild_d(&phi).unwrap()).unwrap().is_zero());
        Ok(())
    })
}

pub fn hochschild_d_is_the_bracket_with_multiplication(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (1usize..=3).prop_flat_map(move |n| { (operator(d, n, 0), prop::collection::vec(poly(d), n + 1)) })), |(phi, fs)| {
            let mu = MultidiffOperator::multiplication(phi.dim());
            let d = hochschild_d(&phi).unwrap();
            prop_assert_eq!(&d, &gerstenhaber_bracket(&phi, &mu).unwrap().scale(&int(-1)));
            prop_assert_eq!(d.apply(&fs).unwrap(), coboundary_at(&phi, &fs));
        Ok(())
    })
}

pub fn hkr_images_are_cocycles(cases: u32) -> Result<(), String> {
    check(cases, dim_and(|d| (1..=d).prop_flat_map(move |k| multivector(d, k))), |a| {
            prop_assert!(is_hochschild_cocycle(&hkr(&a).unwrap()).unwrap());
        Ok(())
    })
}

pub fn gauge_preserves_associativity_and_skew_part(cases: u32) -> Result<(), String> {
    check(cases, (poisson_2d(), gauge(2, 2)), |(pi, t)| {
            let b = kontsevich(&pi, 2);
            let c = gauge_transform(&t, &b).unwrap();
            prop_assert!(is_associative_deformation(&c).unwrap());
            prop_assert_eq!(extract_b1_minus(&c).unwrap(), extract_b1_minus(&b).unwrap());
        Ok(())
    })
}

pub fn symmetrize_order1_gives_skew_first_order_term(cases: u32) -> Result<(), String> {
    check(cases, (poisson_2d(), gauge(2, 2)), |(pi, t)| {
            let b = gauge_transform(&t, &kontsevich(&pi, 2)).unwrap();
            let (t1, c) = symmetrize_order1(&b).unwrap();
            prop_assert!(is_skew(c.coeff(1)).unwrap());
            prop_assert_eq!(extract_b1_minus(&c).unwrap(), extract_b1_minus(&b).unwrap());
            prop_assert!(is_associative_deformation(&c).unwrap());
            // the symmetric part of B₁ is the coboundary of the returned T₁
            prop_assert_eq!(b.coeff(1).symmetric_part().unwrap(), hochschild_d(&t1).unwrap());
        Ok(())
    })
}

pub fn poisson_bracket_is_a_derivation_in_each_slot(cases: u32) -> Result<(), String> {
    check(cases, (2usize..=3).prop_flat_map(|d| (multivector(d, 2), poly(d), poly(d), poly(d))), |(pi, f, g, h)| {
            let left = poisson_apply(&pi, &f, &(&g * &h)).unwrap();
            let right = &(&g * &poisson_apply(&pi, &f, &h).unwrap()) + &(&poisson_apply(&pi, &f, &g).unwrap() * &h);
            prop_assert_eq!(left, right);
        Ok(())
    })
}

pub fn is_poisson_matches_jacobiator_on_coordinates(cases: u32) -> Result<(), String> {
    check(cases, bivector_3d(), |pi| {
            let x: Vec<Polynomial> = (0..3).map(|i| Polynomial::var(3, i)).collect();
            let mut jacobi_ok = true;
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        jacobi_ok &= jacobiator(&pi, &x[a], &x[b], &x[c]).unwrap().is_zero();
                    }
                }
            }
            prop_assert_eq!(is_poisson(&pi).unwrap(), jacobi_ok);
        Ok(())
    })
}

pub fn skew_cocycles_from_bivectors_are_biderivations(cases: u32) -> Result<(), String> {
    check(cases, (multivector(3, 2), poly(3), poly(3), poly(3)), |(pi, f, g, h)| {
            let b = hkr(&pi).unwrap();
            prop_assert!(is_hochschild_cocycle(&b).unwrap() && is_skew(&b).unwrap());
            let left = b.apply(&[f.clone(), &g * &h]).unwrap();
            let right = &(&g * &b.apply(&[f.clone(), h.clone()]).unwrap()) + &(&b.apply(&[f.clone(), g.clone()]).unwrap() * &h);
            prop_assert_eq!(left, right);
            let left = b.apply(&[&g * &h, f.clone()]).unwrap();
            let right = &(&g * &b.apply(&[h.clone(), f.clone()]).unwrap()) + &(&b.apply(&[g.clone(), f.clone()]).unwrap() * &h);
            prop_assert_eq!(left, right);
        Ok(())
    })
}

pub fn formal_diffeomorphisms_preserve_formal_poisson(cases: u32) -> Result<(), String> {
    check(cases, (cubic(3), multivector(3, 1), multivector(3, 1)), |(c, x1, x2)| {
            let zero2 = MultivectorField::zero(3, 2);
            let pi = FormalSeries::new(vec![zero2.clone(), nambu(&c), zero2]).unwrap();
            let x = FormalSeries::new(vec![MultivectorField::zero(3, 1), x1, x2]).unwrap();
            prop_assert!(is_formal_poisson(&pi).unwrap());
            let moved = apply_formal_diffeo(&x, &pi, 2).unwrap();
            prop_assert!(is_formal_poisson(&moved).unwrap());
        Ok(())
    })
}

pub fn edge_swap_negates_graph_operators(cases: u32) -> Result<(), String> {
    check(cases, (bivector_3d(), 1usize..=2, any::<prop::sample::Index>(), any::<prop::sample::Index>()), |(pi, n, pick, k)| {
            let graphs = enumerate(n).unwrap();
            let g = &graphs[pick.index(graphs.len())];
            let k = 1 + k.index(n);
            let a = build_operator(g, &pi).unwrap();
            let b = build_operator(&swap_edges(g, k).unwrap(), &pi).unwrap();
            prop_assert!(a.add(&b).unwrap().is_zero());
        Ok(())
    })
}
