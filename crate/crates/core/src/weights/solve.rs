//! Order-`n` weights from associativity.
//!
//! With `B₀, …, B_{n−1}` known exactly, the order-`n` associativity condition
//! `Σ_{i+j=n} Bᵢ∘Bⱼ = 0` is linear in the unknown weights through
//! `B_n = (1/n!) Σ ω_Γ B_{Γ,π}`. Collecting it for several Poisson
//! structures, coefficient by coefficient, and adding the exact symmetries
//! of the weight integral gives a rational linear system. Directions it
//! leaves free (gauge freedom) are pinned to the simplest rational inside the
//! Monte-Carlo confidence interval.

use std::collections::{BTreeMap, HashMap};

use log::info;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graphs::{enumerate, swap_edges, AdmissibleGraph};
use crate::hochschild::gerstenhaber_compose;
use crate::linalg::{rref, simplest_rational_in, to_f64, Equation};
use crate::multivector::{is_poisson, MultivectorField};
use crate::operator::MultidiffOperator;
use crate::poly::{factorial, MultiIndex, Rational};
use crate::star::{build_operator, star_product, StarOptions, WeightSource};

use super::{weight_mc, WeightEstimate};

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Monte-Carlo samples per graph; 0 forbids pinning.
    pub samples: u64,
    pub seed: u64,
    /// Width of the confidence interval in standard errors.
    pub sigmas: f64,
    /// Also estimate every graph and report those outside the interval.
    pub check_all: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            samples: 4_000_000,
            seed: 1,
            sigmas: 3.0,
            check_all: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolvedWeights {
    pub order: usize,
    pub weights: BTreeMap<AdmissibleGraph, Rational>,
    pub rank: usize,
    pub unknowns: usize,
    pub equations: usize,
    /// Free directions fixed by Monte-Carlo.
    pub pinned: Vec<(AdmissibleGraph, WeightEstimate, Rational)>,
    /// Filled when [`SolveOptions::check_all`] is set.
    pub estimates: BTreeMap<AdmissibleGraph, WeightEstimate>,
    /// Graphs whose solved weight lies outside the confidence interval.
    pub outliers: Vec<AdmissibleGraph>,
}

/// Poisson structures whose associativity constraints are used by default.
pub fn default_test_structures() -> Vec<MultivectorField> {
    [
        (2, "d/dx ^ d/dy"),
        (2, "x * d/dx ^ d/dy"),
        (3, "x * d/dy ^ d/dz + y * d/dz ^ d/dx + z * d/dx ^ d/dy"),
        (2, "x^2 * d/dx ^ d/dy + y^3 * d/dx ^ d/dy + x*y * d/dx ^ d/dy"),
        (3, "x*z^2 * d/dx ^ d/dy + y^2 * d/dx ^ d/dy"),
    ]
    .into_iter()
    .map(|(d, s)| MultivectorField::parse(d, s).expect("valid structure"))
    .collect()
}

/// Linear symmetry relations: edge swaps negate, relabelling internal
/// vertices preserves, the mirror `L ↔ R` multiplies by `(−1)ⁿ`.
fn symmetry_equations(
    graphs: &[AdmissibleGraph],
    index: &HashMap<AdmissibleGraph, usize>,
) -> Result<Vec<Equation>> {
    let mut eqs = Vec::new();
    for (i, g) in graphs.iter().enumerate() {
        let n = g.order();
        let one = Rational::one();
        for k in 1..=n {
            let mut e = Equation::new();
            e.add(i, &one);
            e.add(index[&swap_edges(g, k)?], &one);
            eqs.push(e);
        }
        for k in 0..n.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(k, k + 1);
            let mut e = Equation::new();
            e.add(i, &one);
            e.add(index[&g.relabel(&perm)?], &-one.clone());
            eqs.push(e);
        }
        let sign = if n % 2 == 0 { -one.clone() } else { one.clone() };
        let mut e = Equation::new();
        e.add(i, &one);
        e.add(index[&g.mirror()], &sign);
        eqs.push(e);
    }
    Ok(eqs)
}

/// Solve for all order-`n` weights. Lower orders come from the built-in
/// table and must be rational.
pub fn solve_weights_by_associativity(
    n: usize,
    structures: &[MultivectorField],
    opts: SolveOptions,
) -> Result<SolvedWeights> {
    if n == 0 {
        return Err(Error::InvalidArgument("order 0 has no unknown weights".into()));
    }
    let graphs = enumerate(n)?;
    let index: HashMap<AdmissibleGraph, usize> =
        graphs.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
    let unknowns = graphs.len();
    let norm = Rational::from_integer(factorial(n as u32)).recip();

    let mut equations = Vec::new();
    for (p, pi) in structures.iter().enumerate() {
        if !is_poisson(pi)? {
            return Err(Error::NotPoisson(pi.to_string()));
        }
        let lower = star_product(pi, n - 1, &WeightSource::builtin(), StarOptions::default())?;
        let b = lower.series().coeffs();
        let dim = pi.dim();
        let mu = MultidiffOperator::multiplication(dim);
        let mut known = MultidiffOperator::zero(dim, 3);
        for i in 1..n {
            known.add_assign(&gerstenhaber_compose(&b[i], &b[n - i])?);
        }
        let mut rows: BTreeMap<(Vec<MultiIndex>, MultiIndex), Equation> = BTreeMap::new();
        for (key, c) in known.terms() {
            for (m, v) in c.terms() {
                rows.entry((key.clone(), m.clone())).or_default().rhs -= v;
            }
        }
        for (col, g) in graphs.iter().enumerate() {
            let bg = build_operator(g, pi)?;
            if bg.is_zero() {
                continue;
            }
            let mut op = gerstenhaber_compose(&bg, &mu)?;
            op.add_assign(&gerstenhaber_compose(&mu, &bg)?);
            for (key, c) in op.terms() {
                for (m, v) in c.terms() {
                    rows.entry((key.clone(), m.clone())).or_default().add(col, &(v * &norm));
                }
            }
        }
        info!("structure {p}: {} associativity equations", rows.len());
        equations.extend(rows.into_values());
    }
    equations.extend(symmetry_equations(&graphs, &index)?);

    let reduced = rref(&equations, unknowns);
    let rank = reduced.rank();
    if reduced.inconsistent {
        return Err(Error::Inconsistent {
            rank,
            equations: equations.len(),
            unknowns,
        });
    }
    let free = reduced.free_columns();
    info!("rank {rank} of {unknowns}, free columns {free:?}");
    if !free.is_empty() && opts.samples == 0 {
        let names: Vec<String> = free.iter().map(|&c| graphs[c].encode()).collect();
        return Err(Error::Underdetermined {
            rank,
            unknowns,
            detail: format!("free: {}", names.join(", ")),
        });
    }

    let particular = reduced.solve_with(&BTreeMap::new());
    let directions: Vec<Vec<Rational>> = free
        .iter()
        .map(|&c| {
            let v = reduced.solve_with(&BTreeMap::from([(c, Rational::one())]));
            v.iter().zip(&particular).map(|(a, b)| a - b).collect()
        })
        .collect();

    let mut estimates = BTreeMap::new();
    let mut estimate = |col: usize| -> Result<WeightEstimate> {
        let g = &graphs[col];
        if let Some(e) = estimates.get(g) {
            return Ok(Clone::clone(e));
        }
        let e = weight_mc(g, opts.samples, graph_seed(opts.seed, col))?;
        estimates.insert(g.clone(), e.clone());
        Ok(e)
    };

    // weighted least squares for the free parameters over every graph they move
    let k = free.len();
    let mut normal = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for col in 0..unknowns {
        let row: Vec<f64> = directions.iter().map(|d| to_f64(&d[col])).collect();
        if row.iter().all(|v| *v == 0.0) {
            continue;
        }
        let e = estimate(col)?;
        let w = 1.0 / e.standard_error.max(1e-9).powi(2);
        let b = e.mean - to_f64(&particular[col]);
        for i in 0..k {
            rhs[i] += w * row[i] * b;
            for j in 0..k {
                normal[i][j] += w * row[i] * row[j];
            }
        }
    }
    let (fit, cov) = solve_normal(&normal, &rhs).ok_or_else(|| Error::Underdetermined {
        rank,
        unknowns,
        detail: "free directions are not separated by the Monte-Carlo estimates".into(),
    })?;
    let mut pinned = Vec::new();
    let mut values = BTreeMap::new();
    for (j, &c) in free.iter().enumerate() {
        let sd = cov[j][j].max(0.0).sqrt();
        let half = opts.sigmas * sd;
        let r = simplest_rational_in(fit[j] - half, fit[j] + half);
        let fitted = WeightEstimate {
            mean: fit[j],
            standard_error: sd,
            samples: opts.samples,
            seed: opts.seed,
            rejected: 0,
        };
        info!("pinned {} to {r} from {fitted:?}", graphs[c]);
        values.insert(c, r.clone());
        pinned.push((graphs[c].clone(), fitted, r));
    }
    let solution = reduced.solve_with(&values);
    let weights: BTreeMap<AdmissibleGraph, Rational> =
        graphs.iter().cloned().zip(solution).collect();

    let mut outliers = Vec::new();
    if opts.check_all {
        for (col, g) in graphs.iter().enumerate() {
            let e = estimate(col)?;
            if !e.within(to_f64(&weights[g]), opts.sigmas) {
                outliers.push(g.clone());
            }
        }
    }
    Ok(SolvedWeights {
        order: n,
        weights,
        rank,
        unknowns,
        equations: equations.len(),
        pinned,
        estimates,
        outliers,
    })
}

/// Seed for the estimate of graph number `col`, so that estimates of
/// different graphs are independent.
pub fn graph_seed(seed: u64, col: usize) -> u64 {
    seed.wrapping_add((col as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Solve `A t = b` for small symmetric positive `A`; also returns `A⁻¹`.
fn solve_normal(a: &[Vec<f64>], b: &[f64]) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let k = b.len();
    // Gauss-Jordan on [A | I | b]
    let mut m: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            row.push(b[i]);
            row
        })
        .collect();
    for c in 0..k {
        let p = (c..k).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs()))?;
        if m[p][c].abs() < 1e-300 {
            return None;
        }
        m.swap(c, p);
        let inv = 1.0 / m[c][c];
        m[c].iter_mut().for_each(|v| *v *= inv);
        for r in 0..k {
            if r != c {
                let f = m[r][c];
                let pivot = m[c].clone();
                m[r].iter_mut().zip(&pivot).for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    let t = m.iter().map(|row| row[2 * k]).collect();
    let inv = m.iter().map(|row| row[k..2 * k].to_vec()).collect();
    Some((t, inv))
}

impl SolvedWeights {
    /// Weights that are not zero.
    pub fn nonzero(&self) -> impl Iterator<Item = (&AdmissibleGraph, &Rational)> {
        self.weights.iter().filter(|(_, w)| !w.is_zero())
    }
}
