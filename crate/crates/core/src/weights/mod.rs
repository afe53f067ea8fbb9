//! Weights of admissible graphs.
//!
//! A weight is the integral over configurations of `n` distinct points in the
//! upper half-plane `ℋ` of `dφ_{e₁} ∧ … ∧ dφ_{e₂ₙ}`, with `L` placed at 0 and
//! `R` at 1, and `φ(p, q) = (1/2π) arg((q − p)/(q − p̄))`.
//!
//! [`weight_mc`] estimates it by Monte-Carlo. Each sample contributes the
//! Jacobian determinant of the edge angles in the coordinates
//! `(x₁, y₁, …, x_n, y_n)` divided by the sampling density. Points come from
//! the unit disk mapped onto `ℋ` by `z = i(1 + w)/(1 − w)`, mixed with
//! `1/r`-shaped neighbourhoods of 0, 1 and the other points, where `dφ`
//! blows up. Batches are seeded from `(seed, batch index)` and run in
//! parallel, so estimates do not depend on the thread count.

mod exact;
mod mzv;
mod solve;

use std::f64::consts::PI;

use log::debug;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{validate, AdmissibleGraph, Target};

pub use exact::{
    builtin_weight, order_six_zeta_weight, parse_weight_file, weight_exact, WeightTable, WeightValue,
    ORDER_SIX_ZETA_WEIGHT,
};
pub use mzv::{mzv, mzv_eval, MAX_MZV_WEIGHT, MAX_PRECISION_DIGITS};
pub use solve::{
    default_test_structures, graph_seed, solve_weights_by_associativity, SolveOptions, SolvedWeights,
};

/// Samples closer than this to each other or to 0, 1 are rejected.
pub const SINGULARITY_EPS: f64 = 1e-8;

/// Default number of batches used for error bars.
pub const DEFAULT_BATCHES: usize = 32;

/// A point with positive imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPoint {
    re: f64,
    im: f64,
}

impl UpperHalfPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if im.is_nan() || im <= 0.0 || !re.is_finite() || !im.is_finite() {
            return Err(Error::NotInUpperHalfPlane(format!("{re} + {im}i")));
        }
        Ok(UpperHalfPoint { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Pairwise distinct points of `ℋ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    points: Vec<UpperHalfPoint>,
}

impl Configuration {
    pub fn new(points: Vec<UpperHalfPoint>) -> Result<Self> {
        for i in 0..points.len() {
            for j in 0..i {
                if points[i] == points[j] {
                    return Err(Error::CoincidentPoints);
                }
            }
        }
        Ok(Configuration { points })
    }

    pub fn points(&self) -> &[UpperHalfPoint] {
        &self.points
    }
}

/// `φ(p, q)` on the principal branch, in `(−½, ½]`. `q` may lie on the real
/// axis.
pub fn angle_phi(p: UpperHalfPoint, q: Complex64) -> Result<f64> {
    if q.im < 0.0 {
        return Err(Error::NotInUpperHalfPlane(format!("{q}")));
    }
    let p = p.to_complex();
    if p == q {
        return Err(Error::CoincidentPoints);
    }
    Ok(raw_phi(p, q))
}

fn raw_phi(p: Complex64, q: Complex64) -> f64 {
    ((q - p) / (q - p.conj())).arg() / (2.0 * PI)
}

/// `(∂φ/∂x_p, ∂φ/∂y_p, ∂φ/∂x_q, ∂φ/∂y_q)`.
pub fn angle_gradient(p: Complex64, q: Complex64) -> [f64; 4] {
    let i = Complex64::i();
    let a = (q - p).inv();
    let b = (q - p.conj()).inv();
    let c = 1.0 / (2.0 * PI);
    [
        c * (b - a).im,
        c * (-i * a - i * b).im,
        c * (a - b).im,
        c * (i * a - i * b).im,
    ]
}

/// `(1/2πi) log((y − z̄)/(z − ȳ))`: the integral over `x ∈ ℋ` of
/// `dφ(x, y) ∧ dφ(x, z)`. The ratio has modulus one, so the value is real.
/// Points may lie on the real axis; there the ratio can be −1 and the limit
/// from inside `ℋ` is taken (`+½` when `re y < re z`).
pub fn wedge_integral_closed(y: Complex64, z: Complex64) -> Result<f64> {
    if y.im < 0.0 || z.im < 0.0 {
        return Err(Error::NotInUpperHalfPlane(format!("{y}, {z}")));
    }
    if y == z {
        if y.im > 0.0 {
            return Ok(0.0);
        }
        return Err(Error::CoincidentPoints);
    }
    let ratio = (y - z.conj()) / (z - y.conj());
    let on_cut = ratio.im.abs() <= 1e-15 * ratio.norm() && ratio.re < 0.0;
    if on_cut {
        return Ok(if y.re < z.re { 0.5 } else { -0.5 });
    }
    Ok(ratio.arg() / (2.0 * PI))
}

/// Monte-Carlo estimate with a batch-mean standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub rejected: u64,
}

impl WeightEstimate {
    /// `|mean − value| ≤ k σ`.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.standard_error
    }
}

#[derive(Clone, Copy, Debug)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    pub batches: usize,
}

impl McOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        McOptions {
            samples,
            seed,
            batches: DEFAULT_BATCHES,
        }
    }
}

/// Edge endpoint for the integrand: a moving point or a fixed one.
#[derive(Clone, Copy, Debug)]
enum End {
    Moving(usize),
    Fixed(Complex64),
}

fn graph_edges(g: &AdmissibleGraph) -> Vec<(usize, End)> {
    g.edges()
        .map(|(s, t)| {
            let end = match t {
                Target::Vertex(v) => End::Moving(v - 1),
                Target::L => End::Fixed(Complex64::new(0.0, 0.0)),
                Target::R => End::Fixed(Complex64::new(1.0, 0.0)),
            };
            (s - 1, end)
        })
        .collect()
}

/// Determinant of the Jacobian of the edge angles at `points`.
fn integrand(points: &[Complex64], edges: &[(usize, End)], m: &mut [f64]) -> f64 {
    let d = 2 * points.len();
    m.iter_mut().for_each(|v| *v = 0.0);
    for (row, (s, t)) in edges.iter().enumerate() {
        let p = points[*s];
        let q = match t {
            End::Moving(v) => points[*v],
            End::Fixed(c) => *c,
        };
        let g = angle_gradient(p, q);
        m[row * d + 2 * s] += g[0];
        m[row * d + 2 * s + 1] += g[1];
        if let End::Moving(v) = t {
            m[row * d + 2 * v] += g[2];
            m[row * d + 2 * v + 1] += g[3];
        }
    }
    determinant(m, d)
}

/// In-place LU with partial pivoting.
fn determinant(m: &mut [f64], d: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..d {
        let mut p = c;
        for r in c + 1..d {
            if m[r * d + c].abs() > m[p * d + c].abs() {
                p = r;
            }
        }
        let pivot = m[p * d + c];
        if pivot == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..d {
                m.swap(p * d + k, c * d + k);
            }
            det = -det;
        }
        det *= pivot;
        for r in c + 1..d {
            let f = m[r * d + c] / pivot;
            if f != 0.0 {
                for k in c..d {
                    m[r * d + k] -= f * m[c * d + k];
                }
            }
        }
    }
    det
}

/// Mixture shares: the disk map, a `|z|⁻³` tail, and `1/r` neighbourhoods
/// of the fixed points and of the points already drawn.
const DISK_SHARE: f64 = 0.4;
const TAIL_SHARE: f64 = 0.1;

/// Radius of the neighbourhoods of fixed points.
const NEAR_RADIUS: f64 = 0.5;

/// Density of the disk map `z = i(1 + w)/(1 − w)`, `w` uniform: `4/(π|z + i|⁴)`.
fn disk_density(z: Complex64) -> f64 {
    4.0 / (PI * (z + Complex64::i()).norm_sqr().powi(2))
}

fn sample_disk(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = rng.random::<f64>().sqrt();
    let t = 2.0 * PI * rng.random::<f64>();
    let w = Complex64::from_polar(r, t);
    let one = Complex64::new(1.0, 0.0);
    Complex64::i() * (one + w) / (one - w)
}

/// `1/(π|z|³)` outside the unit half-disk.
fn tail_density(z: Complex64) -> f64 {
    let r = z.norm();
    if r <= 1.0 {
        0.0
    } else {
        1.0 / (PI * r * r * r)
    }
}

fn sample_tail(rng: &mut ChaCha8Rng) -> Complex64 {
    let r = 1.0 / (1.0 - rng.random::<f64>());
    Complex64::from_polar(r, PI * rng.random::<f64>())
}

/// Density `1/(θ ρ r)` around `c` with `r` uniform in `(0, ρ)`: a half-disk
/// (`θ = π`) for a real centre, the full disk (`θ = 2π`) otherwise.
fn near_density(z: Complex64, c: Complex64, rho: f64) -> f64 {
    let r = (z - c).norm();
    if r >= rho || r == 0.0 {
        return 0.0;
    }
    let span = if c.im == 0.0 { PI } else { 2.0 * PI };
    1.0 / (span * rho * r)
}

fn sample_near(rng: &mut ChaCha8Rng, c: Complex64, rho: f64) -> Complex64 {
    let r = rho * rng.random::<f64>();
    let span = if c.im == 0.0 { PI } else { 2.0 * PI };
    c + Complex64::from_polar(r, span * rng.random::<f64>())
}

/// Neighbourhood radius of a centre: fixed for real points, the height for
/// points of `ℋ`, so that clusters are resolved at every scale.
fn radius(c: Complex64) -> f64 {
    if c.im == 0.0 {
        NEAR_RADIUS
    } else {
        c.im
    }
}

/// Draw `points` one after another from the mixture and return the product
/// of the conditional densities. The `1/r` components keep the variance
/// finite near the singularities of `dφ`, the tail component at infinity.
fn sample_configuration(rng: &mut ChaCha8Rng, fixed: &[Complex64], points: &mut [Complex64]) -> f64 {
    let mut density = 1.0;
    for k in 0..points.len() {
        let centres = fixed.len() + k;
        let centre = |j: usize, pts: &[Complex64]| if j < fixed.len() { fixed[j] } else { pts[j - fixed.len()] };
        let u = rng.random::<f64>();
        let z = if u < DISK_SHARE {
            sample_disk(rng)
        } else if u < DISK_SHARE + TAIL_SHARE {
            sample_tail(rng)
        } else {
            let c = centre(rng.random_range(0..centres), points);
            sample_near(rng, c, radius(c))
        };
        let share = (1.0 - DISK_SHARE - TAIL_SHARE) / centres as f64;
        let mut q = DISK_SHARE * disk_density(z) + TAIL_SHARE * tail_density(z);
        for j in 0..centres {
            let c = centre(j, points);
            q += share * near_density(z, c, radius(c));
        }
        points[k] = z;
        density *= q;
    }
    density
}

fn too_close(points: &[Complex64], fixed: &[Complex64]) -> bool {
    for (i, p) in points.iter().enumerate() {
        if !p.re.is_finite() || !p.im.is_finite() || p.im < SINGULARITY_EPS {
            return true;
        }
        if fixed.iter().any(|f| (p - f).norm() < SINGULARITY_EPS) {
            return true;
        }
        if points[..i].iter().any(|q| (p - q).norm() < SINGULARITY_EPS) {
            return true;
        }
    }
    false
}

fn batch_sizes(samples: u64, batches: usize) -> Vec<u64> {
    let b = batches as u64;
    (0..b)
        .map(|i| samples / b + u64::from(i < samples % b))
        .collect()
}

fn integrate(n: usize, edges: &[(usize, End)], opts: McOptions) -> Result<WeightEstimate> {
    if opts.samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is needed".into()));
    }
    if opts.batches < 2 {
        return Err(Error::InvalidArgument("at least two batches are needed".into()));
    }
    let mut fixed: Vec<Complex64> = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for (_, e) in edges {
        if let End::Fixed(c) = e {
            if !fixed.contains(c) {
                fixed.push(*c);
            }
        }
    }
    let sizes = batch_sizes(opts.samples, opts.batches);
    let results: Vec<(f64, u64, u64)> = sizes
        .par_iter()
        .enumerate()
        .map(|(b, &size)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let d = 2 * n;
            let mut m = vec![0.0; d * d];
            let mut pts = vec![Complex64::new(0.0, 0.0); n];
            let mut sum = 0.0;
            let mut rejected = 0u64;
            for _ in 0..size {
                let density = sample_configuration(&mut rng, &fixed, &mut pts);
                if pts.iter().any(|p| p.im <= 0.0) {
                    // outside the domain: the integrand vanishes
                    continue;
                }
                if too_close(&pts, &fixed) {
                    rejected += 1;
                    continue;
                }
                let v = integrand(&pts, edges, &mut m) / density;
                if v.is_finite() {
                    sum += v;
                } else {
                    rejected += 1;
                }
            }
            (sum, size, rejected)
        })
        .collect();
    let total: f64 = results.iter().map(|r| r.0).sum();
    let rejected: u64 = results.iter().map(|r| r.2).sum();
    let mean = total / opts.samples as f64;
    let means: Vec<f64> = results
        .iter()
        .filter(|r| r.1 > 0)
        .map(|r| r.0 / r.1 as f64)
        .collect();
    let k = means.len() as f64;
    let bm = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    if rejected > 0 {
        debug!("rejected {rejected} of {} samples near the diagonal", opts.samples);
    }
    Ok(WeightEstimate {
        mean,
        standard_error: (var / k).sqrt(),
        samples: opts.samples,
        seed: opts.seed,
        rejected,
    })
}

/// Monte-Carlo weight of `g` with [`DEFAULT_BATCHES`] batches.
pub fn weight_mc(g: &AdmissibleGraph, samples: u64, seed: u64) -> Result<WeightEstimate> {
    weight_mc_with(g, McOptions::new(samples, seed))
}

pub fn weight_mc_with(g: &AdmissibleGraph, opts: McOptions) -> Result<WeightEstimate> {
    if !validate(g) {
        return Err(Error::InvalidGraph(g.encode()));
    }
    if g.order() == 0 {
        return Ok(WeightEstimate {
            mean: 1.0,
            standard_error: 0.0,
            samples: opts.samples,
            seed: opts.seed,
            rejected: 0,
        });
    }
    integrate(g.order(), &graph_edges(g), opts)
}

/// Monte-Carlo estimate of `∫_{x∈ℋ} dφ(x, y) ∧ dφ(x, z)`.
pub fn wedge_integral_mc(y: Complex64, z: Complex64, opts: McOptions) -> Result<WeightEstimate> {
    if y.im < 0.0 || z.im < 0.0 {
        return Err(Error::NotInUpperHalfPlane(format!("{y}, {z}")));
    }
    integrate(1, &[(0, End::Fixed(y)), (0, End::Fixed(z))], opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::swap_edges;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }
    fn uhp(re: f64, im: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(re, im).unwrap()
    }

    #[test]
    fn angle_examples() {
        assert!(angle_phi(uhp(0.0, 1.0), c(0.0, 2.0)).unwrap().abs() < 1e-15);
        assert!((angle_phi(uhp(0.0, 1.0), c(1.0, 0.0)).unwrap() + 0.25).abs() < 1e-15);
        assert!((angle_phi(uhp(0.0, 1.0), c(0.0, 0.0)).unwrap().abs() - 0.5).abs() < 1e-15);
        assert!((angle_phi(uhp(0.0, 1.0), c(-1.0, 0.0)).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(angle_phi(uhp(0.0, 1.0), c(0.0, 1.0)), Err(Error::CoincidentPoints));
        assert!(UpperHalfPoint::new(0.0, 0.0).is_err());
        assert!(Configuration::new(vec![uhp(0.0, 1.0), uhp(0.0, 1.0)]).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pts = [(c(0.3, 0.7), c(-1.2, 0.4)), (c(2.0, 0.1), c(0.0, 0.0)), (c(-0.5, 3.0), c(1.0, 0.0))];
        let h = 1e-6;
        for (p, q) in pts {
            let g = angle_gradient(p, q);
            let fd = [
                (raw_phi(p + h, q) - raw_phi(p - h, q)) / (2.0 * h),
                (raw_phi(p + c(0.0, h), q) - raw_phi(p - c(0.0, h), q)) / (2.0 * h),
                (raw_phi(p, q + h) - raw_phi(p, q - h)) / (2.0 * h),
                (raw_phi(p, q + c(0.0, h)) - raw_phi(p, q - c(0.0, h))) / (2.0 * h),
            ];
            for k in 0..4 {
                if k >= 2 && q.im == 0.0 {
                    continue;
                }
                assert!((g[k] - fd[k]).abs() < 1e-6, "{p} {q} {k}: {} vs {}", g[k], fd[k]);
            }
        }
    }

    #[test]
    fn determinant_small() {
        let mut m = vec![0.0, 2.0, 1.0, 3.0];
        assert_eq!(determinant(&mut m, 2), -2.0);
        let mut m = vec![2.0, 0.0, 1.0, 1.0, 3.0, 2.0, 1.0, 1.0, 2.0];
        assert!((determinant(&mut m, 3) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_examples() {
        let v = wedge_integral_closed(c(0.0, 2.0), c(1.0, 1.0)).unwrap();
        let expected = (c(-1.0, 3.0).arg() - c(1.0, 3.0).arg()) / (2.0 * PI);
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.1024).abs() < 1e-4);
        assert_eq!(wedge_integral_closed(c(0.0, 0.0), c(1.0, 0.0)).unwrap(), 0.5);
        assert_eq!(wedge_integral_closed(c(0.0, 1.0), c(0.0, 1.0)).unwrap(), 0.0);
        // continuity towards the real endpoints
        let near = wedge_integral_closed(c(1e-9, 1e-9), c(1.0 - 1e-9, 1e-9)).unwrap();
        assert!((near - 0.5).abs() < 1e-6);
    }

    #[test]
    fn order_one_mc() {
        let g = AdmissibleGraph::decode("1; L R").unwrap();
        let e = weight_mc(&g, 200_000, 7).unwrap();
        assert!((e.mean - 0.5).abs() < (3.0 * e.standard_error).max(0.01), "{e:?}");
        let s = weight_mc(&AdmissibleGraph::decode("1; R L").unwrap(), 200_000, 7).unwrap();
        assert!((s.mean + e.mean).abs() < 1e-12);
    }

    #[test]
    fn mc_is_deterministic_and_thread_independent() {
        let g = AdmissibleGraph::decode("2; 2 L; L R").unwrap();
        let a = weight_mc(&g, 20_000, 3).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| weight_mc(&g, 20_000, 3).unwrap());
        assert_eq!(a, b);
        let c2 = weight_mc(&g, 20_000, 4).unwrap();
        assert_ne!(a.mean, c2.mean);
    }

    #[test]
    fn free_endpoint_mc_matches_closed_form() {
        let (y, z) = (c(0.0, 2.0), c(1.0, 1.0));
        let e = wedge_integral_mc(y, z, McOptions::new(400_000, 11)).unwrap();
        let exact = wedge_integral_closed(y, z).unwrap();
        assert!((e.mean - exact).abs() < (4.0 * e.standard_error).max(5e-3), "{e:?} vs {exact}");
    }

    fn agree(a: &WeightEstimate, b: f64, sign: f64, tol: f64) -> bool {
        let se = (a.standard_error.powi(2) * 2.0).sqrt();
        (a.mean - sign * b).abs() < (4.0 * se).max(tol)
    }

    #[test]
    fn mc_respects_edge_swap_and_mirror() {
        for enc in ["2; L R; 1 R", "2; 2 L; L R", "2; L 2; 1 R"] {
            let g = AdmissibleGraph::decode(enc).unwrap();
            let w = weight_mc(&g, 200_000, 5).unwrap();
            let swapped = weight_mc(&swap_edges(&g, 1).unwrap(), 200_000, 6).unwrap();
            assert!(agree(&w, swapped.mean, -1.0, 2e-3), "{enc}: {w:?} {swapped:?}");
            let mirrored = weight_mc(&g.mirror(), 200_000, 8).unwrap();
            assert!(agree(&w, mirrored.mean, 1.0, 2e-3), "{enc}: {w:?} {mirrored:?}");
        }
        let g = AdmissibleGraph::decode("1; L R").unwrap();
        let m = weight_mc(&g.mirror(), 100_000, 2).unwrap();
        assert!(agree(&m, 0.5, -1.0, 5e-3), "{m:?}");
    }

    #[test]
    fn moyal_graphs_factorise() {
        for (enc, w) in [("2; L R; L R", 0.25), ("2; L R; R L", -0.25), ("2; R L; R L", 0.25)] {
            let e = weight_mc(&AdmissibleGraph::decode(enc).unwrap(), 200_000, 9).unwrap();
            assert!(e.within(w, 4.0) || (e.mean - w).abs() < 2e-3, "{enc}: {e:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let bad = AdmissibleGraph::from_targets_unchecked(vec![(Target::L, Target::L)]);
        assert!(weight_mc(&bad, 10, 1).is_err());
        let g = AdmissibleGraph::decode("1; L R").unwrap();
        assert!(weight_mc(&g, 0, 1).is_err());
        assert_eq!(batch_sizes(10, 4), vec![3, 3, 2, 2]);
    }
}
