//! Multiple zeta values `ζ(s₁,…,s_k) = Σ_{0<n₁<…<n_k} n₁^{−s₁}⋯n_k^{−s_k}`.
//!
//! Evaluated through the iterated-integral form split at ½: the word in
//! `ω₀ = dt/t`, `ω₁ = dt/(1−t)` is cut into an outer piece on `[½, 1]` and an
//! inner piece on `[0, ½]`; the outer piece becomes an integral on `[0, ½]`
//! of the reversed word with letters exchanged. Both are multiple
//! polylogarithms at ½, summed directly.

use crate::error::{Error, Result};

use super::WeightValue;

/// Largest supported weight `|s|`.
pub const MAX_MZV_WEIGHT: u32 = 6;

/// Digits that f64 evaluation can honour.
pub const MAX_PRECISION_DIGITS: u32 = 15;

// 2^-90 is far below f64 resolution
const TERMS: usize = 90;

/// `ζ(s)` for an admissible index (last entry > 1) of weight at most
/// [`MAX_MZV_WEIGHT`].
pub fn mzv(s: &[u32]) -> Result<f64> {
    let weight: u32 = s.iter().sum();
    if s.is_empty() || s.contains(&0) || *s.last().expect("nonempty") < 2 {
        return Err(Error::UnknownMzv(format!("{s:?} is not a convergent index")));
    }
    if weight > MAX_MZV_WEIGHT {
        return Err(Error::UnknownMzv(format!(
            "{s:?} has weight {weight} > {MAX_MZV_WEIGHT}"
        )));
    }
    // word from the outermost integration variable inwards: the largest
    // summation index comes first, x0^{s_k−1} x1 … x0^{s_1−1} x1
    let mut word = Vec::with_capacity(weight as usize);
    for &si in s.iter().rev() {
        word.extend(std::iter::repeat_n(0u8, si as usize - 1));
        word.push(1u8);
    }
    let mut total = 0.0;
    for cut in 0..=word.len() {
        let outer: Vec<u8> = word[..cut].iter().rev().map(|a| 1 - a).collect();
        let inner = &word[cut..];
        total += iterated_at_half(&outer) * iterated_at_half(inner);
    }
    Ok(total)
}

/// `∫_{0<t_w<…<t_1<½} ω_{a₁}(t₁)…ω_{a_w}(t_w)` for a word ending in `1` (or
/// empty).
fn iterated_at_half(word: &[u8]) -> f64 {
    if word.is_empty() {
        return 1.0;
    }
    debug_assert_eq!(*word.last().expect("nonempty"), 1);
    // decompose into exponents: x0^{n₁−1}x1 x0^{n₂−1}x1 …
    let mut exps = Vec::new();
    let mut run = 0u32;
    for &a in word {
        if a == 0 {
            run += 1;
        } else {
            exps.push(run + 1);
            run = 0;
        }
    }
    polylog_half(&exps)
}

/// `Li_{n₁,…,n_r}(½) = Σ_{m₁>…>m_r≥1} 2^{−m₁} / (m₁^{n₁}⋯m_r^{n_r})`.
fn polylog_half(exps: &[u32]) -> f64 {
    let r = exps.len();
    // inner[m] = Σ over the innermost r−1 indices below m, built outward
    let mut acc = vec![1.0f64; TERMS + 2];
    for level in (1..r).rev() {
        let mut next = vec![0.0f64; TERMS + 2];
        let mut running = 0.0;
        for m in 1..=TERMS + 1 {
            next[m] = running;
            running += acc[m] / (m as f64).powi(exps[level] as i32);
        }
        acc = next;
    }
    // acc[m] now sums the indices strictly below m (or is 1 when r = 1)
    let mut total = 0.0;
    let mut half_pow = 1.0;
    for (m, a) in acc.iter().enumerate().take(TERMS + 1).skip(1) {
        half_pow *= 0.5;
        total += half_pow * a / (m as f64).powi(exps[0] as i32);
    }
    total
}

/// Numeric value of `w` rounded to `precision` significant digits.
pub fn mzv_eval(w: &WeightValue, precision: u32) -> Result<f64> {
    if precision > MAX_PRECISION_DIGITS {
        return Err(Error::PrecisionUnavailable {
            requested: precision,
            max: MAX_PRECISION_DIGITS,
        });
    }
    let v = w.to_f64()?;
    Ok(round_significant(v, precision))
}

fn round_significant(v: f64, digits: u32) -> f64 {
    if v == 0.0 || digits == 0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits as usize - 1, v).parse().expect("formatted float parses")
}
