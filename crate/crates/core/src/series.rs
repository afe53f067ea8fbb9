//! ħ-formal power series truncated at an explicit order.

use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::text;

/// `Σ_{n=0}^{N} ħⁿ cₙ`. The truncation order `N` is `coeffs.len() - 1` and is
/// never extended implicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries<T> {
    coeffs: Vec<T>,
}

impl<T> FormalSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "a formal series needs at least the order-0 coefficient".into(),
            ));
        }
        Ok(FormalSeries { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &T {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> FormalSeries<U> {
        FormalSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Drop all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Result<Self>
    where
        T: Clone,
    {
        if order > self.order() {
            return Err(Error::TruncationMismatch {
                left: self.order(),
                right: order,
            });
        }
        Ok(FormalSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        })
    }
}

/// Printed as `p0 + p1*h + p2*h^2 ...`; multi-term coefficients are
/// parenthesised, zero coefficients are skipped.
impl fmt::Display for FormalSeries<Polynomial> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, p) in self.coeffs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let hpow = match n {
                0 => String::new(),
                1 => "h".to_string(),
                _ => format!("h^{n}"),
            };
            let (negative, body) = if p.len() == 1 {
                let (m, c) = p.terms().next().expect("one term");
                let mono = text::format_scaled_monomial(p.dim(), &c.abs(), m);
                let body = if n == 0 { mono } else { format!("{mono}*{hpow}") };
                (c.is_negative(), body)
            } else if n == 0 {
                (false, p.to_string())
            } else {
                (false, format!("({p})*{hpow}"))
            };
            match (first, negative) {
                (true, false) => write!(f, "{body}")?,
                (true, true) => write!(f, "-{body}")?,
                (false, false) => write!(f, " + {body}")?,
                (false, true) => write!(f, " - {body}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
