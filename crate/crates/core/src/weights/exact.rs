//! Exact weights in the basis `ζ(s)/π^{|s|}` with rational coefficients.
//!
//! Weight-file grammar, one record per line (`#` starts a comment):
//!
//! ```text
//! record := graph '|' value
//! value  := rational ( ('+' | '-') rational '*' 'zeta(' s (',' s)* ')' '/' 'pi^' w )*
//! ```
//!
//! `graph` is the text encoding of an admissible graph and `w` must equal
//! `s₁ + … + s_k`. A coefficient is taken literally, i.e. against
//! `ζ(s)/π^w`; values quoted against `(iπ)^w` convert with
//! [`WeightValue::from_i_pi_basis`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::graphs::{enumerate, validate, AdmissibleGraph, Target};
use crate::linalg::to_f64;
use crate::poly::Rational;
use crate::text::format_rational;

use super::mzv::mzv;

/// `Σ_s c_s ζ(s)/π^{|s|}`, the empty index standing for the rational part.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct WeightValue {
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl WeightValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(r: Rational) -> Self {
        let mut w = Self::zero();
        w.add(Vec::new(), r);
        w
    }

    /// Add `c · ζ(s)/π^{|s|}`.
    pub fn add(&mut self, s: Vec<u32>, c: Rational) {
        let e = self.terms.entry(s.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&s);
        }
    }

    /// From coefficients of `ζ(s)/(iπ)^{|s|}`. `(iπ)^w = (−1)^{w/2} π^w` for
    /// even `w`; a nonzero coefficient at odd weight would be imaginary.
    pub fn from_i_pi_basis<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut w = Self::zero();
        for (s, c) in terms {
            let weight: u32 = s.iter().sum();
            if c.is_zero() {
                continue;
            }
            if weight % 2 == 1 {
                return Err(Error::ImaginaryWeight(format!("zeta{s:?} at odd weight {weight}")));
            }
            let c = if (weight / 2) % 2 == 1 { -c } else { c };
            w.add(s, c);
        }
        Ok(w)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn rational_part(&self) -> Rational {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_rational(&self) -> bool {
        self.terms.keys().all(Vec::is_empty)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.rational_part())
    }

    /// Largest `|s|` present.
    pub fn max_weight(&self) -> u32 {
        self.terms.keys().map(|s| s.iter().sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut w = Self::zero();
        for (s, v) in &self.terms {
            w.add(s.clone(), v * c);
        }
        w
    }

    pub fn to_f64(&self) -> Result<f64> {
        let mut total = 0.0;
        for (s, c) in &self.terms {
            let basis = if s.is_empty() {
                1.0
            } else {
                let w: u32 = s.iter().sum();
                mzv(s)? / std::f64::consts::PI.powi(w as i32)
            };
            total += to_f64(c) * basis;
        }
        Ok(total)
    }

    pub fn parse(src: &str) -> Result<Self> {
        Parser { src, pos: 0 }.value()
    }
}

impl fmt::Display for WeightValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.rational_part()))?;
        for (s, c) in self.terms.iter().filter(|(s, _)| !s.is_empty()) {
            let idx: Vec<String> = s.iter().map(u32::to_string).collect();
            let w: u32 = s.iter().sum();
            let sign = if c.is_negative() { '-' } else { '+' };
            write!(f, " {sign} {} * zeta({}) / pi^{w}", format_rational(&c.abs()), idx.join(","))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.src, self.pos, msg)
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{lit}'")))
        }
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected digits"));
        }
        self.pos += len;
        Ok(rest[..len].parse().expect("ascii digits"))
    }

    fn rational(&mut self) -> Result<Rational> {
        let negative = self.eat("-");
        let num = self.digits()?;
        let den = if self.eat("/") {
            let start = self.pos;
            let d = self.digits()?;
            if d.is_zero() {
                self.pos = start;
                return Err(self.err("zero denominator"));
            }
            d
        } else {
            BigInt::one()
        };
        let r = Rational::new(num, den);
        Ok(if negative { -r } else { r })
    }

    fn value(&mut self) -> Result<WeightValue> {
        let mut w = WeightValue::rational(self.rational()?);
        loop {
            let sign = if self.eat("+") {
                Rational::one()
            } else if self.eat("-") {
                -Rational::one()
            } else {
                break;
            };
            let c = self.rational()? * sign;
            self.expect("*")?;
            self.expect("zeta(")?;
            let mut s = Vec::new();
            loop {
                let start = self.pos;
                let v: u32 = self
                    .digits()?
                    .try_into()
                    .map_err(|_| Error::parse(self.src, start, "index too large"))?;
                if v == 0 {
                    return Err(Error::parse(self.src, start, "zeta indices are positive"));
                }
                s.push(v);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
            self.expect("/")?;
            self.expect("pi^")?;
            let start = self.pos;
            let pw: u32 = self
                .digits()?
                .try_into()
                .map_err(|_| Error::parse(self.src, start, "power too large"))?;
            let weight: u32 = s.iter().sum();
            if pw != weight {
                return Err(Error::parse(
                    self.src,
                    start,
                    format!("pi^{pw} does not match the weight {weight} of zeta{s:?}"),
                ));
            }
            if *s.last().expect("nonempty") < 2 {
                return Err(Error::parse(self.src, start, "divergent zeta index"));
            }
            w.add(s, c);
        }
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err("unexpected trailing input"));
        }
        Ok(w)
    }
}

/// Exact weights keyed by graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightTable {
    entries: BTreeMap<AdmissibleGraph, WeightValue>,
}

impl WeightTable {
    pub fn get(&self, g: &AdmissibleGraph) -> Option<&WeightValue> {
        self.entries.get(g)
    }

    pub fn insert(&mut self, g: AdmissibleGraph, w: WeightValue) -> Option<WeightValue> {
        self.entries.insert(g, w)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AdmissibleGraph, &WeightValue)> {
        self.entries.iter()
    }

    /// Built-in values for every graph of order at most `max_order` (≤ 2).
    pub fn builtin(max_order: usize) -> Result<Self> {
        if max_order > 2 {
            return Err(Error::InvalidArgument(format!(
                "the built-in table stops at order 2, asked for {max_order}"
            )));
        }
        let mut t = Self::default();
        for n in 0..=max_order {
            for g in enumerate(n)? {
                let w = builtin_weight(&g).expect("complete up to order 2");
                t.insert(g, w);
            }
        }
        Ok(t)
    }

    /// One `graph | value` line per entry.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(g, w)| format!("{g} | {w}\n"))
            .collect()
    }
}

/// Parse a weight file; line numbers in errors are 1-based.
pub fn parse_weight_file(src: &str) -> Result<WeightTable> {
    let mut t = WeightTable::default();
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::WeightFile {
            line: line_no,
            message,
        };
        let (g, v) = line
            .split_once('|')
            .ok_or_else(|| bad("expected '<graph> | <value>'".into()))?;
        let graph = AdmissibleGraph::decode(g.trim()).map_err(|e| bad(e.to_string()))?;
        let value = WeightValue::parse(v.trim()).map_err(|e| bad(e.to_string()))?;
        if value.max_weight() as usize > graph.order() {
            return Err(bad(format!(
                "zeta weight {} exceeds the graph order {}",
                value.max_weight(),
                graph.order()
            )));
        }
        if t.insert(graph.clone(), value).is_some() {
            return Err(bad(format!("duplicate entry for {graph}")));
        }
    }
    Ok(t)
}

/// Exact weight: built-in first, then `extra`; `None` when unknown.
pub fn weight_exact(g: &AdmissibleGraph, extra: Option<&WeightTable>) -> Result<Option<WeightValue>> {
    if !validate(g) {
        return Err(Error::InvalidGraph(g.encode()));
    }
    if let Some(w) = builtin_weight(g) {
        return Ok(Some(w));
    }
    Ok(extra.and_then(|t| t.get(g)).cloned())
}

/// Built-in values: every graph of order ≤ 2, and at any order the graphs
/// whose edges all land on `L` and `R` (the form factorises into `±½`s).
pub fn builtin_weight(g: &AdmissibleGraph) -> Option<WeightValue> {
    let n = g.order();
    if !g.has_internal_target() {
        let mut w = Rational::one();
        for (a, _) in g.targets() {
            let half = Rational::new(1.into(), 2.into());
            w *= if *a == Target::L { half } else { -half };
        }
        return Some(WeightValue::rational(w));
    }
    if n == 2 {
        let key = g.encode();
        return ORDER_TWO
            .iter()
            .find(|(enc, _, _)| *enc == key)
            .map(|(_, p, q)| WeightValue::rational(Rational::new((*p).into(), (*q).into())));
    }
    None
}

/// The order-6 weight `−1/6048 + (9/128) ζ(3)²/π⁶`, with `ζ(3)²` expanded
/// by the stuffle relation `ζ(3)² = 2ζ(3,3) + ζ(6)`.
pub const ORDER_SIX_ZETA_WEIGHT: &str = "-1/6048 + 9/64 * zeta(3,3) / pi^6 + 9/128 * zeta(6) / pi^6";

pub fn order_six_zeta_weight() -> WeightValue {
    WeightValue::parse(ORDER_SIX_ZETA_WEIGHT).expect("valid weight")
}

/// Order-2 graphs with an internal edge, as `(graph, numerator, denominator)`.
const ORDER_TWO: &[(&str, i64, i64)] = &[
    ("2; 2 L; 1 L", 0, 1),
    ("2; 2 L; L 1", 0, 1),
    ("2; 2 R; 1 R", 0, 1),
    ("2; 2 R; R 1", 0, 1),
    ("2; L 2; 1 L", 0, 1),
    ("2; L 2; L 1", 0, 1),
    ("2; R 2; 1 R", 0, 1),
    ("2; R 2; R 1", 0, 1),
    ("2; 2 L; L R", -1, 12),
    ("2; 2 L; R L", 1, 12),
    ("2; 2 R; L R", 1, 12),
    ("2; 2 R; R L", -1, 12),
    ("2; L 2; L R", 1, 12),
    ("2; L 2; R L", -1, 12),
    ("2; R 2; L R", -1, 12),
    ("2; R 2; R L", 1, 12),
    ("2; L R; 1 L", -1, 12),
    ("2; L R; 1 R", 1, 12),
    ("2; L R; L 1", 1, 12),
    ("2; L R; R 1", -1, 12),
    ("2; R L; 1 L", 1, 12),
    ("2; R L; 1 R", -1, 12),
    ("2; R L; L 1", -1, 12),
    ("2; R L; R 1", 1, 12),
    ("2; 2 L; 1 R", -1, 24),
    ("2; 2 L; R 1", 1, 24),
    ("2; 2 R; 1 L", -1, 24),
    ("2; 2 R; L 1", 1, 24),
    ("2; L 2; 1 R", 1, 24),
    ("2; L 2; R 1", -1, 24),
    ("2; R 2; 1 L", 1, 24),
    ("2; R 2; L 1", -1, 24),
];
