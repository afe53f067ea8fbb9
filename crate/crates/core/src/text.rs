//! Term-list text format shared by polynomials, multivector fields and
//! multidifferential operators.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := factor ('*' factor)*
//! factor  := rational | var ['^' uint] | wedge | slotder ['^' uint]
//! rational:= uint ['/' uint]
//! var     := 'x' | 'y' | 'z' | 'x' uint | 'x_' uint        (x1 is the first variable)
//! wedge   := 'd/d' var ('^' 'd/d' var)*                    (multivector basis)
//! slotder := 'd' uint '/d' var                             (derivative on slot uint)
//! ```
//!
//! `x`, `y`, `z` name the first three variables and are what the printer
//! emits when `dim ≤ 3`; above that the printer uses `x1 .. xd`. Terms with
//! equal monomial and basis are summed on input.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Rational};

pub fn var_name(dim: usize, var: usize) -> String {
    if dim <= 3 {
        ["x", "y", "z"][var].to_string()
    } else {
        format!("x{}", var + 1)
    }
}

pub fn format_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn format_monomial(dim: usize, m: &MultiIndex) -> String {
    let mut parts = Vec::new();
    for (v, &e) in m.exps().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(var_name(dim, v)),
            _ => parts.push(format!("{}^{}", var_name(dim, v), e)),
        }
    }
    parts.join("*")
}

/// `c*x^K` with `c ≥ 0`; coefficient 1 is omitted unless the monomial is 1.
pub fn format_scaled_monomial(dim: usize, c: &Rational, m: &MultiIndex) -> String {
    if m.is_zero() {
        format_rational(c)
    } else if c.is_one() {
        format_monomial(dim, m)
    } else {
        format!("{}*{}", format_rational(c), format_monomial(dim, m))
    }
}

/// One parsed term before it is interpreted as a polynomial, multivector or
/// operator term.
#[derive(Clone, Debug)]
pub struct RawTerm {
    pub coef: Rational,
    pub mono: MultiIndex,
    /// Multivector basis `d/dx_i ^ d/dx_j ^ ...` in written order.
    pub wedge: Vec<usize>,
    /// Slot derivatives `(slot, var, power)`.
    pub slots: Vec<(usize, usize, u32)>,
    /// Byte offset of the first derivative factor, if any.
    pub basis_at: Option<usize>,
}

impl RawTerm {
    pub fn basis_position(&self) -> Option<usize> {
        self.basis_at
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Wedge(usize),
    SlotDer(usize, usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, at: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.src, at, msg)
    }

    fn digits(&mut self) -> Option<(usize, &'a str)> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, &self.src[start..self.pos]))
    }

    fn var(&mut self) -> Result<usize> {
        let at = self.pos;
        let c = self.bytes.get(self.pos).copied();
        let idx = match c {
            Some(b'x') => {
                self.pos += 1;
                if self.bytes.get(self.pos) == Some(&b'_') {
                    self.pos += 1;
                    let (_, d) = self
                        .digits()
                        .ok_or_else(|| self.err(self.pos, "expected variable index after 'x_'"))?;
                    parse_index(d).ok_or_else(|| self.err(at, "variable index must be ≥ 1"))?
                } else if let Some((_, d)) = self.digits() {
                    parse_index(d).ok_or_else(|| self.err(at, "variable index must be ≥ 1"))?
                } else {
                    0
                }
            }
            Some(b'y') => {
                self.pos += 1;
                1
            }
            Some(b'z') => {
                self.pos += 1;
                2
            }
            _ => return Err(self.err(at, "expected variable (x, y, z, x1, x_1, ...)")),
        };
        if idx >= self.dim {
            return Err(self.err(
                at,
                format!("variable index {} exceeds dimension {}", idx + 1, self.dim),
            ));
        }
        Ok(idx)
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while self.pos < self.bytes.len() {
            let at = self.pos;
            let c = self.bytes[self.pos];
            let tok = match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    self.pos += 1;
                    continue;
                }
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'^' => {
                    self.pos += 1;
                    Tok::Caret
                }
                b'0'..=b'9' => {
                    let (_, d) = self.digits().expect("digit present");
                    Tok::Num(d.parse().expect("ascii digits"))
                }
                b'd' => {
                    self.pos += 1;
                    let slot = self.digits().map(|(_, d)| d.parse::<usize>());
                    if !self.src[self.pos..].starts_with("/d") {
                        return Err(self.err(at, "expected derivative 'd/dx' or 'dK/dx'"));
                    }
                    self.pos += 2;
                    let v = self.var()?;
                    match slot {
                        None => Tok::Wedge(v),
                        Some(Ok(s)) => Tok::SlotDer(s, v),
                        Some(Err(_)) => return Err(self.err(at, "slot index too large")),
                    }
                }
                b'x' | b'y' | b'z' => Tok::Var(self.var()?),
                _ => return Err(self.err(at, format!("unexpected character {:?}", c as char))),
            };
            out.push((at, tok));
        }
        Ok(out)
    }
}

fn parse_index(d: &str) -> Option<usize> {
    let i: usize = d.parse().ok()?;
    i.checked_sub(1)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
    i: usize,
    dim: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.i).map_or(self.src.len(), |(p, _)| *p)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.src, self.here(), msg)
    }

    fn uint(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = n.clone();
                self.i += 1;
                Ok(n)
            }
            _ => Err(self.err("expected unsigned integer")),
        }
    }

    fn small_uint(&mut self) -> Result<u32> {
        let at = self.here();
        let n = self.uint()?;
        u32::try_from(n).map_err(|_| Error::parse(self.src, at, "exponent too large"))
    }

    fn term(&mut self) -> Result<RawTerm> {
        let mut t = RawTerm {
            coef: Rational::one(),
            mono: MultiIndex::zero(self.dim),
            wedge: Vec::new(),
            slots: Vec::new(),
            basis_at: None,
        };
        loop {
            let at = self.here();
            match self.peek().cloned() {
                Some(Tok::Num(_)) => {
                    let n = self.uint()?;
                    let d = if self.peek() == Some(&Tok::Slash) {
                        self.i += 1;
                        let d = self.uint()?;
                        if d.is_zero() {
                            return Err(Error::parse(self.src, at, "zero denominator"));
                        }
                        d
                    } else {
                        BigInt::one()
                    };
                    t.coef *= Rational::new(n, d);
                }
                Some(Tok::Var(v)) => {
                    self.i += 1;
                    let e = if self.peek() == Some(&Tok::Caret) {
                        self.i += 1;
                        self.small_uint()?
                    } else {
                        1
                    };
                    t.mono = t.mono.bump(v, e);
                }
                Some(Tok::Wedge(v)) => {
                    self.i += 1;
                    if !t.wedge.is_empty() || !t.slots.is_empty() {
                        return Err(Error::parse(
                            self.src,
                            at,
                            "derivative factors must form one wedge chain joined by '^'",
                        ));
                    }
                    t.basis_at.get_or_insert(at);
                    t.wedge.push(v);
                    while self.peek() == Some(&Tok::Caret) {
                        self.i += 1;
                        match self.peek().cloned() {
                            Some(Tok::Wedge(w)) => {
                                self.i += 1;
                                t.wedge.push(w);
                            }
                            _ => return Err(self.err("expected 'd/d<var>' after '^'")),
                        }
                    }
                }
                Some(Tok::SlotDer(s, v)) => {
                    self.i += 1;
                    if !t.wedge.is_empty() {
                        return Err(Error::parse(
                            self.src,
                            at,
                            "slot derivatives cannot be mixed with a wedge basis",
                        ));
                    }
                    t.basis_at.get_or_insert(at);
                    let e = if self.peek() == Some(&Tok::Caret) {
                        self.i += 1;
                        self.small_uint()?
                    } else {
                        1
                    };
                    t.slots.push((s, v, e));
                }
                _ => return Err(self.err("expected number, variable or derivative")),
            }
            if self.peek() == Some(&Tok::Star) {
                self.i += 1;
            } else {
                return Ok(t);
            }
        }
    }
}

/// Parse a term list. The empty string and `0` both give no terms.
pub fn parse_terms(dim: usize, src: &str) -> Result<Vec<RawTerm>> {
    let lexer = Lexer {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        dim,
    };
    let toks = lexer.tokens()?;
    let mut p = Parser {
        src,
        toks,
        i: 0,
        dim,
    };
    let mut out = Vec::new();
    if p.peek().is_none() {
        return Err(p.err("empty expression"));
    }
    let mut sign = match p.peek() {
        Some(Tok::Minus) => {
            p.i += 1;
            -Rational::one()
        }
        Some(Tok::Plus) => {
            p.i += 1;
            Rational::one()
        }
        _ => Rational::one(),
    };
    loop {
        let mut t = p.term()?;
        t.coef *= &sign;
        out.push(t);
        match p.peek() {
            None => break,
            Some(Tok::Plus) => sign = Rational::one(),
            Some(Tok::Minus) => sign = -Rational::one(),
            Some(_) => return Err(p.err("expected '+', '-' or '*'")),
        }
        p.i += 1;
    }
    Ok(out)
}

/// Split `key: value` header lines and `#` comments off a document; the
/// remaining lines are joined into the body.
pub fn split_header(src: &str) -> (Vec<(String, String)>, String) {
    let mut header = Vec::new();
    let mut body = Vec::new();
    for line in src.lines() {
        let l = line.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some((k, v)) = l.split_once(':') {
            let k = k.trim();
            if body.is_empty() && !k.is_empty() && k.chars().all(|c| c.is_ascii_alphabetic()) {
                header.push((k.to_ascii_lowercase(), v.trim().to_string()));
                continue;
            }
        }
        body.push(l.to_string());
    }
    (header, body.join(" "))
}
