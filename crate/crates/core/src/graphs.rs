//! Admissible graphs of order `n`: internal vertices `1..=n`, each with two
//! ordered outgoing edges, plus the ground vertices `L` and `R`.
//!
//! Graphs are labelled; the edge order `e₁¹, e₁², …, e_n¹, e_n²` carries the
//! orientation of the weight form. Enumeration is lexicographic in the target
//! sequence with `1 < … < n < L < R`, vertex 1 most significant.
//!
//! Text form: `n; t11 t12; t21 t22; ...`, e.g. `2; 2 L; 1 R`; order 0 is `0`.
//! JSON form: an array of pairs whose entries are vertex numbers or `"L"` /
//! `"R"`, e.g. `[[2, "L"], [1, "R"]]`.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default guard for [`enumerate`]: order 4 has 160000 graphs.
pub const DEFAULT_ENUMERATION_CAP: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    /// Internal vertex, 1-based.
    Vertex(usize),
    L,
    R,
}

impl Target {
    pub fn is_ground(self) -> bool {
        matches!(self, Target::L | Target::R)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Vertex(k) => write!(f, "{k}"),
            Target::L => write!(f, "L"),
            Target::R => write!(f, "R"),
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "L" => Ok(Target::L),
            "R" => Ok(Target::R),
            _ => match s.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(Target::Vertex(k)),
                _ => Err(format!("expected a vertex number, L or R, got '{s}'")),
            },
        }
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Target::Vertex(k) => s.serialize_u64(*k as u64),
            Target::L => s.serialize_str("L"),
            Target::R => s.serialize_str("R"),
        }
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Target;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a positive vertex number, \"L\" or \"R\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Target, E> {
                if v == 0 {
                    return Err(E::custom("vertices are numbered from 1"));
                }
                Ok(Target::Vertex(v as usize))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Target, E> {
                if v <= 0 {
                    return Err(E::custom("vertices are numbered from 1"));
                }
                Ok(Target::Vertex(v as usize))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Target, E> {
                match v {
                    "L" => Ok(Target::L),
                    "R" => Ok(Target::R),
                    _ => Err(E::custom(format!("unknown target '{v}'"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A labelled graph; may be inadmissible until checked with [`validate`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdmissibleGraph {
    targets: Vec<(Target, Target)>,
}

impl AdmissibleGraph {
    /// Checked constructor.
    pub fn new(targets: Vec<(Target, Target)>) -> Result<Self> {
        let g = AdmissibleGraph { targets };
        if let Some(problem) = g.problem() {
            return Err(Error::InvalidGraph(format!("{g}: {problem}")));
        }
        Ok(g)
    }

    /// No admissibility check.
    pub fn from_targets_unchecked(targets: Vec<(Target, Target)>) -> Self {
        AdmissibleGraph { targets }
    }

    pub fn order(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[(Target, Target)] {
        &self.targets
    }

    /// Targets of vertex `k` (1-based).
    pub fn edges_of(&self, k: usize) -> (Target, Target) {
        self.targets[k - 1]
    }

    /// Edges in weight-form order `e₁¹, e₁², …` as `(source, target)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, Target)> + '_ {
        self.targets
            .iter()
            .enumerate()
            .flat_map(|(k, (a, b))| [(k + 1, *a), (k + 1, *b)])
    }

    /// Number of edges landing on `t`.
    pub fn in_degree(&self, t: Target) -> usize {
        self.edges().filter(|(_, e)| *e == t).count()
    }

    /// Some internal vertex receives an edge.
    pub fn has_internal_target(&self) -> bool {
        self.edges().any(|(_, t)| !t.is_ground())
    }

    fn problem(&self) -> Option<String> {
        let n = self.order();
        for (i, (a, b)) in self.targets.iter().enumerate() {
            let k = i + 1;
            for t in [a, b] {
                if let Target::Vertex(v) = t {
                    if *v == 0 || *v > n {
                        return Some(format!("target {v} of vertex {k} out of range 1..={n}"));
                    }
                    if *v == k {
                        return Some(format!("loop at vertex {k}"));
                    }
                }
            }
            if a == b {
                return Some(format!("both edges of vertex {k} end at {a}"));
            }
        }
        None
    }

    pub fn encode(&self) -> String {
        self.to_string()
    }

    /// Parse the text form; the result is validated.
    pub fn decode(src: &str) -> Result<Self> {
        let err = |pos: usize, msg: String| Error::parse(src, pos, msg);
        let mut parts = Vec::new();
        let mut start = 0;
        for (i, ch) in src.char_indices() {
            if ch == ';' {
                parts.push((start, &src[start..i]));
                start = i + 1;
            }
        }
        parts.push((start, &src[start..]));
        let (p0, head) = parts[0];
        let n: usize = head
            .trim()
            .parse()
            .map_err(|_| err(p0, format!("expected the order, got '{}'", head.trim())))?;
        if parts.len() - 1 != n {
            return Err(err(
                src.len(),
                format!("order {n} needs {n} target pairs, found {}", parts.len() - 1),
            ));
        }
        let mut targets = Vec::with_capacity(n);
        for (pos, part) in &parts[1..] {
            let toks: Vec<(usize, &str)> = part
                .split_whitespace()
                .map(|t| (pos + (t.as_ptr() as usize - part.as_ptr() as usize), t))
                .collect();
            if toks.len() != 2 {
                return Err(err(*pos, format!("expected two targets, got '{}'", part.trim())));
            }
            let parse = |(p, t): (usize, &str)| t.parse::<Target>().map_err(|m| err(p, m));
            targets.push((parse(toks[0])?, parse(toks[1])?));
        }
        Self::new(targets)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graphs serialize")
    }

    /// Parse the JSON form; the result is validated.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let g: AdmissibleGraph = serde_json::from_value(v.clone())
            .map_err(|e| Error::InvalidGraph(format!("bad JSON graph: {e}")))?;
        Self::new(g.targets)
    }

    /// Mirror image `L ↔ R`.
    pub fn mirror(&self) -> Self {
        let flip = |t: Target| match t {
            Target::L => Target::R,
            Target::R => Target::L,
            v => v,
        };
        AdmissibleGraph {
            targets: self.targets.iter().map(|(a, b)| (flip(*a), flip(*b))).collect(),
        }
    }

    /// Relabel internal vertices: vertex `k` becomes `perm[k-1] + 1`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        let map = |t: Target| match t {
            Target::Vertex(v) => Target::Vertex(perm[v - 1] + 1),
            g => g,
        };
        let mut targets = vec![(Target::L, Target::R); n];
        for (k, (a, b)) in self.targets.iter().enumerate() {
            targets[perm[k]] = (map(*a), map(*b));
        }
        Ok(AdmissibleGraph { targets })
    }
}

impl fmt::Display for AdmissibleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.order())?;
        for (a, b) in &self.targets {
            write!(f, "; {a} {b}")?;
        }
        Ok(())
    }
}

impl FromStr for AdmissibleGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::decode(s)
    }
}

/// All five admissibility conditions.
pub fn validate(g: &AdmissibleGraph) -> bool {
    g.problem().is_none()
}

/// Transpose the two targets of vertex `k`.
pub fn swap_edges(g: &AdmissibleGraph, k: usize) -> Result<AdmissibleGraph> {
    if k == 0 || k > g.order() {
        return Err(Error::VertexOutOfRange {
            vertex: k,
            order: g.order(),
        });
    }
    let mut out = g.clone();
    let (a, b) = out.targets[k - 1];
    out.targets[k - 1] = (b, a);
    Ok(out)
}

/// `(n(n+1))ⁿ`.
pub fn count(n: usize) -> u128 {
    (n as u128 * (n as u128 + 1)).pow(n as u32)
}

/// Ordered target pairs available to vertex `k` of an order-`n` graph.
fn choices(n: usize, k: usize) -> Vec<(Target, Target)> {
    let all: Vec<Target> = (1..=n)
        .filter(|&v| v != k)
        .map(Target::Vertex)
        .chain([Target::L, Target::R])
        .collect();
    let mut out = Vec::with_capacity(all.len() * (all.len() - 1));
    for a in &all {
        for b in &all {
            if a != b {
                out.push((*a, *b));
            }
        }
    }
    out
}

/// Every admissible graph of order `n`, up to [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate(n: usize) -> Result<Vec<AdmissibleGraph>> {
    enumerate_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_capped(n: usize, cap: usize) -> Result<Vec<AdmissibleGraph>> {
    if n > cap {
        return Err(Error::EnumerationCap { order: n, cap });
    }
    let per: Vec<Vec<(Target, Target)>> = (1..=n).map(|k| choices(n, k)).collect();
    let total = count(n) as usize;
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    loop {
        out.push(AdmissibleGraph {
            targets: digits.iter().enumerate().map(|(k, &d)| per[k][d]).collect(),
        });
        // odometer, last vertex fastest
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < per[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use Target::*;

    fn g(s: &str) -> AdmissibleGraph {
        AdmissibleGraph::decode(s).unwrap()
    }

    #[test]
    fn counts_and_order() {
        for n in 0..=3 {
            let all = enumerate(n).unwrap();
            assert_eq!(all.len() as u128, count(n));
            assert!(all.windows(2).all(|w| w[0] < w[1]), "sorted and distinct at n = {n}");
            assert!(all.iter().all(validate));
        }
        assert_eq!(enumerate(0).unwrap()[0].encode(), "0");
        let one: Vec<String> = enumerate(1).unwrap().iter().map(|g| g.encode()).collect();
        assert_eq!(one, ["1; L R", "1; R L"]);
        assert_eq!(enumerate(2).unwrap().len(), 36);
        assert_eq!(
            enumerate(5),
            Err(Error::EnumerationCap { order: 5, cap: 4 })
        );
    }

    #[test]
    fn order_four_count() {
        assert_eq!(enumerate(4).unwrap().len(), 160_000);
    }

    #[test]
    fn validation() {
        let bad = AdmissibleGraph::from_targets_unchecked(vec![(L, L)]);
        assert!(!validate(&bad));
        let looped = AdmissibleGraph::from_targets_unchecked(vec![(Vertex(1), L)]);
        assert!(!validate(&looped));
        let far = AdmissibleGraph::from_targets_unchecked(vec![(Vertex(2), L)]);
        assert!(!validate(&far));
        let wheel = AdmissibleGraph::from_targets_unchecked(vec![(Vertex(2), L), (Vertex(1), R)]);
        assert!(validate(&wheel));
        // mutual edges are admissible
        assert!(validate(&g("2; 2 L; 1 L")));
    }

    #[test]
    fn swapping() {
        assert_eq!(swap_edges(&g("1; L R"), 1).unwrap(), g("1; R L"));
        assert_eq!(swap_edges(&g("2; L R; L R"), 2).unwrap(), g("2; L R; R L"));
        let h = g("3; L 2; 1 L; 2 R");
        assert_eq!(swap_edges(&swap_edges(&h, 2).unwrap(), 2).unwrap(), h);
        assert!(matches!(swap_edges(&h, 4), Err(Error::VertexOutOfRange { .. })));
        let all: BTreeSet<_> = enumerate(2).unwrap().into_iter().collect();
        for x in &all {
            assert!(all.contains(&swap_edges(x, 1).unwrap()));
        }
    }

    #[test]
    fn text_round_trip() {
        for n in 0..=3 {
            for x in enumerate(n).unwrap() {
                assert_eq!(AdmissibleGraph::decode(&x.encode()).unwrap(), x);
            }
        }
        assert!(validate(&g("2; 2 L; 1 R")));
        assert!(matches!(AdmissibleGraph::decode("1; L L"), Err(Error::InvalidGraph(_))));
        match AdmissibleGraph::decode("2; L R; L Q") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 10),
            other => panic!("{other:?}"),
        }
        assert!(AdmissibleGraph::decode("2; L R").is_err());
        assert!(AdmissibleGraph::decode("x").is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = g("2; 2 L; 1 R");
        let v = h.to_json();
        assert_eq!(v.to_string(), r#"[[2,"L"],[1,"R"]]"#);
        assert_eq!(AdmissibleGraph::from_json(&v).unwrap(), h);
        assert!(AdmissibleGraph::from_json(&serde_json::json!([["L", "L"]])).is_err());
        assert!(AdmissibleGraph::from_json(&serde_json::json!([[0, "L"]])).is_err());
        assert_eq!(g("0").to_json().to_string(), "[]");
    }

    #[test]
    fn hand_built_graphs_appear_once() {
        let all = enumerate(2).unwrap();
        let ts = [Vertex(1), Vertex(2), L, R];
        for a in ts {
            for b in ts {
                for c in ts {
                    for d in ts {
                        let h = AdmissibleGraph::from_targets_unchecked(vec![(a, b), (c, d)]);
                        let hits = all.iter().filter(|x| **x == h).count();
                        assert_eq!(hits, usize::from(validate(&h)));
                    }
                }
            }
        }
    }

    #[test]
    fn mirror_and_relabel() {
        let h = g("2; 2 L; 1 R");
        assert_eq!(h.mirror(), g("2; 2 R; 1 L"));
        assert_eq!(h.relabel(&[1, 0]).unwrap(), g("2; 2 R; 1 L"));
        let k = g("3; L 2; 1 L; 2 R");
        assert_eq!(k.relabel(&[0, 1, 2]).unwrap(), k);
        assert!(validate(&k.relabel(&[2, 0, 1]).unwrap()));
        assert!(k.relabel(&[0, 0, 1]).is_err());
    }
}
