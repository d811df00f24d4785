//! Logarithmic abelian types, their multisets and abelianization coordinates.

use serde::{Deserialize, Serialize};
use std::fmt;

use super::presentation::{Element, PcPresentation};
use super::subgroup::Subgroup;
use crate::error::{Error, Result};
use crate::snf::Diagonalization;

/// Logarithmic type of a finite abelian p-group, non-increasing (`[2,1]` is `p^2 x p`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianType(pub Vec<u32>);

impl AbelianType {
    pub fn new(mut exps: Vec<u32>) -> Self {
        exps.retain(|&e| e > 0);
        exps.sort_unstable_by(|a, b| b.cmp(a));
        AbelianType(exps)
    }

    pub fn trivial() -> Self {
        AbelianType(vec![])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn order_exponent(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_elementary(&self) -> bool {
        self.0.iter().all(|&e| e == 1)
    }

    /// Caret-free digit string, e.g. `"211"`; the trivial group is `"0"`.
    pub fn digits(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        self.0.iter().map(|e| part(*e)).collect()
    }

    /// Formal-exponent form, e.g. `"21^2"`, `"1^3"`, `"2^2"`.
    pub fn formal(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < self.0.len() {
            let mut j = i;
            while j < self.0.len() && self.0[j] == self.0[i] {
                j += 1;
            }
            out.push_str(&part(self.0[i]));
            if j - i > 1 {
                out.push_str(&format!("^{}", j - i));
            }
            i = j;
        }
        out
    }

    /// Accepts digit strings (`"211"`), formal strings (`"21^2"`) and `"0"`/`""` for trivial.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "0" || s == "1^0" {
            return Ok(AbelianType::trivial());
        }
        let chars: Vec<char> = s.chars().collect();
        let mut exps = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let e = if chars[i] == '(' {
                let close = chars[i..]
                    .iter()
                    .position(|&c| c == ')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced type {s}")))?;
                let inner: String = chars[i + 1..i + close].iter().collect();
                i += close + 1;
                inner.parse::<u32>().map_err(|_| Error::Parse(format!("bad part in {s}")))?
            } else {
                let d = chars[i].to_digit(10).ok_or_else(|| Error::Parse(format!("bad type {s}")))?;
                i += 1;
                d
            };
            let mut count = 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let c: String = chars[start..i].iter().collect();
                count = c.parse::<usize>().map_err(|_| Error::Parse(format!("bad exponent in {s}")))?;
            }
            for _ in 0..count {
                exps.push(e);
            }
        }
        if exps.contains(&0) {
            return Err(Error::Parse(format!("zero part in {s}")));
        }
        let mut sorted = exps.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        if sorted != exps {
            return Err(Error::Parse(format!("type {s} is not non-increasing")));
        }
        Ok(AbelianType(exps))
    }

    fn display_key(&self) -> (u32, usize, Vec<u32>) {
        (self.order_exponent(), self.0.len(), self.0.clone())
    }
}

fn part(e: u32) -> String {
    if e < 10 {
        e.to_string()
    } else {
        format!("({e})")
    }
}

impl fmt::Display for AbelianType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formal())
    }
}

impl PartialOrd for AbelianType {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Display order: larger order first, then more factors, then lexicographically larger.
impl Ord for AbelianType {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other.display_key().cmp(&self.display_key())
    }
}

/// Accumulated multiset of abelian types (order-insensitive).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TypeMultiset(Vec<AbelianType>);

impl TypeMultiset {
    pub fn new(mut v: Vec<AbelianType>) -> Self {
        v.sort();
        TypeMultiset(v)
    }

    pub fn items(&self) -> &[AbelianType] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Grouped pairs `(type, multiplicity)` in display order.
    pub fn grouped(&self) -> Vec<(AbelianType, usize)> {
        let mut out: Vec<(AbelianType, usize)> = Vec::new();
        for t in &self.0 {
            match out.last_mut() {
                Some((u, c)) if u == t => *c += 1,
                _ => out.push((t.clone(), 1)),
            }
        }
        out
    }

    /// Formal rendering such as `(21^2,(1^3)^3,(1^2)^9)`.
    pub fn formal(&self) -> String {
        let parts: Vec<String> = self
            .grouped()
            .into_iter()
            .map(|(t, c)| if c == 1 { t.formal() } else { format!("({})^{}", t.formal(), c) })
            .collect();
        format!("({})", parts.join(","))
    }

    pub fn parse_list(items: &[String]) -> Result<Self> {
        Ok(TypeMultiset::new(items.iter().map(|s| AbelianType::parse(s)).collect::<Result<Vec<_>>>()?))
    }
}

impl fmt::Display for TypeMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formal())
    }
}

/// Abelianization of a presented group with coordinates for elements.
#[derive(Clone, Debug)]
pub struct Abelianization {
    ty: AbelianType,
    diag: Diagonalization,
}

impl Abelianization {
    pub fn of(pres: &PcPresentation) -> Result<Self> {
        let n = pres.ngens();
        let p = pres.prime() as i64;
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for j in 0..n {
            let mut r = vec![0i64; n];
            r[j] = p;
            for &(g, e) in pres.power_rhs(j) {
                r[g] -= e as i64;
            }
            rows.push(r);
            for i in 0..j {
                let w = pres.comm_rhs(j, i);
                if !w.is_empty() {
                    let mut r = vec![0i64; n];
                    for &(g, e) in w {
                        r[g] += e as i64;
                    }
                    rows.push(r);
                }
            }
        }
        let diag = Diagonalization::new(pres.prime(), &rows, n, n)?;
        let ty = AbelianType(diag.invariants());
        Ok(Abelianization { ty, diag })
    }

    pub fn abelian_type(&self) -> &AbelianType {
        &self.ty
    }

    /// Coordinates of an element's image, one per cyclic factor of `abelian_type()`.
    pub fn coordinates(&self, x: &Element) -> Vec<u64> {
        let v: Vec<i64> = x.0.iter().map(|&e| e as i64).collect();
        self.diag.coordinates(&v)
    }

    /// Adds two coordinate vectors in the abelian group.
    pub fn add(&self, p: u32, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .zip(&self.ty.0)
            .map(|((x, y), &e)| (x + y) % (p as u64).pow(e))
            .collect()
    }
}

/// Abelian invariants of `H / H'`.
pub fn abelian_invariants(pres: &PcPresentation, h: &Subgroup) -> Result<AbelianType> {
    if h.order_exponent() == pres.ngens() {
        return Ok(Abelianization::of(pres)?.ty);
    }
    let sub = h.presentation(pres)?;
    Ok(Abelianization::of(&sub)?.ty)
}
