//! Power-commutator presentations and collection from the left.

use serde::{Deserialize, Serialize};
use std::fmt;
use smallvec::SmallVec;
use std::sync::OnceLock;

use crate::error::{Error, Result};

struct Frame<'a> {
    w: &'a [(usize, u32)],
    pos: usize,
    reps: u32,
}

type Stack<'a> = SmallVec<[Frame<'a>; 32]>;

/// Default cap on generator-processing steps during one collection.
pub const DEFAULT_GUARD: u64 = 50_000_000;

/// A normal word: strictly increasing 0-based generator indices with exponents in `1..p`.
pub type Word = Vec<(usize, u32)>;

/// Normal form of a group element: one exponent in `0..p` per generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element(pub Vec<u32>);

impl Element {
    pub fn identity(n: usize) -> Self {
        Element(vec![0; n])
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// 0-based index of the first nonzero exponent.
    pub fn depth(&self) -> Option<usize> {
        self.0.iter().position(|&e| e != 0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_word(&self) -> Word {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| (i, e))
            .collect()
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.to_word();
        if w.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = w
            .iter()
            .map(|&(g, e)| if e == 1 { format!("a{}", g + 1) } else { format!("a{}^{}", g + 1, e) })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// How a generator of weight at least 2 arises from earlier generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definition {
    /// `a_j^p`
    Power(usize),
    /// `[a_j, a_i]` with `j > i`
    Commutator(usize, usize),
}

/// Consistent power-commutator presentation of a finite p-group.
#[derive(Clone)]
pub struct PcPresentation {
    p: u32,
    n: usize,
    power: Vec<Word>,
    comm: Vec<Vec<Word>>,
    weights: Option<Vec<u32>>,
    definitions: Option<Vec<Option<Definition>>>,
    guard: u64,
    conj: Vec<Vec<Word>>,
    central: Vec<bool>,
    single: Vec<Vec<Word>>,
    inverses: OnceLock<Vec<Element>>,
}

impl fmt::Debug for PcPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PcPresentation(p={}, n={}", self.p, self.n)?;
        for j in 0..self.n {
            if !self.power[j].is_empty() {
                write!(f, ", a{}^{}={}", j + 1, self.p, fmt_word(&self.power[j]))?;
            }
        }
        for j in 0..self.n {
            for i in 0..j {
                if !self.comm[j][i].is_empty() {
                    write!(f, ", [a{},a{}]={}", j + 1, i + 1, fmt_word(&self.comm[j][i]))?;
                }
            }
        }
        write!(f, ")")
    }
}

pub fn fmt_word(w: &[(usize, u32)]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter()
        .map(|&(g, e)| if e == 1 { format!("a{}", g + 1) } else { format!("a{}^{}", g + 1, e) })
        .collect::<Vec<_>>()
        .join("*")
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

fn normalize_word(w: &[(usize, u32)], p: u32) -> Word {
    w.iter().filter(|&&(_, e)| e % p != 0).map(|&(g, e)| (g, e % p)).collect()
}

impl PcPresentation {
    /// Builds a presentation from 0-based relation words. `comm[j][i]` must exist for `i < j`.
    pub fn new(p: u32, power: Vec<Word>, comm: Vec<Vec<Word>>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Malformed(format!("{p} is not prime")));
        }
        let n = power.len();
        if comm.len() != n {
            return Err(Error::Malformed("commutator table has wrong size".into()));
        }
        let power: Vec<Word> = power.iter().map(|w| normalize_word(w, p)).collect();
        let mut ctab = Vec::with_capacity(n);
        for (j, row) in comm.iter().enumerate() {
            if row.len() < j {
                return Err(Error::Malformed(format!("commutator row {} too short", j + 1)));
            }
            ctab.push(row[..j].iter().map(|w| normalize_word(w, p)).collect::<Vec<_>>());
        }
        for j in 0..n {
            check_word(&power[j], j, n, "power")?;
            for i in 0..j {
                check_word(&ctab[j][i], j, n, "commutator")?;
            }
        }
        Ok(Self::assemble(p, power, ctab, None, None))
    }

    /// Elementary abelian group of rank `n`, all generators of weight 1.
    pub fn elementary_abelian(p: u32, n: usize) -> Result<Self> {
        let pres = Self::new(p, vec![vec![]; n], (0..n).map(|j| vec![vec![]; j]).collect())?;
        Ok(pres.with_weights(vec![1; n], vec![None; n]))
    }

    /// Abelian group with the given cyclic factor exponents (e.g. `[2,1]` is `C_{p^2} x C_p`).
    pub fn abelian(p: u32, exps: &[u32]) -> Result<Self> {
        let n: u32 = exps.iter().sum();
        let n = n as usize;
        let mut power = vec![vec![]; n];
        let mut idx = 0;
        for &e in exps {
            for k in 0..e as usize {
                if k + 1 < e as usize {
                    power[idx + k] = vec![(idx + k + 1, 1)];
                }
            }
            idx += e as usize;
        }
        Self::new(p, power, (0..n).map(|j| vec![vec![]; j]).collect())
    }

    fn assemble(
        p: u32,
        power: Vec<Word>,
        comm: Vec<Vec<Word>>,
        weights: Option<Vec<u32>>,
        definitions: Option<Vec<Option<Definition>>>,
    ) -> Self {
        let n = power.len();
        let mut conj = Vec::with_capacity(n);
        for j in 0..n {
            let mut row = Vec::with_capacity(j);
            for i in 0..j {
                let mut w = vec![(j, 1)];
                w.extend_from_slice(&comm[j][i]);
                row.push(w);
            }
            conj.push(row);
        }
        let central = (0..n).map(|g| (g + 1..n).all(|h| comm[h][g].is_empty())).collect();
        let single = (0..n).map(|g| (0..p).map(|e| vec![(g, e)]).collect()).collect();
        PcPresentation {
            p,
            n,
            power,
            comm,
            weights,
            definitions,
            guard: DEFAULT_GUARD,
            conj,
            central,
            single,
            inverses: OnceLock::new(),
        }
    }

    /// Attaches exponent-p central weights and definitions (trusted, see `verify_weights`).
    pub fn with_weights(mut self, weights: Vec<u32>, definitions: Vec<Option<Definition>>) -> Self {
        assert_eq!(weights.len(), self.n);
        assert_eq!(definitions.len(), self.n);
        self.weights = Some(weights);
        self.definitions = Some(definitions);
        self
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self.definitions = None;
        self
    }

    pub fn with_guard(mut self, guard: u64) -> Self {
        self.guard = guard;
        self
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn ngens(&self) -> usize {
        self.n
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    pub fn power_rhs(&self, j: usize) -> &Word {
        &self.power[j]
    }

    /// Right-hand side of `[a_j, a_i]` for `j > i` (0-based).
    pub fn comm_rhs(&self, j: usize, i: usize) -> &Word {
        &self.comm[j][i]
    }

    pub fn weights(&self) -> Option<&[u32]> {
        self.weights.as_deref()
    }

    pub fn definitions(&self) -> Option<&[Option<Definition>]> {
        self.definitions.as_deref()
    }

    pub fn is_standard(&self) -> bool {
        self.weights.is_some() && self.definitions.is_some()
    }

    /// Largest weight, i.e. the exponent-p class.
    pub fn p_class(&self) -> Option<u32> {
        self.weights.as_ref().map(|w| w.iter().copied().max().unwrap_or(0))
    }

    /// Number of generators of weight 1.
    pub fn rank(&self) -> Option<usize> {
        self.weights.as_ref().map(|w| w.iter().filter(|&&x| x == 1).count())
    }

    pub fn identity(&self) -> Element {
        Element::identity(self.n)
    }

    pub fn gen(&self, g: usize) -> Element {
        let mut v = vec![0; self.n];
        v[g] = 1;
        Element(v)
    }

    pub fn element_from_word(&self, w: &[(usize, u32)]) -> Element {
        let mut v = vec![0; self.n];
        for &(g, e) in w {
            v[g] = e % self.p;
        }
        Element(v)
    }

    /// Presentation of the quotient by the normal subgroup generated by all generators
    /// of index `>= m` (valid when that tail is normal, e.g. for weight prefixes).
    pub fn truncate(&self, m: usize) -> PcPresentation {
        let cut = |w: &Word| -> Word { w.iter().copied().filter(|&(g, _)| g < m).collect() };
        let power = (0..m).map(|j| cut(&self.power[j])).collect();
        let comm = (0..m).map(|j| (0..j).map(|i| cut(&self.comm[j][i])).collect()).collect();
        let weights = self.weights.as_ref().map(|w| w[..m].to_vec());
        let defs = self.definitions.as_ref().map(|d| d[..m].to_vec());
        let mut out = Self::assemble(self.p, power, comm, weights, defs);
        out.guard = self.guard;
        out
    }

    // ----- collection -------------------------------------------------------

    /// Multiplies `v` on the right by the word `w` (collection from the left).
    pub fn mul_word_into(&self, v: &mut [u32], w: &[(usize, u32)]) -> Result<()> {
        let mut stack: Stack = SmallVec::new();
        stack.push(Frame { w, pos: 0, reps: 1 });
        self.run_collector(v, &mut stack)
    }

    /// Multiplies `v` on the right by the element with normal-form exponents `y`.
    pub fn mul_exps_into(&self, v: &mut [u32], y: &[u32]) -> Result<()> {
        let mut stack: Stack = SmallVec::new();
        for (g, &e) in y.iter().enumerate().rev() {
            if e != 0 {
                stack.push(Frame { w: &self.single[g][e as usize], pos: 0, reps: 1 });
            }
        }
        if stack.is_empty() {
            return Ok(());
        }
        self.run_collector(v, &mut stack)
    }

    fn run_collector<'a>(&'a self, v: &mut [u32], stack: &mut Stack<'a>) -> Result<()> {
        let p = self.p;
        let n = self.n;
        let mut steps: u64 = 0;
        let mut hi = v.iter().rposition(|&e| e != 0).map_or(0, |i| i + 1);
        while let Some(top) = stack.last_mut() {
            if top.pos == top.w.len() {
                top.reps -= 1;
                if top.reps == 0 {
                    stack.pop();
                } else {
                    top.pos = 0;
                }
                continue;
            }
            let (g, e) = top.w[top.pos];
            top.pos += 1;
            if e == 0 {
                continue;
            }
            steps += 1;
            if steps > self.guard {
                return Err(Error::CollectionDiverged(self.guard));
            }
            while hi > g + 1 && v[hi - 1] == 0 {
                hi -= 1;
            }
            if hi <= g + 1 || self.central[g] {
                let s = v[g] + e;
                if s < p {
                    v[g] = s;
                    if s != 0 && hi < g + 1 {
                        hi = g + 1;
                    }
                    continue;
                }
                if hi <= g + 1 || self.power[g].is_empty() {
                    v[g] = s - p;
                    if !self.power[g].is_empty() {
                        stack.push(Frame { w: &self.power[g], pos: 0, reps: 1 });
                    }
                    if v[g] != 0 && hi < g + 1 {
                        hi = g + 1;
                    }
                    continue;
                }
            }
            // General step: v = P a_g^x T with T over generators > g; T is conjugated past a_g.
            if e > 1 {
                stack.push(Frame { w: &self.single[g][(e - 1) as usize], pos: 0, reps: 1 });
            }
            for h in (g + 1..hi.min(n)).rev() {
                if v[h] != 0 {
                    stack.push(Frame { w: &self.conj[h][g], pos: 0, reps: v[h] });
                    v[h] = 0;
                }
            }
            v[g] += 1;
            hi = g + 1;
            if v[g] == p {
                v[g] = 0;
                if !self.power[g].is_empty() {
                    stack.push(Frame { w: &self.power[g], pos: 0, reps: 1 });
                }
            }
        }
        Ok(())
    }

    /// Normal form of a word with arbitrary integer exponents (1-based indices).
    pub fn collect(&self, word: &[(usize, i64)]) -> Result<Element> {
        let mut acc = self.identity();
        for &(g, e) in word {
            if g == 0 || g > self.n {
                return Err(Error::GeneratorOutOfRange { index: g, ngens: self.n });
            }
            let x = self.pow_i(&self.gen(g - 1), e)?;
            acc = self.mul(&acc, &x)?;
        }
        Ok(acc)
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Result<Element> {
        let mut v = x.0.clone();
        self.mul_exps_into(&mut v, &y.0)?;
        Ok(Element(v))
    }

    /// Product of a sequence of elements.
    pub fn product(&self, xs: &[&Element]) -> Result<Element> {
        let mut v = vec![0; self.n];
        for x in xs {
            self.mul_exps_into(&mut v, &x.0)?;
        }
        Ok(Element(v))
    }

    fn gen_inverses(&self) -> Result<&Vec<Element>> {
        if let Some(v) = self.inverses.get() {
            return Ok(v);
        }
        let mut invs = Vec::with_capacity(self.n);
        for g in 0..self.n {
            invs.push(self.inverse_slow(&self.gen(g))?);
        }
        let _ = self.inverses.set(invs);
        Ok(self.inverses.get().expect("just set"))
    }

    fn inverse_slow(&self, x: &Element) -> Result<Element> {
        let p = self.p;
        let mut w = x.0.clone();
        let mut r = vec![0u32; self.n];
        for g in 0..self.n {
            if w[g] != 0 {
                let k = p - w[g];
                let piece = [(g, k)];
                self.mul_word_into(&mut w, &piece)?;
                self.mul_word_into(&mut r, &piece)?;
            }
        }
        Ok(Element(r))
    }

    pub fn inverse(&self, x: &Element) -> Result<Element> {
        // x = a_1^{e_1} ... a_n^{e_n}, so x^-1 = a_n^{-e_n} ... a_1^{-e_1}.
        let invs = self.gen_inverses()?;
        let mut v = vec![0u32; self.n];
        for g in (0..self.n).rev() {
            let e = x.0[g];
            if e == 0 {
                continue;
            }
            for _ in 0..e {
                self.mul_exps_into(&mut v, &invs[g].0)?;
            }
        }
        Ok(Element(v))
    }

    pub fn pow(&self, x: &Element, mut e: u64) -> Result<Element> {
        let mut acc = x.0.clone();
        if e <= 2 * self.p as u64 {
            if e == 0 {
                return Ok(self.identity());
            }
            for _ in 1..e {
                self.mul_exps_into(&mut acc, &x.0)?;
            }
            return Ok(Element(acc));
        }
        let mut base = acc.clone();
        acc.iter_mut().for_each(|a| *a = 0);
        let mut tmp = base.clone();
        while e > 0 {
            if e & 1 == 1 {
                self.mul_exps_into(&mut acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                tmp.copy_from_slice(&base);
                self.mul_exps_into(&mut base, &tmp)?;
            }
        }
        Ok(Element(acc))
    }

    pub fn pow_i(&self, x: &Element, e: i64) -> Result<Element> {
        if e >= 0 {
            self.pow(x, e as u64)
        } else {
            let inv = self.inverse(x)?;
            self.pow(&inv, e.unsigned_abs())
        }
    }

    /// `[x, y] = x^-1 y^-1 x y`
    pub fn comm(&self, x: &Element, y: &Element) -> Result<Element> {
        let yx = self.mul(y, x)?;
        let mut v = self.inverse(&yx)?.0;
        self.mul_exps_into(&mut v, &x.0)?;
        self.mul_exps_into(&mut v, &y.0)?;
        Ok(Element(v))
    }

    /// `y^-1 x y`
    pub fn conjugate(&self, x: &Element, y: &Element) -> Result<Element> {
        let xy = self.mul(x, y)?;
        let yi = self.inverse(y)?;
        self.mul(&yi, &xy)
    }

    /// Multiplicative order of `x` (a power of p).
    pub fn order(&self, x: &Element) -> Result<u64> {
        let mut o = 1u64;
        let mut y = x.clone();
        while !y.is_identity() {
            y = self.pow(&y, self.p as u64)?;
            o *= self.p as u64;
        }
        Ok(o)
    }

    /// Iterates all group elements in lexicographic exponent order (only for small groups).
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let n = self.n;
        let p = self.p;
        let total = (p as u64).pow(n as u32);
        (0..total).map(move |mut k| {
            let mut v = vec![0u32; n];
            for i in (0..n).rev() {
                v[i] = (k % p as u64) as u32;
                k /= p as u64;
            }
            Element(v)
        })
    }

    // ----- consistency -------------------------------------------------------

    /// Pairs of normal forms produced by the standard overlap tests; equal pairs mean consistent.
    pub fn overlap_results(&self) -> Result<Vec<(Element, Element)>> {
        self.overlap_results_upto(self.n)
    }

    /// Overlap tests among the first `m` generators only (the rest are assumed central with
    /// trivial relations, so tests involving them hold automatically).
    pub fn overlap_results_upto(&self, m: usize) -> Result<Vec<(Element, Element)>> {
        let n = m;
        let p = self.p;
        let mut out = Vec::new();
        let g = |i: usize| self.gen(i);
        let pw = |i: usize| -> Element { self.element_from_word(&self.power[i]) };
        // (a_k a_j) a_i = a_k (a_j a_i), k > j > i
        for k in 0..n {
            for j in 0..k {
                for i in 0..j {
                    let mut l = g(k).0;
                    self.mul_word_into(&mut l, &[(j, 1)])?;
                    self.mul_word_into(&mut l, &[(i, 1)])?;
                    let mut ji = g(j).0;
                    self.mul_word_into(&mut ji, &[(i, 1)])?;
                    let mut r = g(k).0;
                    self.mul_word_into(&mut r, &Element(ji).to_word())?;
                    out.push((Element(l), Element(r)));
                }
            }
        }
        for j in 0..n {
            for i in 0..j {
                // (a_j^{p-1} a_j) a_i = a_j^{p-1} (a_j a_i)
                let mut l = pw(j).0;
                self.mul_word_into(&mut l, &[(i, 1)])?;
                let mut ji = g(j).0;
                self.mul_word_into(&mut ji, &[(i, 1)])?;
                let mut r = vec![0; self.n];
                r[j] = p - 1;
                self.mul_word_into(&mut r, &Element(ji).to_word())?;
                out.push((Element(l), Element(r)));
                // (a_j a_i^{p-1}) a_i = a_j (a_i^{p-1} a_i)
                let mut l = g(j).0;
                self.mul_word_into(&mut l, &[(i, p - 1)])?;
                self.mul_word_into(&mut l, &[(i, 1)])?;
                let mut r = g(j).0;
                self.mul_word_into(&mut r, &self.power[i])?;
                out.push((Element(l), Element(r)));
            }
        }
        for i in 0..n {
            // (a_i a_i^{p-1}) a_i = a_i (a_i^{p-1} a_i)
            let mut l = pw(i).0;
            self.mul_word_into(&mut l, &[(i, 1)])?;
            let mut r = g(i).0;
            self.mul_word_into(&mut r, &self.power[i])?;
            out.push((Element(l), Element(r)));
        }
        Ok(out)
    }

    /// True iff every overlap test collects to equal normal forms.
    pub fn consistency_check(&self) -> bool {
        match self.overlap_results() {
            Ok(pairs) => pairs.iter().all(|(a, b)| a == b),
            Err(_) => false,
        }
    }

    pub fn order_exponent(&self) -> usize {
        self.n
    }

    pub fn is_abelian(&self) -> bool {
        self.comm.iter().all(|row| row.iter().all(|w| w.is_empty()))
    }
}

fn check_word(w: &Word, j: usize, n: usize, what: &str) -> Result<()> {
    let mut last = j;
    for &(g, _) in w {
        if g >= n {
            return Err(Error::GeneratorOutOfRange { index: g + 1, ngens: n });
        }
        if g <= last {
            return Err(Error::Malformed(format!(
                "{what} relation for a{} references a{} (must be increasing and beyond a{})",
                j + 1,
                g + 1,
                j + 1
            )));
        }
        last = g;
    }
    Ok(())
}

// ----- JSON interchange -------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WirePower {
    gen: usize,
    rhs: Vec<(usize, u32)>,
}

#[derive(Serialize, Deserialize)]
struct WireComm {
    gens: (usize, usize),
    rhs: Vec<(usize, u32)>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum WireDef {
    Power(usize),
    Commutator(usize, usize),
}

#[derive(Serialize, Deserialize)]
struct WirePres {
    prime: u32,
    ngens: usize,
    #[serde(default)]
    powers: Vec<WirePower>,
    #[serde(default)]
    commutators: Vec<WireComm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    definitions: Option<Vec<Option<WireDef>>>,
}

fn to_one_based(w: &Word) -> Vec<(usize, u32)> {
    w.iter().map(|&(g, e)| (g + 1, e)).collect()
}

fn from_one_based(w: &[(usize, u32)], n: usize) -> Result<Word> {
    w.iter()
        .map(|&(g, e)| {
            if g == 0 || g > n {
                Err(Error::GeneratorOutOfRange { index: g, ngens: n })
            } else {
                Ok((g - 1, e))
            }
        })
        .collect()
}

impl Serialize for PcPresentation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let powers = (0..self.n)
            .filter(|&j| !self.power[j].is_empty())
            .map(|j| WirePower { gen: j + 1, rhs: to_one_based(&self.power[j]) })
            .collect();
        let mut commutators = Vec::new();
        for j in 0..self.n {
            for i in 0..j {
                if !self.comm[j][i].is_empty() {
                    commutators.push(WireComm { gens: (j + 1, i + 1), rhs: to_one_based(&self.comm[j][i]) });
                }
            }
        }
        let definitions = self.definitions.as_ref().map(|ds| {
            ds.iter()
                .map(|d| {
                    d.map(|d| match d {
                        Definition::Power(j) => WireDef::Power(j + 1),
                        Definition::Commutator(j, i) => WireDef::Commutator(j + 1, i + 1),
                    })
                })
                .collect()
        });
        WirePres { prime: self.p, ngens: self.n, powers, commutators, weights: self.weights.clone(), definitions }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PcPresentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = WirePres::deserialize(d)?;
        PcPresentation::from_wire(w).map_err(serde::de::Error::custom)
    }
}

impl PcPresentation {
    fn from_wire(w: WirePres) -> Result<Self> {
        let n = w.ngens;
        let mut power = vec![vec![]; n];
        for pw in &w.powers {
            if pw.gen == 0 || pw.gen > n {
                return Err(Error::GeneratorOutOfRange { index: pw.gen, ngens: n });
            }
            power[pw.gen - 1] = from_one_based(&pw.rhs, n)?;
        }
        let mut comm: Vec<Vec<Word>> = (0..n).map(|j| vec![vec![]; j]).collect();
        for c in &w.commutators {
            let (j, i) = c.gens;
            if j == 0 || j > n || i == 0 || i > n {
                return Err(Error::GeneratorOutOfRange { index: j.max(i), ngens: n });
            }
            if j <= i {
                return Err(Error::Malformed(format!("commutator [a{j},a{i}] must have first index larger")));
            }
            comm[j - 1][i - 1] = from_one_based(&c.rhs, n)?;
        }
        let pres = PcPresentation::new(w.prime, power, comm)?;
        match (w.weights, w.definitions) {
            (Some(ws), Some(ds)) => {
                if ws.len() != n || ds.len() != n {
                    return Err(Error::Malformed("weights/definitions have wrong length".into()));
                }
                let mut defs = Vec::with_capacity(n);
                for d in ds {
                    defs.push(match d {
                        None => None,
                        Some(WireDef::Power(j)) if j >= 1 && j <= n => Some(Definition::Power(j - 1)),
                        Some(WireDef::Commutator(j, i)) if j > i && i >= 1 && j <= n => {
                            Some(Definition::Commutator(j - 1, i - 1))
                        }
                        _ => return Err(Error::Malformed("bad definition entry".into())),
                    });
                }
                let pres = pres.with_weights(ws, defs);
                pres.verify_weights()?;
                Ok(pres)
            }
            (None, None) => Ok(pres),
            _ => Err(Error::Malformed("weights and definitions must be given together".into())),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("presentation serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: WirePres = serde_json::from_str(s)?;
        Self::from_wire(w)
    }

    /// Checks that weights are sorted, that every weight >= 2 generator is the last factor
    /// of its defining relation, and that the weight-1 generators are a minimal generating set.
    pub fn verify_weights(&self) -> Result<()> {
        let (ws, ds) = match (&self.weights, &self.definitions) {
            (Some(w), Some(d)) => (w, d),
            _ => return Err(Error::NotStandard),
        };
        for k in 1..self.n {
            if ws[k] < ws[k - 1] {
                return Err(Error::Malformed("weights must be non-decreasing".into()));
            }
        }
        for k in 0..self.n {
            match (ws[k], ds[k]) {
                (1, None) => {}
                (1, Some(_)) => return Err(Error::Malformed(format!("weight-1 generator a{} has a definition", k + 1))),
                (_, None) => return Err(Error::Malformed(format!("generator a{} lacks a definition", k + 1))),
                (w, Some(def)) => {
                    let (rhs, ok_weight) = match def {
                        Definition::Power(j) => (&self.power[j], ws[j] + 1 == w),
                        Definition::Commutator(j, i) => (&self.comm[j][i], ws[j] + 1 == w && ws[i] == 1),
                    };
                    if !ok_weight || rhs.last() != Some(&(k, 1)) {
                        return Err(Error::Malformed(format!("definition of a{} is not valid", k + 1)));
                    }
                }
            }
        }
        for j in 0..self.n {
            for &(g, _) in &self.power[j] {
                if ws[g] <= ws[j] {
                    return Err(Error::Malformed("power relation does not raise weight".into()));
                }
            }
            for i in 0..j {
                for &(g, _) in &self.comm[j][i] {
                    if ws[g] <= ws[j] {
                        return Err(Error::Malformed("commutator relation does not raise weight".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

impl PartialEq for PcPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.n == other.n
            && self.power == other.power
            && self.comm == other.comm
            && self.weights == other.weights
            && self.definitions == other.definitions
    }
}
