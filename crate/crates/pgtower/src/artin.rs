//! Artin transfers, transfer kernels and targets, layered Artin patterns and IPADs.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg;
use crate::pcgroup::series::{derived_subgroup, layer_with_derived};
use crate::pcgroup::{AbelianType, Abelianization, Element, Factor, PcPresentation, Subgroup, TypeMultiset};

/// Transfer `G -> H/H'` for one subgroup `H` containing `G'`.
pub struct Transfer<'a> {
    pres: &'a PcPresentation,
    h: Subgroup,
    factor: Factor,
    h_pres: PcPresentation,
    ab: Abelianization,
    transversal: Vec<Element>,
    index: HashMap<Vec<u32>, usize>,
}

impl<'a> Transfer<'a> {
    pub fn new(pres: &'a PcPresentation, h: &Subgroup) -> Result<Self> {
        let d = derived_subgroup(pres)?;
        Self::with_derived(pres, h, &d)
    }

    pub fn with_derived(pres: &'a PcPresentation, h: &Subgroup, derived: &Subgroup) -> Result<Self> {
        if !derived.is_subgroup_of(pres, h)? {
            return Err(Error::NotAboveDerived);
        }
        let factor = Factor::new(&Subgroup::whole(pres), h);
        let transversal = linalg::all_vectors(factor.dim(), pres.prime())
            .iter()
            .map(|e| factor.element(pres, e))
            .collect::<Result<Vec<_>>>()?;
        let mut index = HashMap::new();
        for (i, t) in transversal.iter().enumerate() {
            index.insert(factor.coordinates(pres, t)?, i);
        }
        let h_pres = h.presentation(pres)?;
        let ab = Abelianization::of(&h_pres)?;
        Ok(Transfer { pres, h: h.clone(), factor, h_pres, ab, transversal, index })
    }

    /// Replaces the transversal by `t_i * u_i` for arbitrary `u_i` in `H` (for independence checks).
    pub fn with_shifted_transversal(mut self, shifts: &[Element]) -> Result<Self> {
        for (t, u) in self.transversal.iter_mut().zip(shifts) {
            *t = self.pres.mul(t, u)?;
        }
        Ok(self)
    }

    pub fn target_type(&self) -> &AbelianType {
        self.ab.abelian_type()
    }

    pub fn abelianization(&self) -> &Abelianization {
        &self.ab
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.h
    }

    /// Coordinates in `H/H'` of an element of H.
    pub fn h_coordinates(&self, x: &Element) -> Result<Vec<u64>> {
        let c = self.h.coordinates(self.pres, x)?.ok_or(Error::NotAboveDerived)?;
        Ok(self.ab.coordinates(&Element(c)))
    }

    /// Image of `g` in `H/H'`, via the coset-transversal product.
    pub fn apply(&self, g: &Element) -> Result<Vec<u64>> {
        let p = self.pres.prime();
        let mut acc = vec![0u64; self.ab.abelian_type().rank()];
        for t in &self.transversal {
            let tg = self.pres.mul(t, g)?;
            let k = self.factor.coordinates(self.pres, &tg)?;
            let t2 = &self.transversal[self.index[&k]];
            let h = self.pres.mul(&tg, &self.pres.inverse(t2)?)?;
            let c = self.h_coordinates(&h)?;
            acc = self.ab.add(p, &acc, &c);
        }
        Ok(acc)
    }

    pub fn h_presentation(&self) -> &PcPresentation {
        &self.h_pres
    }
}

/// Transfer image of `g` in `H/H'`.
pub fn transfer(pres: &PcPresentation, h: &Subgroup, g: &Element) -> Result<Vec<u64>> {
    Transfer::new(pres, h)?.apply(g)
}

/// Classified kernel of `G/G' -> H/H'`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Total,
    /// 1-based position in the first layer.
    Partial(usize),
    Trivial,
    General,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelDescriptor {
    pub kind: KernelKind,
    /// Preimage of the kernel in G (contains G').
    pub as_subgroup: Subgroup,
}

/// Kernel of the transfer to `H`, with `first_layer` used for naming partial kernels.
pub fn kernel_with(
    pres: &PcPresentation,
    tr: &Transfer,
    derived: &Subgroup,
    first_layer: &[Subgroup],
) -> Result<KernelDescriptor> {
    let p = pres.prime();
    let whole = Subgroup::whole(pres);
    let fab = Factor::new(&whole, derived);
    let images: Vec<Vec<u64>> = fab.reps.iter().map(|r| tr.apply(r)).collect::<Result<_>>()?;
    let mut seeds = Vec::new();
    for e in linalg::all_vectors(fab.dim(), p) {
        let mut acc = vec![0u64; tr.target_type().rank()];
        for (img, &k) in images.iter().zip(&e) {
            for _ in 0..k {
                acc = tr.abelianization().add(p, &acc, img);
            }
        }
        if acc.iter().all(|&x| x == 0) {
            seeds.push(fab.element(pres, &e)?);
        }
    }
    let k = Subgroup::extend(pres, derived, &seeds, None)?;
    let kind = if k.order_exponent() == pres.ngens() {
        KernelKind::Total
    } else if k == *derived {
        KernelKind::Trivial
    } else if fab.dim() == 2 && is_rank_two_elementary(pres, derived, &fab)? {
        match first_layer.iter().position(|l| *l == k) {
            Some(i) => KernelKind::Partial(i + 1),
            None => KernelKind::General,
        }
    } else {
        KernelKind::General
    };
    Ok(KernelDescriptor { kind, as_subgroup: k })
}

fn is_rank_two_elementary(pres: &PcPresentation, derived: &Subgroup, fab: &Factor) -> Result<bool> {
    for r in &fab.reps {
        if !derived.contains(pres, &pres.pow(r, pres.prime() as u64)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn kernel(pres: &PcPresentation, h: &Subgroup) -> Result<KernelDescriptor> {
    let d = derived_subgroup(pres)?;
    let tr = Transfer::with_derived(pres, h, &d)?;
    let first = layer_with_derived(pres, &d, 1.min(pres.ngens() - d.order_exponent()))?;
    kernel_with(pres, &tr, &d, &first)
}

/// One symbol of a layer-1 transfer kernel type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TktSymbol {
    Total,
    Partial(usize),
    Trivial,
    General,
}

impl TktSymbol {
    fn from_kind(k: &KernelKind) -> Self {
        match k {
            KernelKind::Total => TktSymbol::Total,
            KernelKind::Partial(i) => TktSymbol::Partial(*i),
            KernelKind::Trivial => TktSymbol::Trivial,
            KernelKind::General => TktSymbol::General,
        }
    }

    fn render(&self) -> String {
        match self {
            TktSymbol::Total => "0".into(),
            TktSymbol::Partial(i) if *i < 10 => i.to_string(),
            TktSymbol::Partial(i) => format!("[{i}]"),
            TktSymbol::Trivial => "x".into(),
            TktSymbol::General => "*".into(),
        }
    }
}

/// Layer-1 transfer kernel type, e.g. `(0122)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Tkt(pub Vec<TktSymbol>);

impl Tkt {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut out = Vec::new();
        let chars: Vec<char> = t.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let sym = match c {
                '0' => TktSymbol::Total,
                '1'..='9' => TktSymbol::Partial(c.to_digit(10).expect("digit") as usize),
                'x' => TktSymbol::Trivial,
                '*' => TktSymbol::General,
                '[' => {
                    let close = chars[i..].iter().position(|&c| c == ']').ok_or_else(|| Error::Parse(s.into()))?;
                    let num: String = chars[i + 1..i + close].iter().collect();
                    i += close;
                    TktSymbol::Partial(num.parse().map_err(|_| Error::Parse(s.into()))?)
                }
                _ => return Err(Error::Parse(format!("bad TKT symbol {c:?} in {s}"))),
            };
            out.push(sym);
            i += 1;
        }
        let m = out.len();
        if out.iter().any(|s| matches!(s, TktSymbol::Partial(i) if *i > m)) {
            return Err(Error::Parse(format!("TKT {s} names a subgroup beyond {m}")));
        }
        Ok(Tkt(out))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of total kernels.
    pub fn capitulation_number(&self) -> usize {
        self.0.iter().filter(|s| **s == TktSymbol::Total).count()
    }
}

impl fmt::Display for Tkt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for s in &self.0 {
            write!(f, "{}", s.render())?;
        }
        write!(f, ")")
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// True iff some permutation π satisfies `b(i) = π⁻¹(a(π(i)))`, fixing the non-partial symbols.
pub fn tkt_equivalent(a: &Tkt, b: &Tkt) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let m = a.len();
    if m > 8 {
        return Err(Error::Overflow(format!("exhaustive TKT comparison over {m}! permutations")));
    }
    Ok(permutations(m).iter().any(|pi| related(a, b, pi)))
}

fn related(a: &Tkt, b: &Tkt, pi: &[usize]) -> bool {
    let m = a.len();
    let mut inv = vec![0usize; m];
    for (i, &x) in pi.iter().enumerate() {
        inv[x] = i;
    }
    (0..m).all(|i| {
        let s = a.0[pi[i]];
        let mapped = match s {
            TktSymbol::Partial(j) => TktSymbol::Partial(inv[j - 1] + 1),
            other => other,
        };
        mapped == b.0[i]
    })
}

/// Smallest equivalent TKT in lexicographic order (canonical orbit representative).
pub fn tkt_canonical(a: &Tkt) -> Tkt {
    let m = a.len();
    let mut best: Option<Tkt> = None;
    for pi in permutations(m) {
        let mut inv = vec![0usize; m];
        for (i, &x) in pi.iter().enumerate() {
            inv[x] = i;
        }
        let t = Tkt((0..m)
            .map(|i| match a.0[pi[i]] {
                TktSymbol::Partial(j) => TktSymbol::Partial(inv[j - 1] + 1),
                other => other,
            })
            .collect());
        if best.as_ref().is_none_or(|b| t < *b) {
            best = Some(t);
        }
    }
    best.unwrap_or_else(|| a.clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TktName {
    pub name: String,
    pub pattern: String,
}

pub const TKT_TABLE: &[(&str, &str)] = &[
    ("c.18", "0122"),
    ("c.21", "2034"),
    ("E.6", "1122"),
    ("E.14", "3122"),
    ("H.4", "2122"),
    ("E.8", "2234"),
    ("E.9", "2334"),
    ("G.16", "2134"),
];

pub fn tkt_name(k: &Tkt) -> Option<TktName> {
    for (name, pat) in TKT_TABLE {
        let t = Tkt::parse(pat).expect("table entries parse");
        if t.len() == k.len() && tkt_equivalent(&t, k).unwrap_or(false) {
            return Some(TktName { name: name.to_string(), pattern: format!("({pat})") });
        }
    }
    None
}

pub fn tkt_by_name(name: &str) -> Result<Tkt> {
    TKT_TABLE
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, p)| Tkt::parse(p).expect("table entries parse"))
        .ok_or_else(|| Error::UnknownTkt(name.into()))
}

/// Transfer target and kernel data of all layers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtinPattern {
    pub v: usize,
    /// Per layer, targets in deterministic subgroup order.
    pub tau_ordered: Vec<Vec<AbelianType>>,
    pub kappa: Vec<Vec<KernelDescriptor>>,
}

impl ArtinPattern {
    pub fn tau(&self, n: usize) -> TypeMultiset {
        TypeMultiset::new(self.tau_ordered[n].clone())
    }

    pub fn tau0(&self) -> &AbelianType {
        &self.tau_ordered[0][0]
    }

    pub fn tkt(&self) -> Tkt {
        let layer = self.kappa.get(1).cloned().unwrap_or_default();
        Tkt(layer.iter().map(|k| TktSymbol::from_kind(&k.kind)).collect())
    }

    /// `[τ0; τ1]` in formal-exponent notation.
    pub fn ipad1_string(&self) -> String {
        let t1 = if self.v >= 1 { self.tau(1).formal() } else { "()".into() };
        format!("[{};{}]", self.tau0().formal(), t1)
    }
}

/// Transfer targets and kernels for every layer `0..=v`.
pub fn artin_pattern(pres: &PcPresentation) -> Result<ArtinPattern> {
    let d = derived_subgroup(pres)?;
    let v = pres.ngens() - d.order_exponent();
    let first = if v >= 1 { layer_with_derived(pres, &d, 1)? } else { vec![] };
    let mut tau_ordered = Vec::with_capacity(v + 1);
    let mut kappa = Vec::with_capacity(v + 1);
    for n in 0..=v {
        let subs = if n == 1 { first.clone() } else { layer_with_derived(pres, &d, n)? };
        let mut taus = Vec::with_capacity(subs.len());
        let mut kers = Vec::with_capacity(subs.len());
        for h in &subs {
            let tr = Transfer::with_derived(pres, h, &d)?;
            taus.push(tr.target_type().clone());
            kers.push(kernel_with(pres, &tr, &d, &first)?);
        }
        tau_ordered.push(taus);
        kappa.push(kers);
    }
    Ok(ArtinPattern { v, tau_ordered, kappa })
}

/// First-order IPAD: `τ0` and the layer-1 targets in deterministic order.
pub fn ipad1(pres: &PcPresentation) -> Result<(AbelianType, Vec<AbelianType>)> {
    let d = derived_subgroup(pres)?;
    let v = pres.ngens() - d.order_exponent();
    let tau0 = AbelianType::new(Abelianization::of(pres)?.abelian_type().0.clone());
    if v == 0 {
        return Ok((tau0, vec![]));
    }
    let mut t1 = Vec::new();
    for h in layer_with_derived(pres, &d, 1)? {
        t1.push(crate::pcgroup::abelian_invariants(pres, &h)?);
    }
    Ok((tau0, t1))
}

/// Second-order IPAD: for every layer-1 subgroup `H`, its own `(τ0(H); τ1(H))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ipad2 {
    pub tau0: AbelianType,
    pub entries: Vec<(AbelianType, TypeMultiset)>,
}

impl Ipad2 {
    /// Order-insensitive view of the entries.
    pub fn multiset(&self) -> Vec<(AbelianType, TypeMultiset)> {
        let mut v = self.entries.clone();
        v.sort();
        v
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> =
            self.entries.iter().map(|(t0, t1)| format!("[{};{}]", t0.formal(), t1.formal())).collect();
        format!("[{};({})]", self.tau0.formal(), parts.join(","))
    }
}

pub fn ipad2(pres: &PcPresentation) -> Result<Ipad2> {
    let d = derived_subgroup(pres)?;
    let v = pres.ngens() - d.order_exponent();
    let tau0 = Abelianization::of(pres)?.abelian_type().clone();
    let mut entries = Vec::new();
    if v >= 1 {
        for h in layer_with_derived(pres, &d, 1)? {
            let hp = h.presentation(pres)?;
            let (t0, t1) = ipad1(&hp)?;
            entries.push((t0, TypeMultiset::new(t1)));
        }
    }
    Ok(Ipad2 { tau0, entries })
}
