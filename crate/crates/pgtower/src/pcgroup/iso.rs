//! Isomorphism testing by lifting generator images through the lower exponent-p central series.
//!
//! Images of the weight-1 generators are fixed modulo `P_2` by an invertible matrix and then
//! corrected one layer at a time. Corrections that differ by conjugation with an element of the
//! previous layer give equivalent maps, so only canonical representatives modulo that span are tried.

use super::presentation::{Definition, Element, PcPresentation};
use super::series::derived_subgroup;
use super::standard::ensure_standard;
use super::subgroup::Subgroup;
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};

/// Default node budget for isomorphism and automorphism searches.
pub const DEFAULT_ISO_BUDGET: u64 = 2_000_000;

struct Side {
    pres: PcPresentation,
    /// `m[k]` = number of generators of weight `<= k`.
    m: Vec<usize>,
    truncs: Vec<PcPresentation>,
}

impl Side {
    fn new(pres: &PcPresentation) -> Result<Self> {
        let pres = ensure_standard(pres)?;
        let ws = pres.weights().ok_or(Error::NotStandard)?.to_vec();
        let c = ws.iter().copied().max().unwrap_or(0) as usize;
        let m: Vec<usize> = (0..=c).map(|k| ws.iter().filter(|&&w| w as usize <= k).count()).collect();
        let truncs = m.iter().map(|&mk| pres.truncate(mk)).collect();
        Ok(Side { pres, m, truncs })
    }

    fn class(&self) -> usize {
        self.m.len() - 1
    }

    fn rank(&self) -> usize {
        self.m.get(1).copied().unwrap_or(0)
    }
}

struct Search<'a> {
    a: &'a Side,
    b: &'a Side,
    budget: u64,
    nodes: u64,
    /// For automorphisms inverting the abelianization: `G' P_{k+1}` for each k.
    gi_floors: Option<Vec<Subgroup>>,
}

impl<'a> Search<'a> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Undecided(self.budget));
        }
        Ok(())
    }

    /// Do the relations of `A / P_{k+1}(A)` hold for the images `x` in `B / P_{k+1}(B)`?
    fn relations_hold(&self, k: usize, x: &[Element]) -> Result<bool> {
        let ak = &self.a.truncs[k];
        let bk = &self.b.truncs[k];
        let na = self.a.m[k];
        let nb = self.b.m[k];
        let d = self.a.rank();
        let defs = self.a.pres.definitions().ok_or(Error::NotStandard)?;
        let mut img: Vec<Element> = Vec::with_capacity(na);
        for xi in x.iter().take(d) {
            img.push(Element(xi.0[..nb].to_vec()));
        }
        for g in d..na {
            let e = match defs[g] {
                Some(Definition::Power(j)) => bk.pow(&img[j], bk.prime() as u64)?,
                Some(Definition::Commutator(j, i)) => bk.comm(&img[j], &img[i])?,
                None => return Err(Error::NotStandard),
            };
            img.push(e);
        }
        let eval = |w: &[(usize, u32)]| -> Result<Element> {
            let mut v = bk.identity();
            for &(g, e) in w {
                v = bk.mul(&v, &bk.pow(&img[g], e as u64)?)?;
            }
            Ok(v)
        };
        for j in 0..na {
            if defs[..na].contains(&Some(Definition::Power(j))) {
                // defining relation holds by construction
            } else if bk.pow(&img[j], bk.prime() as u64)? != eval(ak.power_rhs(j))? {
                return Ok(false);
            }
            for i in 0..j {
                if defs[..na].contains(&Some(Definition::Commutator(j, i))) {
                    continue;
                }
                if bk.comm(&img[j], &img[i])? != eval(ak.comm_rhs(j, i))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Images are fixed modulo `P_{k+1}(B)`; try to extend them to a full homomorphism.
    fn dfs(&mut self, k: usize, x: &mut Vec<Element>) -> Result<bool> {
        self.tick()?;
        let c = self.a.class();
        if k >= c {
            return Ok(true);
        }
        if !self.relations_hold(k + 1, x)? {
            return Ok(false);
        }
        if k + 1 == c {
            return Ok(true);
        }
        // choose the layer k+1 components of the images
        let p = self.b.pres.prime();
        let d = self.a.rank();
        let lo = self.b.m[k];
        let hi = self.b.m[k + 1];
        let l = hi - lo;
        let bk = &self.b.truncs[k + 1];
        let mut span = Echelon::new(d * l, p);
        for t in self.b.m[k - 1]..lo {
            let bt = bk.gen(t);
            let mut v = Vec::with_capacity(d * l);
            for xi in x.iter() {
                let xi = Element(xi.0[..hi].to_vec());
                let cm = bk.comm(&xi, &bt)?;
                v.extend_from_slice(&cm.0[lo..hi]);
            }
            span.insert(&v);
        }
        let pivots = span.pivots();
        let free: Vec<usize> = (0..d * l).filter(|i| !pivots.contains(i)).collect();
        for fill in linalg::all_vectors(free.len(), p) {
            let mut z = vec![0u32; d * l];
            for (&pos, &val) in free.iter().zip(&fill) {
                z[pos] = val;
            }
            for (i, xi) in x.iter_mut().enumerate() {
                xi.0[lo..hi].copy_from_slice(&z[i * l..(i + 1) * l]);
            }
            if let Some(floors) = &self.gi_floors {
                let g = &self.b.pres;
                let mut ok = true;
                for (i, xi) in x.iter().enumerate() {
                    let y = g.mul(&g.gen(i), xi)?;
                    if !floors[k + 1].contains(g, &y)? {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    continue;
                }
            }
            if self.dfs(k + 1, x)? {
                return Ok(true);
            }
        }
        for xi in x.iter_mut() {
            for e in &mut xi.0[lo..hi] {
                *e = 0;
            }
        }
        Ok(false)
    }
}

fn layer_dims(s: &Side) -> Vec<usize> {
    s.m.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Decides whether two presentations define isomorphic groups.
/// Returns `Err(Undecided)` when more than `budget` search nodes would be needed.
pub fn iso_test(a: &PcPresentation, b: &PcPresentation, budget: u64) -> Result<bool> {
    if a.prime() != b.prime() || a.ngens() != b.ngens() {
        return Ok(false);
    }
    let sa = Side::new(a)?;
    let sb = Side::new(b)?;
    if layer_dims(&sa) != layer_dims(&sb) {
        return Ok(false);
    }
    let d = sa.rank();
    let p = a.prime();
    let n = a.ngens();
    if sa.class() <= 1 {
        return Ok(true);
    }
    let mut search = Search { a: &sa, b: &sb, budget, nodes: 0, gi_floors: None };
    for mat in linalg::general_linear(d, p) {
        let mut x: Vec<Element> = mat
            .iter()
            .map(|row| {
                let mut v = vec![0u32; n];
                v[..d].copy_from_slice(row);
                Element(v)
            })
            .collect();
        if search.dfs(1, &mut x)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Whether some automorphism induces inversion on `G/G'`.
pub fn inverting_automorphism_exists(pres: &PcPresentation, budget: u64) -> Result<bool> {
    let side = Side::new(pres)?;
    let g = &side.pres;
    let n = g.ngens();
    let d = side.rank();
    let c = side.class();
    let derived = derived_subgroup(g)?;
    let ws = g.weights().ok_or(Error::NotStandard)?;
    let mut floors = Vec::with_capacity(c + 1);
    for k in 0..=c {
        let tail: Vec<Element> = (0..n).filter(|&i| ws[i] as usize > k).map(|i| g.gen(i)).collect();
        floors.push(Subgroup::extend(g, &derived, &tail, None)?);
    }
    // level 1: x_i = a_i^{-1} modulo P_2
    let p = g.prime();
    let mut x: Vec<Element> = (0..d)
        .map(|i| {
            let mut v = vec![0u32; n];
            v[i] = p - 1;
            Element(v)
        })
        .collect();
    for (i, xi) in x.iter().enumerate() {
        let y = g.mul(&g.gen(i), xi)?;
        if !floors[1].contains(g, &y)? {
            return Ok(false);
        }
    }
    if c <= 1 {
        return Ok(true);
    }
    let mut search = Search { a: &side, b: &side, budget, nodes: 0, gi_floors: Some(floors) };
    search.dfs(1, &mut x)
}
