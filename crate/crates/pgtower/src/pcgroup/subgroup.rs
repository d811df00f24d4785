//! Subgroups as canonical induced generating sequences, closures, factor coordinates and quotients.

use serde::{Deserialize, Serialize};

use super::presentation::{Element, PcPresentation, Word};
use crate::error::{Error, Result};
use crate::linalg::inv_mod;

/// Canonical induced generating sequence: strictly increasing depths, leading exponent 1,
/// and every generator has exponent 0 at the depths of the others.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subgroup {
    gens: Vec<Element>,
    depths: Vec<usize>,
}

impl Subgroup {
    pub fn trivial() -> Self {
        Subgroup { gens: vec![], depths: vec![] }
    }

    pub fn whole(pres: &PcPresentation) -> Self {
        let n = pres.ngens();
        Subgroup { gens: (0..n).map(|i| pres.gen(i)).collect(), depths: (0..n).collect() }
    }

    pub fn gens(&self) -> &[Element] {
        &self.gens
    }

    /// 0-based leading positions of the generators.
    pub fn depths(&self) -> &[usize] {
        &self.depths
    }

    /// log_p of the subgroup order.
    pub fn order_exponent(&self) -> usize {
        self.gens.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.gens.is_empty()
    }

    fn position_of_depth(&self, d: usize) -> Option<usize> {
        self.depths.binary_search(&d).ok()
    }

    /// Right-sifts `x` through the sequence; the identity result means membership.
    pub fn sift(&self, pres: &PcPresentation, x: &Element) -> Result<Element> {
        let mut x = x.clone();
        while let Some(d) = x.depth() {
            let Some(k) = self.position_of_depth(d) else { return Ok(x) };
            let e = x.0[d];
            let g = &self.gens[k];
            let gi = pres.inverse(g)?;
            let step = pres.pow(&gi, e as u64)?;
            x = pres.mul(&x, &step)?;
        }
        Ok(x)
    }

    pub fn contains(&self, pres: &PcPresentation, x: &Element) -> Result<bool> {
        Ok(self.sift(pres, x)?.is_identity())
    }

    /// Exponents of `x` with respect to this sequence (left division), if `x` is a member.
    pub fn coordinates(&self, pres: &PcPresentation, x: &Element) -> Result<Option<Vec<u32>>> {
        let mut x = x.clone();
        let mut out = vec![0u32; self.gens.len()];
        while let Some(d) = x.depth() {
            let Some(k) = self.position_of_depth(d) else { return Ok(None) };
            let e = x.0[d];
            out[k] = e;
            let gi = pres.inverse(&self.gens[k])?;
            let step = pres.pow(&gi, e as u64)?;
            x = pres.mul(&step, &x)?;
        }
        Ok(Some(out))
    }

    /// Element with the given exponents along the sequence.
    pub fn element(&self, pres: &PcPresentation, exps: &[u32]) -> Result<Element> {
        let mut v = pres.identity();
        for (g, &e) in self.gens.iter().zip(exps) {
            if e != 0 {
                let y = pres.pow(g, e as u64)?;
                v = pres.mul(&v, &y)?;
            }
        }
        Ok(v)
    }

    /// Subgroup generated by `seeds`; when `normalizers` is given the closure is also closed
    /// under conjugation by those elements.
    pub fn closure(pres: &PcPresentation, seeds: &[Element], normalizers: Option<&[Element]>) -> Result<Self> {
        Self::extend(pres, &Subgroup::trivial(), seeds, normalizers)
    }

    /// Normal closure of `seeds` in the whole group.
    pub fn normal_closure(pres: &PcPresentation, seeds: &[Element]) -> Result<Self> {
        let gens: Vec<Element> = (0..pres.ngens()).map(|i| pres.gen(i)).collect();
        Self::closure(pres, seeds, Some(&gens))
    }

    /// Closure of an existing closed sequence together with new elements.
    pub fn extend(
        pres: &PcPresentation,
        base: &Subgroup,
        seeds: &[Element],
        normalizers: Option<&[Element]>,
    ) -> Result<Self> {
        let p = pres.prime();
        let mut gens: Vec<Element> = base.gens.clone();
        let mut depths: Vec<usize> = base.depths.clone();
        let mut queue: Vec<Element> = seeds.to_vec();
        // base is closed already, but normalizers may be new
        if let Some(ns) = normalizers {
            for g in &base.gens {
                for a in ns {
                    queue.push(pres.comm(g, a)?);
                }
            }
        }
        while let Some(x) = queue.pop() {
            let tmp = Subgroup { gens: gens.clone(), depths: depths.clone() };
            let r = tmp.sift(pres, &x)?;
            let Some(d) = r.depth() else { continue };
            let lead = r.0[d];
            let r = if lead == 1 { r } else { pres.pow(&r, inv_mod(lead, p) as u64)? };
            let pos = depths.iter().position(|&e| e > d).unwrap_or(depths.len());
            queue.push(pres.pow(&r, p as u64)?);
            for g in &gens {
                queue.push(pres.comm(&r, g)?);
            }
            if let Some(ns) = normalizers {
                for a in ns {
                    queue.push(pres.comm(&r, a)?);
                }
            }
            gens.insert(pos, r);
            depths.insert(pos, d);
        }
        let mut s = Subgroup { gens, depths };
        s.canonicalize(pres)?;
        Ok(s)
    }

    fn canonicalize(&mut self, pres: &PcPresentation) -> Result<()> {
        let m = self.gens.len();
        for j in 0..m {
            let dj = self.depths[j];
            let inv = pres.inverse(&self.gens[j])?;
            for i in 0..j {
                let e = self.gens[i].0[dj];
                if e != 0 {
                    let step = pres.pow(&inv, e as u64)?;
                    self.gens[i] = pres.mul(&self.gens[i], &step)?;
                }
            }
        }
        Ok(())
    }

    pub fn is_subgroup_of(&self, pres: &PcPresentation, other: &Subgroup) -> Result<bool> {
        for g in &self.gens {
            if !other.contains(pres, g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Normal in the whole group.
    pub fn is_normal(&self, pres: &PcPresentation) -> Result<bool> {
        for g in &self.gens {
            for a in 0..pres.ngens() {
                let c = pres.comm(g, &pres.gen(a))?;
                if !self.contains(pres, &c)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Normal in `k` (which must contain this subgroup).
    pub fn is_normal_in(&self, pres: &PcPresentation, k: &Subgroup) -> Result<bool> {
        for g in &self.gens {
            for a in &k.gens {
                let c = pres.comm(g, a)?;
                if !self.contains(pres, &c)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Derived subgroup `[H, H]` (normal closure in H of generator commutators).
    pub fn derived(&self, pres: &PcPresentation) -> Result<Subgroup> {
        let mut seeds = Vec::new();
        for j in 0..self.gens.len() {
            for i in 0..j {
                seeds.push(pres.comm(&self.gens[j], &self.gens[i])?);
            }
        }
        Subgroup::closure(pres, &seeds, Some(&self.gens))
    }

    /// Frattini subgroup `H' H^p`.
    pub fn frattini(&self, pres: &PcPresentation) -> Result<Subgroup> {
        let mut seeds = Vec::new();
        for j in 0..self.gens.len() {
            seeds.push(pres.pow(&self.gens[j], pres.prime() as u64)?);
            for i in 0..j {
                seeds.push(pres.comm(&self.gens[j], &self.gens[i])?);
            }
        }
        Subgroup::closure(pres, &seeds, Some(&self.gens))
    }

    /// Induced presentation of this subgroup on its own generating sequence.
    pub fn presentation(&self, pres: &PcPresentation) -> Result<PcPresentation> {
        let m = self.gens.len();
        let mut power: Vec<Word> = Vec::with_capacity(m);
        let mut comm: Vec<Vec<Word>> = Vec::with_capacity(m);
        let to_word = |c: Vec<u32>| -> Word { c.into_iter().enumerate().filter(|&(_, e)| e != 0).collect() };
        for j in 0..m {
            let x = pres.pow(&self.gens[j], pres.prime() as u64)?;
            let c = self.coordinates(pres, &x)?.ok_or_else(|| Error::Malformed("subgroup not closed".into()))?;
            power.push(to_word(c));
            let mut row = Vec::with_capacity(j);
            for i in 0..j {
                let x = pres.comm(&self.gens[j], &self.gens[i])?;
                let c =
                    self.coordinates(pres, &x)?.ok_or_else(|| Error::Malformed("subgroup not closed".into()))?;
                row.push(to_word(c));
            }
            comm.push(row);
        }
        Ok(PcPresentation::new(pres.prime(), power, comm)?.with_guard(pres.guard()))
    }
}

/// Factor `K / N` for normal `N <= K`: representatives of K at depths outside N together with
/// the sequence of N give coordinates of cosets.
#[derive(Clone, Debug)]
pub struct Factor {
    /// Generators of K whose depths are not depths of N.
    pub reps: Vec<Element>,
    rep_depths: Vec<usize>,
    combined: Vec<(usize, Element, Option<usize>)>,
}

impl Factor {
    pub fn new(k: &Subgroup, n: &Subgroup) -> Self {
        let mut reps = Vec::new();
        let mut rep_depths = Vec::new();
        let mut combined = Vec::new();
        for (g, &d) in k.gens.iter().zip(&k.depths) {
            if n.position_of_depth(d).is_none() {
                combined.push((d, g.clone(), Some(reps.len())));
                reps.push(g.clone());
                rep_depths.push(d);
            }
        }
        for (g, &d) in n.gens.iter().zip(&n.depths) {
            combined.push((d, g.clone(), None));
        }
        combined.sort_by_key(|t| t.0);
        Factor { reps, rep_depths, combined }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn rep_depths(&self) -> &[usize] {
        &self.rep_depths
    }

    /// Exponents of `xN` along `reps` (left division through the combined sequence).
    pub fn coordinates(&self, pres: &PcPresentation, x: &Element) -> Result<Vec<u32>> {
        let mut x = x.clone();
        let mut out = vec![0u32; self.reps.len()];
        while let Some(d) = x.depth() {
            let idx = self
                .combined
                .binary_search_by_key(&d, |t| t.0)
                .map_err(|_| Error::Malformed("element outside the ambient subgroup".into()))?;
            let (_, g, rep) = &self.combined[idx];
            let e = x.0[d];
            let gi = pres.inverse(g)?;
            let step = pres.pow(&gi, e as u64)?;
            match rep {
                Some(r) => {
                    out[*r] = e;
                    x = pres.mul(&step, &x)?;
                }
                None => {
                    x = pres.mul(&x, &step)?;
                }
            }
        }
        Ok(out)
    }

    /// Product of the representatives raised to `exps`.
    pub fn element(&self, pres: &PcPresentation, exps: &[u32]) -> Result<Element> {
        let mut v = pres.identity();
        for (g, &e) in self.reps.iter().zip(exps) {
            if e != 0 {
                v = pres.mul(&v, &pres.pow(g, e as u64)?)?;
            }
        }
        Ok(v)
    }
}

/// Presentation of `G/N` on the generators of G at depths outside N.
pub fn quotient(pres: &PcPresentation, n: &Subgroup) -> Result<PcPresentation> {
    if !n.is_normal(pres)? {
        return Err(Error::NotNormal);
    }
    let whole = Subgroup::whole(pres);
    let f = Factor::new(&whole, n);
    let m = f.dim();
    let keep = f.rep_depths().to_vec();
    let word = |c: Vec<u32>| -> Word { c.into_iter().enumerate().filter(|&(_, e)| e != 0).collect() };
    let mut power = Vec::with_capacity(m);
    let mut comm = Vec::with_capacity(m);
    for (j, &gj) in keep.iter().enumerate() {
        let x = pres.pow(&pres.gen(gj), pres.prime() as u64)?;
        power.push(word(f.coordinates(pres, &x)?));
        let mut row = Vec::with_capacity(j);
        for &gi in &keep[..j] {
            let x = pres.comm(&pres.gen(gj), &pres.gen(gi))?;
            row.push(word(f.coordinates(pres, &x)?));
        }
        comm.push(row);
    }
    Ok(PcPresentation::new(pres.prime(), power, comm)?.with_guard(pres.guard()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis() -> PcPresentation {
        PcPresentation::new(3, vec![vec![]; 3], vec![vec![], vec![vec![(2, 1)]], vec![vec![], vec![]]]).unwrap()
    }

    #[test]
    fn trivial_and_cyclic() {
        let g = PcPresentation::elementary_abelian(3, 2).unwrap();
        let t = Subgroup::closure(&g, &[g.identity()], None).unwrap();
        assert_eq!(t.order_exponent(), 0);
        let c = Subgroup::closure(&g, &[g.gen(0)], None).unwrap();
        assert_eq!(c.order_exponent(), 1);
    }

    #[test]
    fn generators_close_to_whole_group() {
        let g = heis();
        let s = Subgroup::closure(&g, &[g.gen(0), g.gen(1)], None).unwrap();
        assert_eq!(s.order_exponent(), 3);
        assert_eq!(s, Subgroup::whole(&g));
    }

    #[test]
    fn canonical_form_is_unique() {
        let g = heis();
        let a = Subgroup::closure(&g, &[Element(vec![1, 1, 2]), g.gen(2)], None).unwrap();
        let b = Subgroup::closure(&g, &[Element(vec![1, 1, 0])], None).unwrap();
        let b = Subgroup::extend(&g, &b, &[g.gen(2)], None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quotient_by_center() {
        let g = heis();
        let z = Subgroup::closure(&g, &[g.gen(2)], None).unwrap();
        let q = quotient(&g, &z).unwrap();
        assert_eq!(q.ngens(), 2);
        assert!(q.is_abelian());
        let non_normal = Subgroup::closure(&g, &[g.gen(0)], None).unwrap();
        assert_eq!(quotient(&g, &non_normal).unwrap_err(), Error::NotNormal);
    }
}
