//! Characteristic series, the center, and layers of subgroups above the derived subgroup.

use serde::{Deserialize, Serialize};

use super::abelian::{abelian_invariants, AbelianType};
use super::presentation::{Element, PcPresentation};
use super::subgroup::{Factor, Subgroup};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesData {
    pub lower_central: Vec<Subgroup>,
    pub derived: Vec<Subgroup>,
    pub class: usize,
    pub coclass: usize,
    pub derived_length: usize,
    pub center_type: AbelianType,
}

fn all_gens(pres: &PcPresentation) -> Vec<Element> {
    (0..pres.ngens()).map(|i| pres.gen(i)).collect()
}

/// `[K, G]`, optionally times `K^p`.
fn next_term(pres: &PcPresentation, k: &Subgroup, with_powers: bool) -> Result<Subgroup> {
    let gens = all_gens(pres);
    let mut seeds = Vec::new();
    for x in k.gens() {
        if with_powers {
            seeds.push(pres.pow(x, pres.prime() as u64)?);
        }
        for a in &gens {
            seeds.push(pres.comm(x, a)?);
        }
    }
    Subgroup::closure(pres, &seeds, Some(&gens))
}

/// `G = γ_1 ⊇ γ_2 ⊇ … ⊇ 1` (ends with the trivial subgroup).
pub fn lower_central_series(pres: &PcPresentation) -> Result<Vec<Subgroup>> {
    let mut out = vec![Subgroup::whole(pres)];
    while !out.last().expect("nonempty").is_trivial() {
        let next = next_term(pres, out.last().expect("nonempty"), false)?;
        if next.order_exponent() == out.last().expect("nonempty").order_exponent() {
            return Err(Error::Malformed("lower central series does not terminate".into()));
        }
        out.push(next);
    }
    Ok(out)
}

/// Lower exponent-p central series `P_1 = G`, `P_{k+1} = [P_k, G] P_k^p`, ending with 1.
pub fn p_central_series(pres: &PcPresentation) -> Result<Vec<Subgroup>> {
    let mut out = vec![Subgroup::whole(pres)];
    while !out.last().expect("nonempty").is_trivial() {
        let next = next_term(pres, out.last().expect("nonempty"), true)?;
        out.push(next);
    }
    Ok(out)
}

/// `G ⊇ G' ⊇ G'' ⊇ … ⊇ 1`.
pub fn derived_series(pres: &PcPresentation) -> Result<Vec<Subgroup>> {
    let mut out = vec![Subgroup::whole(pres)];
    while !out.last().expect("nonempty").is_trivial() {
        let next = out.last().expect("nonempty").derived(pres)?;
        out.push(next);
    }
    Ok(out)
}

pub fn derived_subgroup(pres: &PcPresentation) -> Result<Subgroup> {
    Subgroup::whole(pres).derived(pres)
}

/// The center, found by descending the pc series `G_k = <a_k, …, a_n>`: the preimage of
/// `Z(G/G_{k+1})` is the kernel of `x -> ([x, a_i] mod G_{k+1})_i` on the preimage of `Z(G/G_k)`.
pub fn center(pres: &PcPresentation) -> Result<Subgroup> {
    let n = pres.ngens();
    let p = pres.prime();
    let gens = all_gens(pres);
    let mut c = Subgroup::whole(pres);
    for k in 0..n {
        let images: Vec<Vec<u32>> = c
            .gens()
            .iter()
            .map(|x| gens.iter().map(|a| pres.comm(x, a).map(|y| y.0[k])).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        if images.iter().all(|v| linalg::is_zero(v)) {
            continue;
        }
        let mut seeds = Vec::new();
        for v in linalg::nullspace(&images, n, p) {
            seeds.push(c.element(pres, &v)?);
        }
        for (j, x) in c.gens().iter().enumerate() {
            seeds.push(pres.pow(x, p as u64)?);
            for y in &c.gens()[..j] {
                seeds.push(pres.comm(x, y)?);
            }
        }
        let cg = c.gens().to_vec();
        c = Subgroup::closure(pres, &seeds, Some(&cg))?;
    }
    Ok(c)
}

pub fn series(pres: &PcPresentation) -> Result<SeriesData> {
    let lower_central = lower_central_series(pres)?;
    let derived = derived_series(pres)?;
    let class = lower_central.len() - 1;
    let z = center(pres)?;
    let center_type = abelian_invariants(pres, &z)?;
    Ok(SeriesData {
        class,
        coclass: pres.ngens() - class,
        derived_length: derived.len() - 1,
        center_type,
        lower_central,
        derived,
    })
}

/// Maximal subgroups of `h` that contain `floor` (which must be normal in `h` with abelian quotient).
pub fn maximal_subgroups_above(pres: &PcPresentation, h: &Subgroup, floor: &Subgroup) -> Result<Vec<Subgroup>> {
    let p = pres.prime();
    let mut seeds: Vec<Element> = Vec::new();
    for x in h.gens() {
        seeds.push(pres.pow(x, p as u64)?);
    }
    let phi = Subgroup::extend(pres, floor, &seeds, None)?;
    let f = Factor::new(h, &phi);
    let r = f.dim();
    let mut out = Vec::new();
    if r == 0 {
        return Ok(out);
    }
    for basis in linalg::subspaces(r, r - 1, p) {
        let mut new = Vec::with_capacity(basis.len());
        for v in &basis {
            new.push(f.element(pres, v)?);
        }
        out.push(Subgroup::extend(pres, &phi, &new, None)?);
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// `log_p |G/G'|`.
pub fn top_layer_index(pres: &PcPresentation) -> Result<usize> {
    Ok(pres.ngens() - derived_subgroup(pres)?.order_exponent())
}

/// All `H` with `G' <= H <= G` and `(G:H) = p^n`, sorted by canonical generator matrices.
pub fn layer(pres: &PcPresentation, n: usize) -> Result<Vec<Subgroup>> {
    let d = derived_subgroup(pres)?;
    layer_with_derived(pres, &d, n)
}

pub fn layer_with_derived(pres: &PcPresentation, d: &Subgroup, n: usize) -> Result<Vec<Subgroup>> {
    let v = pres.ngens() - d.order_exponent();
    if n > v {
        return Err(Error::LayerOutOfRange { n, v });
    }
    let mut cur = vec![Subgroup::whole(pres)];
    for _ in 0..n {
        let mut next = Vec::new();
        for h in &cur {
            next.extend(maximal_subgroups_above(pres, h, d)?);
        }
        next.sort();
        next.dedup();
        cur = next;
    }
    Ok(cur)
}

/// Number of k-dimensional subspaces of an r-dimensional space, `(p^r - 1)/(p - 1)` for k = r - 1.
pub fn hyperplane_count(p: u32, r: usize) -> usize {
    let p = p as usize;
    (p.pow(r as u32) - 1) / (p - 1)
}

/// Coordinates of `x` in `P_w / P_{w+1}` with respect to a fixed basis `layer_basis` (given as elements).
pub(crate) struct LayerCoords {
    factor: Factor,
    echelon: Echelon,
}

impl LayerCoords {
    pub(crate) fn new(pres: &PcPresentation, upper: &Subgroup, lower: &Subgroup, basis: &[Element]) -> Result<Self> {
        let factor = Factor::new(upper, lower);
        let mut echelon = Echelon::new(factor.dim(), pres.prime());
        for b in basis {
            let v = factor.coordinates(pres, b)?;
            if echelon.insert(&v).is_some() {
                return Err(Error::Malformed("layer basis is dependent".into()));
            }
        }
        Ok(LayerCoords { factor, echelon })
    }

    pub(crate) fn coords(&self, pres: &PcPresentation, x: &Element) -> Result<Vec<u32>> {
        let v = self.factor.coordinates(pres, x)?;
        self.echelon.solve(&v).ok_or_else(|| Error::Malformed("element outside layer".into()))
    }
}
