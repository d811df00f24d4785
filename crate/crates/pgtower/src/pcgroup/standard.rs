//! Rewriting a consistent presentation into one refining the lower exponent-p central series,
//! with every generator of weight at least 2 defined exactly by a power or commutator.

use super::presentation::{Definition, Element, PcPresentation, Word};
use super::series::{p_central_series, LayerCoords};
use super::subgroup::{Factor, Subgroup};
use crate::error::{Error, Result};
use crate::linalg::Echelon;

/// Generators of the standardized presentation as elements of the input group.
pub struct Standardized {
    pub presentation: PcPresentation,
    /// Image of each new generator in the original presentation.
    pub images: Vec<Element>,
}

/// Returns an isomorphic presentation with exponent-p central weights and exact definitions.
pub fn standardize(pres: &PcPresentation) -> Result<Standardized> {
    let p = pres.prime();
    let ps = p_central_series(pres)?;
    let c = ps.len() - 1;
    let mut gens: Vec<Element> = Vec::new();
    let mut weights: Vec<u32> = Vec::new();
    let mut defs: Vec<Option<Definition>> = Vec::new();
    let mut layers: Vec<LayerCoords> = Vec::new();
    let mut start: Vec<usize> = Vec::new();
    for w in 1..=c {
        let upper = &ps[w - 1];
        let lower = &ps[w];
        let f = Factor::new(upper, lower);
        let dim = f.dim();
        let mut chosen: Vec<Element> = Vec::new();
        let mut chosen_defs: Vec<Option<Definition>> = Vec::new();
        if w == 1 {
            chosen = f.reps.clone();
            chosen_defs = vec![None; dim];
        } else {
            let mut ech = Echelon::new(dim, p);
            let prev = start[w - 2]..gens.len();
            let mut cands: Vec<(Element, Definition)> = Vec::new();
            for j in prev.clone() {
                for i in 0..start.get(1).copied().unwrap_or(gens.len()).min(j) {
                    cands.push((pres.comm(&gens[j], &gens[i])?, Definition::Commutator(j, i)));
                }
                cands.push((pres.pow(&gens[j], p as u64)?, Definition::Power(j)));
            }
            for (x, d) in cands {
                if chosen.len() == dim {
                    break;
                }
                let v = f.coordinates(pres, &x)?;
                if ech.insert(&v).is_none() {
                    chosen.push(x);
                    chosen_defs.push(Some(d));
                }
            }
            if chosen.len() != dim {
                return Err(Error::Malformed("layer is not spanned by definitions".into()));
            }
        }
        layers.push(LayerCoords::new(pres, upper, lower, &chosen)?);
        start.push(gens.len());
        gens.extend(chosen);
        weights.extend(std::iter::repeat_n(w as u32, dim));
        defs.extend(chosen_defs);
    }
    let n = gens.len();
    debug_assert_eq!(n, pres.ngens());
    let coords = |x: &Element| -> Result<Word> {
        let mut x = x.clone();
        let mut out: Word = Vec::new();
        for (w, lc) in layers.iter().enumerate() {
            let e = lc.coords(pres, &x)?;
            let base = start[w];
            let mut piece = pres.identity();
            for (k, &ek) in e.iter().enumerate() {
                if ek != 0 {
                    out.push((base + k, ek));
                    piece = pres.mul(&piece, &pres.pow(&gens[base + k], ek as u64)?)?;
                }
            }
            let inv = pres.inverse(&piece)?;
            x = pres.mul(&inv, &x)?;
        }
        if !x.is_identity() {
            return Err(Error::Malformed("coordinate computation left a remainder".into()));
        }
        Ok(out)
    };
    let mut power = Vec::with_capacity(n);
    let mut comm = Vec::with_capacity(n);
    for j in 0..n {
        power.push(coords(&pres.pow(&gens[j], p as u64)?)?);
        let mut row = Vec::with_capacity(j);
        for i in 0..j {
            row.push(coords(&pres.comm(&gens[j], &gens[i])?)?);
        }
        comm.push(row);
    }
    let out = PcPresentation::new(p, power, comm)?.with_guard(pres.guard()).with_weights(weights, defs);
    out.verify_weights()?;
    Ok(Standardized { presentation: out, images: gens })
}

/// Standardized copy, or a clone when weights are already present.
pub fn ensure_standard(pres: &PcPresentation) -> Result<PcPresentation> {
    if pres.is_standard() {
        Ok(pres.clone())
    } else {
        Ok(standardize(pres)?.presentation)
    }
}

/// The subgroup generated by the images of the standardized generators of weight `>= w`.
pub fn weight_subgroup(pres: &PcPresentation, w: u32) -> Result<Subgroup> {
    let ws = pres.weights().ok_or(Error::NotStandard)?;
    let gens: Vec<Element> = (0..pres.ngens()).filter(|&i| ws[i] >= w).map(|i| pres.gen(i)).collect();
    Subgroup::closure(pres, &gens, None)
}
