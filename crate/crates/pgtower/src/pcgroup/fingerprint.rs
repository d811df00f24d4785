//! Isomorphism invariants bundled into one comparable value.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::abelian::{abelian_invariants, AbelianType, Abelianization, TypeMultiset};
use super::presentation::{Element, PcPresentation};
use super::series::{series, SeriesData};
use crate::artin::{artin_pattern, ipad2, tkt_canonical, ArtinPattern, Ipad2, Tkt};
use crate::error::Result;

/// Element-order census is only taken for groups up to this order exponent.
pub const CENSUS_MAX_EXPONENT: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fingerprint {
    pub order_exponent: usize,
    pub class: usize,
    pub coclass: usize,
    pub derived_length: usize,
    pub abelianization: AbelianType,
    pub center_type: AbelianType,
    /// `(order, count)` pairs, absent for large groups.
    pub order_census: Option<Vec<(u64, u64)>>,
    pub tau: Vec<TypeMultiset>,
    /// Canonical representative of the layer-1 kernel type.
    pub tkt: Tkt,
    /// Order-insensitive second-order IPAD.
    pub ipad2: Vec<(AbelianType, TypeMultiset)>,
}

/// Everything computed for a fingerprint, kept for reuse.
#[derive(Clone, Debug)]
pub struct Invariants {
    pub series: SeriesData,
    pub pattern: ArtinPattern,
    pub ipad2: Ipad2,
    pub fingerprint: Fingerprint,
}

/// Number of elements of each order. Uses `|x| = p |x^p|` with memoized orders, so each
/// element costs one p-th power.
pub fn element_order_census(pres: &PcPresentation) -> Result<Vec<(u64, u64)>> {
    let p = pres.prime() as u64;
    let index = |v: &[u32]| v.iter().rev().fold(0usize, |acc, &e| acc * p as usize + e as usize);
    let elems: Vec<Element> = pres.elements().collect();
    let mut power_of = vec![0usize; elems.len()];
    for x in &elems {
        power_of[index(&x.0)] = index(&pres.pow(x, p)?.0);
    }
    // 0 marks "unknown"; the identity has index 0 and order 1.
    let mut order = vec![0u64; elems.len()];
    order[0] = 1;
    let mut chain = Vec::new();
    for start in 0..elems.len() {
        let mut i = start;
        while order[i] == 0 {
            chain.push(i);
            i = power_of[i];
        }
        let mut o = order[i];
        while let Some(j) = chain.pop() {
            o *= p;
            order[j] = o;
        }
    }
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for o in order {
        *counts.entry(o).or_default() += 1;
    }
    Ok(counts.into_iter().collect())
}

pub fn invariants(pres: &PcPresentation) -> Result<Invariants> {
    invariants_with_pattern(pres, artin_pattern(pres)?)
}

/// Completes the invariants when the Artin pattern is already known.
pub fn invariants_with_pattern(pres: &PcPresentation, pattern: ArtinPattern) -> Result<Invariants> {
    let s = series(pres)?;
    let ip2 = ipad2(pres)?;
    let census = if pres.ngens() <= CENSUS_MAX_EXPONENT { Some(element_order_census(pres)?) } else { None };
    let fingerprint = Fingerprint {
        order_exponent: pres.ngens(),
        class: s.class,
        coclass: s.coclass,
        derived_length: s.derived_length,
        abelianization: Abelianization::of(pres)?.abelian_type().clone(),
        center_type: s.center_type.clone(),
        order_census: census,
        tau: (0..=pattern.v).map(|n| pattern.tau(n)).collect(),
        tkt: tkt_canonical(&pattern.tkt()),
        ipad2: ip2.multiset(),
    };
    Ok(Invariants { series: s, pattern, ipad2: ip2, fingerprint })
}

pub fn fingerprint(pres: &PcPresentation) -> Result<Fingerprint> {
    Ok(invariants(pres)?.fingerprint)
}

/// Abelian invariants of the center (used for vertex classification).
pub fn center_type(pres: &PcPresentation) -> Result<AbelianType> {
    let z = super::series::center(pres)?;
    abelian_invariants(pres, &z)
}
