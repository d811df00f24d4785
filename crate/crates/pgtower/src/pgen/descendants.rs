//! Allowable subgroups and immediate descendants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cover::{PCover, RelKey};
use crate::artin::{artin_pattern, ArtinPattern};
use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::pcgroup::iso::{iso_test, DEFAULT_ISO_BUDGET};
use crate::pcgroup::{invariants_with_pattern, AbelianType, Abelianization, Element, Invariants, PcPresentation, Subgroup, Word};

/// Allowable subgroups of step size `s` as reduced echelon bases in multiplicator coordinates.
///
/// `U` supplements the nucleus `N`, so `W = U ∩ N` has codimension `s` in `N` and `U` is
/// `W` plus a graph over a fixed complement of `N`.
pub fn allowable_bases(cov: &PCover, s: usize) -> Vec<Vec<Vec<u32>>> {
    let (mu, nu) = (cov.mu, cov.nu);
    if s == 0 || s > nu {
        return vec![];
    }
    let p = cov.cover.prime();
    let nb = &cov.nucleus_basis;
    let nuc = Echelon::from_vectors(mu, p, nb);
    // complement of N in M: unit vectors at non-pivot positions of the nucleus echelon form
    let npiv = nuc.pivots();
    let comp: Vec<Vec<u32>> = (0..mu)
        .filter(|i| !npiv.contains(i))
        .map(|i| {
            let mut e = vec![0u32; mu];
            e[i] = 1;
            e
        })
        .collect();
    let combine = |coeffs: &[u32]| -> Vec<u32> {
        let mut v = vec![0u32; mu];
        for (c, b) in coeffs.iter().zip(nb) {
            for (x, y) in v.iter_mut().zip(b) {
                *x = (*x + c * y) % p;
            }
        }
        v
    };
    let mut out: Vec<Vec<Vec<u32>>> = Vec::new();
    for w in linalg::subspaces(nu, nu - s, p) {
        // complement of W inside N (coordinates relative to the nucleus basis)
        let wech = Echelon::from_vectors(nu, p, &w);
        let wpiv = wech.pivots();
        let ncomp: Vec<Vec<u32>> = (0..nu)
            .filter(|i| !wpiv.contains(i))
            .map(|i| {
                let mut e = vec![0u32; nu];
                e[i] = 1;
                combine(&e)
            })
            .collect();
        let wvecs: Vec<Vec<u32>> = w.iter().map(|c| combine(c)).collect();
        for fill in linalg::all_vectors(s * comp.len(), p) {
            let mut gens = wvecs.clone();
            for (ci, cvec) in comp.iter().enumerate() {
                let mut v = cvec.clone();
                for (k, nv) in ncomp.iter().enumerate() {
                    let f = fill[ci * s + k];
                    for (x, y) in v.iter_mut().zip(nv) {
                        *x = (*x + f * y) % p;
                    }
                }
                gens.push(v);
            }
            out.push(Echelon::from_vectors(mu, p, &gens).basis());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Allowable subgroups of step size `s` as subgroups of the covering group.
pub fn allowable_subgroups(cov: &PCover, s: usize) -> Result<Vec<Subgroup>> {
    let n = cov.base.ngens();
    let mut out = Vec::new();
    for basis in allowable_bases(cov, s) {
        let gens: Vec<Element> = basis
            .iter()
            .map(|v| {
                let mut e = vec![0u32; n + cov.mu];
                e[n..].copy_from_slice(v);
                Element(e)
            })
            .collect();
        out.push(Subgroup::closure(&cov.cover, &gens, None)?);
    }
    Ok(out)
}

/// Presentation of `G*/U` refining the parent's presentation by `s` new central generators.
pub fn descendant(cov: &PCover, u_basis: &[Vec<u32>]) -> Result<PcPresentation> {
    let g = &cov.base;
    let p = g.prime();
    let n = g.ngens();
    let ws = g.weights().expect("cover of a weighted presentation");
    let defs = g.definitions().expect("cover of a weighted presentation");
    let c = ws.iter().copied().max().unwrap_or(0);
    let mut ech = Echelon::new(cov.mu, p);
    for b in u_basis {
        ech.insert(b);
    }
    let mut chosen: Vec<RelKey> = Vec::new();
    // insertion slot of each chosen relation
    let mut slots: Vec<usize> = Vec::new();
    for (slot, &k) in (u_basis.len()..).zip(&cov.nucleus_rels) {
        let (key, v) = &cov.tails[k];
        if ech.insert(v).is_none() {
            chosen.push(*key);
            slots.push(slot);
        }
    }
    let s = chosen.len();
    let mut power: Vec<Word> = (0..n).map(|j| g.power_rhs(j).clone()).collect();
    let mut comm: Vec<Vec<Word>> = (0..n).map(|j| (0..j).map(|i| g.comm_rhs(j, i).clone()).collect()).collect();
    for (key, v) in &cov.tails {
        let coeffs = ech.solve(v).expect("tail lies in the multiplicator");
        let extra: Vec<(usize, u32)> =
            slots.iter().enumerate().filter(|(_, &sl)| coeffs[sl] != 0).map(|(k, &sl)| (n + k, coeffs[sl])).collect();
        match *key {
            RelKey::Power(j) => power[j].extend(extra),
            RelKey::Comm(j, i) => comm[j][i].extend(extra),
        }
    }
    power.extend(std::iter::repeat_n(vec![], s));
    for j in n..n + s {
        comm.push(vec![vec![]; j]);
    }
    let mut weights = ws.to_vec();
    weights.extend(std::iter::repeat_n(c + 1, s));
    let mut new_defs = defs.to_vec();
    new_defs.extend(chosen.iter().map(|k| Some(k.as_definition())));
    Ok(PcPresentation::new(p, power, comm)?.with_guard(g.guard()).with_weights(weights, new_defs))
}

/// How siblings with equal fingerprints are merged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupPolicy {
    pub iso_budget: u64,
    /// Discard descendants whose abelianization differs from the parent's.
    pub preserve_abelianization: bool,
}

impl Default for DedupPolicy {
    fn default() -> Self {
        DedupPolicy { iso_budget: DEFAULT_ISO_BUDGET / 20, preserve_abelianization: true }
    }
}

/// Counters describing how siblings were merged.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupStats {
    /// Allowable subgroups inspected.
    pub candidates: usize,
    /// Dropped because the abelianization changed.
    pub abelianization_changed: usize,
    /// Dropped by the caller's filter.
    pub filtered: usize,
    /// Merged after a successful isomorphism test.
    pub isomorphic_merges: usize,
    /// Merged because the isomorphism test ran out of budget.
    pub ambiguous_merges: usize,
    /// Equal fingerprints proven non-isomorphic.
    pub fingerprint_collisions: usize,
}

impl DedupStats {
    pub fn absorb(&mut self, o: &DedupStats) {
        self.candidates += o.candidates;
        self.abelianization_changed += o.abelianization_changed;
        self.filtered += o.filtered;
        self.isomorphic_merges += o.isomorphic_merges;
        self.ambiguous_merges += o.ambiguous_merges;
        self.fingerprint_collisions += o.fingerprint_collisions;
    }
}

/// One isomorphism class of immediate descendants.
#[derive(Clone, Debug)]
pub struct Descendant {
    pub presentation: PcPresentation,
    pub step: usize,
    /// Echelon basis of the allowable subgroup giving this representative.
    pub u_basis: Vec<Vec<u32>>,
    pub invariants: Invariants,
    /// Number of allowable subgroups merged into this class.
    pub multiplicity: usize,
    /// Whether some merge into this class was not confirmed by an isomorphism test.
    pub ambiguous: bool,
}

/// Filter applied to each candidate before its full invariants are computed.
pub type CandidateFilter<'a> = dyn Fn(&PcPresentation, &ArtinPattern) -> bool + Sync + 'a;

/// Immediate descendants of step size `s`, one per isomorphism class.
pub fn immediate_descendants(pres: &PcPresentation, s: usize, policy: &DedupPolicy) -> Result<Vec<Descendant>> {
    let cov = super::cover::p_cover(pres)?;
    Ok(descendants_of_cover(&cov, s, policy, &|_, _| true)?.0)
}

/// Immediate descendants from a precomputed cover, keeping only candidates accepted by `keep`.
///
/// The result is ordered by fingerprint and then by the echelon form of `U`.
pub fn descendants_of_cover(
    cov: &PCover,
    s: usize,
    policy: &DedupPolicy,
    keep: &CandidateFilter,
) -> Result<(Vec<Descendant>, DedupStats)> {
    let parent_ab: Option<AbelianType> = if policy.preserve_abelianization {
        Some(Abelianization::of(&cov.base)?.abelian_type().clone())
    } else {
        None
    };
    let bases = allowable_bases(cov, s);
    #[allow(clippy::large_enum_variant)]
    enum Outcome {
        Kept(PcPresentation, Vec<Vec<u32>>, Box<Invariants>),
        AbChanged,
        Filtered,
    }
    let outcomes: Vec<Outcome> = bases
        .into_par_iter()
        .map(|u| -> Result<Outcome> {
            let d = descendant(cov, &u)?;
            if let Some(ab) = &parent_ab {
                if Abelianization::of(&d)?.abelian_type() != ab {
                    return Ok(Outcome::AbChanged);
                }
            }
            let pattern = artin_pattern(&d)?;
            if !keep(&d, &pattern) {
                return Ok(Outcome::Filtered);
            }
            let inv = invariants_with_pattern(&d, pattern)?;
            Ok(Outcome::Kept(d, u, Box::new(inv)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = DedupStats { candidates: outcomes.len(), ..Default::default() };
    let mut kept: Vec<(PcPresentation, Vec<Vec<u32>>, Box<Invariants>)> = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Kept(d, u, inv) => kept.push((d, u, inv)),
            Outcome::AbChanged => stats.abelianization_changed += 1,
            Outcome::Filtered => stats.filtered += 1,
        }
    }
    kept.sort_by(|a, b| a.2.fingerprint.cmp(&b.2.fingerprint).then_with(|| a.1.cmp(&b.1)));
    let mut out: Vec<Descendant> = Vec::new();
    for (d, u, inv) in kept {
        let mut merged = false;
        for rep in out.iter_mut().rev() {
            if rep.invariants.fingerprint != inv.fingerprint {
                break;
            }
            match iso_test(&rep.presentation, &d, policy.iso_budget) {
                Ok(true) => {
                    stats.isomorphic_merges += 1;
                }
                Ok(false) => {
                    stats.fingerprint_collisions += 1;
                    continue;
                }
                Err(Error::Undecided(_)) => {
                    stats.ambiguous_merges += 1;
                    rep.ambiguous = true;
                }
                Err(e) => return Err(e),
            }
            rep.multiplicity += 1;
            merged = true;
            break;
        }
        if !merged {
            out.push(Descendant { presentation: d, step: s, u_basis: u, invariants: *inv, multiplicity: 1, ambiguous: false });
        }
    }
    Ok((out, stats))
}
