//! Covers of metabelian groups, the Shafarevich rank window and tower-length inference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

use crate::artin::{tkt_canonical, Tkt};
use crate::error::{Error, Result};
use crate::pcgroup::iso::{inverting_automorphism_exists, iso_test, DEFAULT_ISO_BUDGET};
use crate::pcgroup::{derived_series, fingerprint, quotient, Fingerprint, PcPresentation};
use crate::pgen::{DescendantTree, TreeNode};

/// Arithmetic data of the base field relevant to the relation rank of tower groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldContext {
    /// Torsion-free Dirichlet unit rank `r`.
    pub unit_rank: usize,
    pub contains_zeta_p: bool,
    /// Whether the ramification set is empty (always the case for Hilbert towers).
    pub s_empty: bool,
    /// p-class rank `ρ` of the field, when known.
    pub p_class_rank: Option<usize>,
}

impl FieldContext {
    pub fn real_quadratic() -> Self {
        FieldContext { unit_rank: 1, contains_zeta_p: false, s_empty: true, p_class_rank: Some(2) }
    }

    pub fn complex_quadratic() -> Self {
        FieldContext { unit_rank: 0, contains_zeta_p: false, s_empty: true, p_class_rank: Some(2) }
    }

    pub fn custom(unit_rank: usize, contains_zeta_p: bool) -> Self {
        FieldContext { unit_rank, contains_zeta_p, s_empty: true, p_class_rank: None }
    }

    /// Parses `real-quadratic`, `complex-quadratic` or `custom(r,zeta)` with zeta `true`/`false`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "real-quadratic" | "real" => return Ok(Self::real_quadratic()),
            "complex-quadratic" | "complex" | "imaginary-quadratic" => return Ok(Self::complex_quadratic()),
            _ => {}
        }
        let inner = s
            .strip_prefix("custom(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("unknown field context '{s}'")))?;
        let mut parts = inner.split(',').map(str::trim);
        let r = parts
            .next()
            .and_then(|x| x.parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("bad unit rank in '{s}'")))?;
        let z = match parts.next() {
            Some("true") | Some("1") => true,
            Some("false") | Some("0") | None => false,
            Some(o) => return Err(Error::Parse(format!("bad zeta flag '{o}'"))),
        };
        Ok(Self::custom(r, z))
    }

    /// The excess `n` with `d2 - d1 <= n` for tower groups over this field.
    pub fn rank_excess(&self) -> usize {
        if self.s_empty && self.contains_zeta_p {
            self.unit_rank + 1
        } else {
            self.unit_rank
        }
    }
}

/// Allowed interval for the relation rank `d2` of a tower group with generator rank `d1`.
pub fn shafarevich_bound(ctx: &FieldContext, d1: usize) -> RangeInclusive<usize> {
    d1..=d1 + ctx.rank_excess()
}

/// Whether the Golod–Shafarevich inequality `d2 > d1^2/4` fails, which rules out a finite tower
/// group with these ranks. Advisory only.
pub fn gs_infinite_test(d1: usize, d2: usize) -> bool {
    4 * d2 <= d1 * d1
}

/// Whether some automorphism of the group acts as inversion on its abelianization.
pub fn gi_automorphism_exists(pres: &PcPresentation) -> Result<bool> {
    inverting_automorphism_exists(pres, DEFAULT_ISO_BUDGET)
}

/// Number of total kernels in a layer-1 kernel type.
pub fn capitulation_number(kappa: &Tkt) -> usize {
    kappa.capitulation_number()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverMember {
    pub label: String,
    pub order_exponent: usize,
    pub class: usize,
    pub coclass: usize,
    pub derived_length: usize,
    /// p-multiplicator rank, used as the relation rank.
    pub mu: usize,
    pub nu: usize,
    pub fingerprint: Fingerprint,
    /// Set when the metabelianization matched by fingerprint but the isomorphism test ran out of budget.
    pub ambiguous: bool,
}

impl CoverMember {
    fn of(v: &TreeNode, ambiguous: bool) -> Self {
        CoverMember {
            label: v.label.clone(),
            order_exponent: v.order_exponent,
            class: v.class,
            coclass: v.coclass,
            derived_length: v.derived_length,
            mu: v.mu,
            nu: v.nu,
            fingerprint: v.fingerprint.clone(),
            ambiguous,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    pub metabelian_anchor: String,
    pub members: Vec<CoverMember>,
    /// The underlying tree has capable vertices that were not expanded.
    pub truncated: bool,
    /// Members removed by a rank window, with the reason.
    pub excluded: Vec<(String, String)>,
}

impl CoverResult {
    pub fn labels(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.members.iter().any(|m| m.label == label)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Second derived quotient `H/H''`.
pub fn metabelianization(pres: &PcPresentation) -> Result<PcPresentation> {
    let ds = derived_series(pres)?;
    if ds.len() <= 3 {
        return Ok(pres.clone());
    }
    quotient(pres, &ds[2])
}

/// All tree vertices up to order `p^max_order` whose second derived quotient is isomorphic to the anchor.
pub fn cover(anchor: &str, tree: &DescendantTree, max_order: usize) -> Result<CoverResult> {
    let a = tree.node(anchor)?;
    if !a.is_metabelian() {
        return Err(Error::NotMetabelian(a.derived_length));
    }
    let a_tkt = tkt_canonical(&a.tkt);
    let mut a_tau = a.tau1.clone();
    a_tau.sort();
    // layer-1 data of H equals that of H/H'', so it is a safe prefilter
    let candidates: Vec<&TreeNode> = tree
        .nodes
        .iter()
        .filter(|v| v.order_exponent >= a.order_exponent && v.order_exponent <= max_order)
        .filter(|v| v.fingerprint.abelianization == a.fingerprint.abelianization)
        .filter(|v| tkt_canonical(&v.tkt) == a_tkt)
        .filter(|v| {
            let mut t = v.tau1.clone();
            t.sort();
            t == a_tau
        })
        .collect();
    let matched: Vec<Option<CoverMember>> = candidates
        .par_iter()
        .map(|v| -> Result<Option<CoverMember>> {
            if v.label == a.label {
                return Ok(Some(CoverMember::of(v, false)));
            }
            if v.is_metabelian() {
                // a metabelian vertex is its own metabelianization and vertices of a tree are pairwise distinct
                if v.fingerprint != a.fingerprint {
                    return Ok(None);
                }
                return match iso_test(&v.presentation, &a.presentation, DEFAULT_ISO_BUDGET) {
                    Ok(b) => Ok(b.then(|| CoverMember::of(v, false))),
                    Err(Error::Undecided(_)) => Ok(Some(CoverMember::of(v, true))),
                    Err(e) => Err(e),
                };
            }
            let q = metabelianization(&v.presentation)?;
            if q.ngens() != a.order_exponent || fingerprint(&q)? != a.fingerprint {
                return Ok(None);
            }
            match iso_test(&q, &a.presentation, DEFAULT_ISO_BUDGET) {
                Ok(b) => Ok(b.then(|| CoverMember::of(v, false))),
                Err(Error::Undecided(_)) => Ok(Some(CoverMember::of(v, true))),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let members: Vec<CoverMember> = matched.into_iter().flatten().collect();
    let truncated = tree.nodes.iter().any(|v| v.is_capable() && !v.expanded && v.order_exponent <= max_order)
        || (max_order > tree.max_order && tree.truncated);
    Ok(CoverResult { metabelian_anchor: a.label.clone(), members, truncated, excluded: vec![] })
}

/// Members whose relation rank (taken as the p-multiplicator rank) lies in `[d1, d1 + n]`.
pub fn n_cover(cov: &CoverResult, n: usize) -> CoverResult {
    let mut out = cov.clone();
    out.members.clear();
    for m in &cov.members {
        let d1 = m.fingerprint.abelianization.rank();
        if m.mu < d1 {
            out.excluded.push((m.label.clone(), format!("mu(H)={} < d1={d1}", m.mu)));
        } else if m.mu > d1 + n {
            out.excluded.push((m.label.clone(), format!("excluded because mu(H)={} > bound {}", m.mu, d1 + n)));
        } else {
            out.members.push(m.clone());
        }
    }
    out
}

/// The cover restricted to the rank window allowed by the field context.
pub fn shafarevich_cover(cov: &CoverResult, ctx: &FieldContext) -> CoverResult {
    n_cover(cov, ctx.rank_excess())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLength {
    pub lower_bound: usize,
    /// The length, when every candidate has the same derived length.
    pub exact: Option<usize>,
    /// Smallest and largest derived length among candidates.
    pub dl_range: (usize, usize),
    pub anchor_excluded: bool,
    /// The candidate set comes from a truncated tree.
    pub truncated: bool,
}

/// Tower length from the surviving candidates: the length of the tower equals the derived length
/// of its group.
pub fn tower_length_inference(candidates: &CoverResult) -> Result<TowerLength> {
    if candidates.members.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let lo = candidates.members.iter().map(|m| m.derived_length).min().expect("nonempty");
    let hi = candidates.members.iter().map(|m| m.derived_length).max().expect("nonempty");
    let anchor_excluded = !candidates.contains(&candidates.metabelian_anchor);
    let lower_bound = if anchor_excluded { lo.max(3) } else { lo };
    Ok(TowerLength {
        lower_bound,
        exact: (lo == hi).then_some(lo),
        dl_range: (lo, hi),
        anchor_excluded,
        truncated: candidates.truncated,
    })
}
