//! The p-covering group, p-multiplicator and nucleus.

use crate::error::{Error, Result};
use crate::linalg::{self, Echelon};
use crate::pcgroup::{Definition, Element, PcPresentation, Subgroup, Word};

/// A relation of a presentation: `a_j^p` or `[a_j, a_i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelKey {
    Power(usize),
    Comm(usize, usize),
}

impl RelKey {
    pub fn as_definition(self) -> Definition {
        match self {
            RelKey::Power(j) => Definition::Power(j),
            RelKey::Comm(j, i) => Definition::Commutator(j, i),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PCover {
    /// The p-covering group: the base generators followed by `mu` multiplicator generators.
    pub cover: PcPresentation,
    pub base: PcPresentation,
    pub multiplicator: Subgroup,
    pub nucleus: Subgroup,
    pub mu: usize,
    pub nu: usize,
    /// Relations carrying tails, with their tail vectors in multiplicator coordinates.
    pub(crate) tails: Vec<(RelKey, Vec<u32>)>,
    /// Indices into `tails` of the relations spanning the nucleus.
    pub(crate) nucleus_rels: Vec<usize>,
    /// Basis of the nucleus in multiplicator coordinates.
    pub(crate) nucleus_basis: Vec<Vec<u32>>,
}

fn with_tail(rhs: &Word, tail: &[(usize, u32)]) -> Word {
    let mut w = rhs.clone();
    w.extend(tail.iter().copied().filter(|&(_, e)| e != 0));
    w
}

/// Computes the p-covering group of a presentation with weights and exact definitions.
pub fn p_cover(pres: &PcPresentation) -> Result<PCover> {
    let defs = pres.definitions().ok_or(Error::NotStandard)?;
    let ws = pres.weights().ok_or(Error::NotStandard)?;
    let p = pres.prime();
    let n = pres.ngens();
    let c = ws.iter().copied().max().unwrap_or(0);
    let is_def = |k: RelKey| defs.iter().any(|d| *d == Some(k.as_definition()));
    let mut keys = Vec::new();
    for j in 0..n {
        if !is_def(RelKey::Power(j)) {
            keys.push(RelKey::Power(j));
        }
        for i in 0..j {
            if !is_def(RelKey::Comm(j, i)) {
                keys.push(RelKey::Comm(j, i));
            }
        }
    }
    let t = keys.len();
    // presentation with one free central tail per relation
    let mut power: Vec<Word> = (0..n).map(|j| pres.power_rhs(j).clone()).collect();
    let mut comm: Vec<Vec<Word>> = (0..n).map(|j| (0..j).map(|i| pres.comm_rhs(j, i).clone()).collect()).collect();
    for (k, key) in keys.iter().enumerate() {
        match *key {
            RelKey::Power(j) => power[j].push((n + k, 1)),
            RelKey::Comm(j, i) => comm[j][i].push((n + k, 1)),
        }
    }
    power.extend(std::iter::repeat_n(vec![], t));
    for j in n..n + t {
        comm.push(vec![vec![]; j]);
    }
    let ext = PcPresentation::new(p, power, comm)?.with_guard(pres.guard());
    let mut rels = Echelon::new(t, p);
    for (l, r) in ext.overlap_results_upto(n)? {
        if l.0[..n] != r.0[..n] {
            return Err(Error::Inconsistent);
        }
        let diff: Vec<u32> = (n..n + t).map(|g| (l.0[g] + p - r.0[g]) % p).collect();
        if !linalg::is_zero(&diff) {
            rels.insert(&diff);
        }
    }
    let pivots = rels.pivots();
    let free: Vec<usize> = (0..t).filter(|k| !pivots.contains(k)).collect();
    let mu = free.len();
    let tail_vec = |k: usize| -> Vec<u32> {
        let mut e = vec![0u32; t];
        e[k] = 1;
        let r = rels.reduce(&e);
        free.iter().map(|&f| r[f]).collect()
    };
    let tails: Vec<(RelKey, Vec<u32>)> = keys.iter().enumerate().map(|(k, &key)| (key, tail_vec(k))).collect();
    // the covering group itself
    let mut power: Vec<Word> = (0..n).map(|j| pres.power_rhs(j).clone()).collect();
    let mut comm: Vec<Vec<Word>> = (0..n).map(|j| (0..j).map(|i| pres.comm_rhs(j, i).clone()).collect()).collect();
    for (key, v) in &tails {
        let tw: Vec<(usize, u32)> = v.iter().enumerate().map(|(f, &e)| (n + f, e)).collect();
        match *key {
            RelKey::Power(j) => power[j] = with_tail(&power[j], &tw),
            RelKey::Comm(j, i) => comm[j][i] = with_tail(&comm[j][i], &tw),
        }
    }
    power.extend(std::iter::repeat_n(vec![], mu));
    for j in n..n + mu {
        comm.push(vec![vec![]; j]);
    }
    let cover = PcPresentation::new(p, power, comm)?.with_guard(pres.guard());
    let nucleus_rels: Vec<usize> = tails
        .iter()
        .enumerate()
        .filter(|(_, (key, _))| match *key {
            RelKey::Power(j) => ws[j] == c,
            RelKey::Comm(j, i) => ws[j] == c && ws[i] == 1,
        })
        .map(|(k, _)| k)
        .collect();
    let nuc = Echelon::from_vectors(mu, p, &nucleus_rels.iter().map(|&k| tails[k].1.clone()).collect::<Vec<_>>());
    let nu = nuc.rank();
    let nucleus_basis = nuc.basis();
    let embed = |v: &[u32]| -> Element {
        let mut e = vec![0u32; n + mu];
        e[n..].copy_from_slice(v);
        Element(e)
    };
    let multiplicator = Subgroup::closure(&cover, &(n..n + mu).map(|g| cover.gen(g)).collect::<Vec<_>>(), None)?;
    let nucleus = Subgroup::closure(&cover, &nucleus_basis.iter().map(|v| embed(v)).collect::<Vec<_>>(), None)?;
    Ok(PCover { cover, base: pres.clone(), multiplicator, nucleus, mu, nu, tails, nucleus_rels, nucleus_basis })
}
