//! Brute-force oracles and cached trees shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::sync::{Mutex, OnceLock};

use pgtower::artin::tkt_by_name;
use pgtower::pcgroup::{AbelianType, Element, PcPresentation};
use pgtower::pgen::{build_tree, coclass_two_root, DescendantTree, PruneSpec, TreeMode, TreeOptions};

pub type Vecp = Vec<u32>;

/// `v := v * g_i` by pushing `g_i` left through the tail and conjugating the tail.
/// Uses only the defining relations, independently of the engine's collector.
pub fn naive_mul_gen(pres: &PcPresentation, v: &mut Vecp, i: usize) {
    let n = v.len();
    let tail: Vec<(usize, u32)> = (i + 1..n).filter(|&j| v[j] > 0).map(|j| (j, v[j])).collect();
    for x in v.iter_mut().skip(i + 1) {
        *x = 0;
    }
    v[i] += 1;
    if v[i] == pres.prime() {
        v[i] = 0;
        for &(k, e) in pres.power_rhs(i).iter() {
            for _ in 0..e {
                naive_mul_gen(pres, v, k);
            }
        }
    }
    // g_j^{g_i} = g_j [g_j, g_i]
    for (j, e) in tail {
        for _ in 0..e {
            naive_mul_gen(pres, v, j);
            for &(k, f) in pres.comm_rhs(j, i).iter() {
                for _ in 0..f {
                    naive_mul_gen(pres, v, k);
                }
            }
        }
    }
}

pub fn naive_mul(pres: &PcPresentation, x: &[u32], y: &[u32]) -> Vecp {
    let mut v = x.to_vec();
    for (j, &e) in y.iter().enumerate() {
        for _ in 0..e {
            naive_mul_gen(pres, &mut v, j);
        }
    }
    v
}

pub fn all_elements(pres: &PcPresentation) -> Vec<Vecp> {
    let p = pres.prime();
    let n = pres.ngens();
    let total = (p as usize).pow(n as u32);
    (0..total)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = (k % p as usize) as u32;
                    k /= p as usize;
                    d
                })
                .collect()
        })
        .collect()
}

/// Full multiplication table by the naive collector, indexed by element vectors.
pub struct Table {
    pub elems: Vec<Vecp>,
    pub index: HashMap<Vecp, usize>,
    pub mul: Vec<Vec<usize>>,
}

impl Table {
    pub fn new(pres: &PcPresentation) -> Self {
        let elems = all_elements(pres);
        let index: HashMap<Vecp, usize> = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let mul = elems.iter().map(|x| elems.iter().map(|y| index[&naive_mul(pres, x, y)]).collect()).collect();
        Table { elems, index, mul }
    }

    pub fn identity(&self) -> usize {
        self.index[&vec![0; self.elems[0].len()]]
    }

    pub fn inv(&self, x: usize) -> usize {
        let e = self.identity();
        (0..self.elems.len()).find(|&y| self.mul[x][y] == e).expect("inverse")
    }

    pub fn comm(&self, x: usize, y: usize) -> usize {
        let xy = self.mul[x][y];
        let yx = self.mul[y][x];
        self.mul[self.inv(yx)][xy]
    }

    pub fn pow(&self, x: usize, k: u64) -> usize {
        let mut r = self.identity();
        for _ in 0..k {
            r = self.mul[r][x];
        }
        r
    }

    /// Closure of `seeds` under multiplication (a subgroup in a finite group).
    pub fn closure(&self, seeds: &[usize]) -> HashSet<usize> {
        let mut set: HashSet<usize> = HashSet::from([self.identity()]);
        let mut frontier: Vec<usize> = vec![self.identity()];
        while let Some(x) = frontier.pop() {
            for &s in seeds {
                let y = self.mul[x][s];
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    /// Derived subgroup of the subgroup `h` (given as a set).
    pub fn derived_of(&self, h: &[usize]) -> HashSet<usize> {
        let mut cs: Vec<usize> = Vec::new();
        for &a in h {
            for &b in h {
                cs.push(self.comm(a, b));
            }
        }
        cs.sort_unstable();
        cs.dedup();
        self.closure(&cs)
    }

    /// Abelian type of `H/K` for `K ⊆ H` normal with abelian quotient, by counting `p^k`-torsion.
    pub fn quotient_type(&self, p: u32, h: &[usize], k: &HashSet<usize>) -> AbelianType {
        let order_q = h.len() / k.len();
        let mut logs = vec![0u32];
        let mut k_exp = 1u64;
        loop {
            k_exp *= p as u64;
            let cnt = h.iter().filter(|&&x| k.contains(&self.pow(x, k_exp))).count() / k.len();
            logs.push(ilog(cnt, p));
            if cnt == order_q {
                break;
            }
        }
        type_from_torsion(&logs)
    }
}

pub fn ilog(mut n: usize, p: u32) -> u32 {
    let mut k = 0;
    while n > 1 {
        assert_eq!(n % p as usize, 0);
        n /= p as usize;
        k += 1;
    }
    k
}

/// From `t_k = log_p |Q[p^k]|` recovers the type: the number of invariants `>= k` is `t_k - t_{k-1}`.
pub fn type_from_torsion(t: &[u32]) -> AbelianType {
    let ge: Vec<u32> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let mut exps = Vec::new();
    for k in 0..ge.len() {
        let next = ge.get(k + 1).copied().unwrap_or(0);
        for _ in 0..(ge[k] - next) {
            exps.push(k as u32 + 1);
        }
    }
    AbelianType::new(exps)
}

/// Homomorphisms `G -> Z/p` as exponent functionals satisfying the defining relations.
pub fn homs_to_cp(pres: &PcPresentation) -> Vec<Vecp> {
    let p = pres.prime();
    let n = pres.ngens();
    let eval = |c: &[u32], w: &[(usize, u32)]| -> u32 { w.iter().map(|&(k, e)| c[k] * e).sum::<u32>() % p };
    all_elements(pres)
        .into_iter()
        .filter(|c| {
            (0..n).all(|i| eval(c, pres.power_rhs(i)) == 0)
                && (0..n).all(|j| (0..j).all(|i| eval(c, pres.comm_rhs(j, i)) == 0))
        })
        .collect()
}

/// Maximal subgroups as element-index sets, one per kernel of a nonzero hom to `Z/p`.
pub fn maximal_subgroups(pres: &PcPresentation, t: &Table) -> Vec<Vec<usize>> {
    let p = pres.prime();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    for c in homs_to_cp(pres).into_iter().filter(|c| c.iter().any(|&x| x != 0)) {
        let mut h: Vec<usize> = (0..t.elems.len())
            .filter(|&i| t.elems[i].iter().zip(&c).map(|(a, b)| a * b).sum::<u32>() % p == 0)
            .collect();
        h.sort_unstable();
        if seen.insert(h.clone()) {
            out.push(h);
        }
    }
    out
}

/// Transfer `G -> H/H'` from its coset definition; returns the kernel as a set of elements.
pub fn transfer_kernel(t: &Table, h: &[usize], h_derived: &HashSet<usize>) -> HashSet<usize> {
    let hs: HashSet<usize> = h.iter().copied().collect();
    let reps = transversal(t, &hs);
    let coset_of = |x: usize| -> usize { reps.iter().position(|&r| hs.contains(&t.mul[x][t.inv(r)])).expect("coset") };
    (0..t.elems.len())
        .filter(|&g| {
            let mut prod = t.identity();
            for &r in &reps {
                let rg = t.mul[r][g];
                let s = reps[coset_of(rg)];
                prod = t.mul[prod][t.mul[rg][t.inv(s)]];
            }
            h_derived.contains(&prod)
        })
        .collect()
}

/// Right coset representatives of `H` in `G`.
pub fn transversal(t: &Table, hs: &HashSet<usize>) -> Vec<usize> {
    let mut reps: Vec<usize> = Vec::new();
    for x in 0..t.elems.len() {
        if reps.iter().all(|&r| !hs.contains(&t.mul[x][t.inv(r)])) {
            reps.push(x);
        }
    }
    reps
}

pub fn element(v: &[u32]) -> Element {
    Element(v.to_vec())
}

/// `C3 x C3` and its tree up to order `3^5`.
pub fn bootstrap() -> &'static DescendantTree {
    static T: OnceLock<DescendantTree> = OnceLock::new();
    T.get_or_init(|| {
        let g = PcPresentation::elementary_abelian(3, 2).unwrap();
        build_tree(&g, &TreeOptions::new("R", 5)).unwrap()
    })
}

/// Tree rooted at the order-`3^5` coclass-2 vertex of the named kernel type, pruned to that type.
pub fn pruned(name: &str, max_order: usize) -> &'static DescendantTree {
    static CACHE: OnceLock<Mutex<HashMap<(String, usize), &'static DescendantTree>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(t) = guard.get(&(name.to_string(), max_order)) {
        return t;
    }
    let k = tkt_by_name(name).unwrap();
    let root = coclass_two_root(3, &k).unwrap();
    let mut opts = TreeOptions::new("R", max_order);
    opts.prune = PruneSpec::by_tkt(k, 0);
    let tree: &'static DescendantTree = Box::leak(Box::new(build_tree(&root.presentation, &opts).unwrap()));
    guard.insert((name.to_string(), max_order), tree);
    tree
}

/// Coclass-2 tree (step size 1 only, no kernel-type pruning) of the named root.
pub fn coclass_tree(name: &str, max_order: usize) -> DescendantTree {
    let k = tkt_by_name(name).unwrap();
    let root = coclass_two_root(3, &k).unwrap();
    let mut opts = TreeOptions::new("R", max_order);
    opts.mode = TreeMode::Coclass;
    opts.prune.max_coclass = Some(2);
    build_tree(&root.presentation, &opts).unwrap()
}

/// Every group of order at most `3^5` used by the tests: the bootstrap tree plus abelian groups.
pub fn small_corpus() -> Vec<(String, PcPresentation)> {
    let mut out: Vec<(String, PcPresentation)> =
        bootstrap().nodes.iter().map(|v| (v.label.clone(), v.presentation.clone())).collect();
    for exps in [vec![1], vec![2], vec![1, 1, 1], vec![2, 1], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![3, 2]] {
        out.push((format!("abelian{exps:?}"), PcPresentation::abelian(3, &exps).unwrap()));
    }
    out
}
