//! Breadth-first descendant trees with pruning.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

use super::cover::p_cover;
use super::descendants::{descendants_of_cover, DedupPolicy, DedupStats};
use crate::artin::{tkt_canonical, tkt_name, ArtinPattern, Tkt};
use crate::error::{Error, Result};
use crate::pcgroup::{fingerprint::invariants, AbelianType, Fingerprint, Invariants, PcPresentation};

/// Which step sizes are followed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeMode {
    /// Every step size up to the nuclear rank.
    Full,
    /// Step size 1 only (coclass trees).
    Coclass,
}

/// Pruning rule evaluated on the layer-1 data of each candidate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct PruneSpec {
    /// Keep only descendants whose kernel type is equivalent to this one.
    pub tkt: Option<Tkt>,
    /// The kernel-type rule applies from this order exponent on.
    pub tkt_from_order: usize,
    /// Keep only descendants whose layer-1 targets are dominated by these (see [`tau_dominates`]).
    pub tau1_ceiling: Option<Vec<AbelianType>>,
    pub max_coclass: Option<usize>,
    /// Discard every descendant.
    pub keep_none: bool,
}

impl PruneSpec {
    pub fn keep_all() -> Self {
        PruneSpec::default()
    }

    pub fn keep_none() -> Self {
        PruneSpec { keep_none: true, ..Default::default() }
    }

    pub fn by_tkt(tkt: Tkt, from_order: usize) -> Self {
        PruneSpec { tkt: Some(tkt_canonical(&tkt)), tkt_from_order: from_order, ..Default::default() }
    }

    pub fn keeps(&self, order_exponent: usize, coclass: usize, pattern: &ArtinPattern) -> bool {
        if self.keep_none {
            return false;
        }
        if self.max_coclass.is_some_and(|m| coclass > m) {
            return false;
        }
        if let Some(t) = &self.tkt {
            if order_exponent >= self.tkt_from_order && tkt_canonical(&pattern.tkt()) != *t {
                return false;
            }
        }
        if let Some(ceiling) = &self.tau1_ceiling {
            if pattern.v >= 1 && !tau_dominates(ceiling, &pattern.tau_ordered[1]) {
                return false;
            }
        }
        true
    }

    pub fn describe(&self) -> String {
        if self.keep_none {
            return "keep nothing".into();
        }
        let mut parts = Vec::new();
        if let Some(t) = &self.tkt {
            parts.push(format!("tkt ~ {t} from order p^{}", self.tkt_from_order));
        }
        if let Some(f) = &self.tau1_ceiling {
            let s: Vec<String> = f.iter().map(|t| t.digits()).collect();
            parts.push(format!("tau1 dominated by [{}]", s.join(",")));
        }
        if let Some(m) = self.max_coclass {
            parts.push(format!("coclass <= {m}"));
        }
        if parts.is_empty() {
            "keep all".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Whether `a` and `b` are componentwise comparable with `a >= b` for some pairing of the entries.
///
/// Layer-1 targets of a parent are quotients of the corresponding targets of its children, so every
/// ancestor of a group with targets `a` is dominated by `a`.
pub fn tau_dominates(a: &[AbelianType], b: &[AbelianType]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    fn covers(x: &AbelianType, y: &AbelianType) -> bool {
        // x maps onto y: compare partitions componentwise, largest parts first
        let mut xs = x.0.clone();
        let mut ys = y.0.clone();
        xs.sort_unstable_by(|a, b| b.cmp(a));
        ys.sort_unstable_by(|a, b| b.cmp(a));
        ys.len() <= xs.len() && ys.iter().zip(&xs).all(|(b, a)| a >= b)
    }
    fn assign(a: &[AbelianType], b: &[AbelianType], used: &mut Vec<bool>, i: usize) -> bool {
        if i == b.len() {
            return true;
        }
        for j in 0..a.len() {
            if !used[j] && covers(&a[j], &b[i]) {
                used[j] = true;
                if assign(a, b, used, i + 1) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    assign(a, b, &mut vec![false; a.len()], 0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeOptions {
    pub root_label: String,
    /// Largest order exponent of a vertex.
    pub max_order: usize,
    pub mode: TreeMode,
    pub prune: PruneSpec,
    pub dedup: DedupPolicy,
    /// Stop expanding once this many vertices exist.
    pub max_nodes: Option<usize>,
}

impl TreeOptions {
    pub fn new(root_label: &str, max_order: usize) -> Self {
        TreeOptions {
            root_label: root_label.into(),
            max_order,
            mode: TreeMode::Full,
            prune: PruneSpec::keep_all(),
            dedup: DedupPolicy::default(),
            max_nodes: None,
        }
    }
}

/// A vertex with its cached invariants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeNode {
    pub label: String,
    pub presentation: PcPresentation,
    pub parent: Option<String>,
    pub step: usize,
    pub order_exponent: usize,
    pub class: usize,
    pub coclass: usize,
    pub derived_length: usize,
    pub center_type: AbelianType,
    pub fingerprint: Fingerprint,
    /// Layer-1 kernel type in subgroup order.
    pub tkt: Tkt,
    pub tkt_name: Option<String>,
    /// Layer-1 targets in subgroup order.
    pub tau1: Vec<AbelianType>,
    /// `(τ0(H), τ1(H))` for each layer-1 subgroup `H`, in subgroup order.
    pub ipad2: Vec<(AbelianType, Vec<AbelianType>)>,
    pub mu: usize,
    pub nu: usize,
    pub mainline: bool,
    /// Whether the children of this vertex were computed.
    pub expanded: bool,
    pub children: Vec<String>,
    /// Number of allowable subgroups giving this vertex.
    pub multiplicity: usize,
    pub ambiguous: bool,
}

impl TreeNode {
    fn from_invariants(
        label: String,
        pres: PcPresentation,
        parent: Option<String>,
        step: usize,
        inv: &Invariants,
    ) -> Result<Self> {
        let cov = p_cover(&pres)?;
        let tkt = inv.pattern.tkt();
        Ok(TreeNode {
            label,
            order_exponent: pres.ngens(),
            parent,
            step,
            class: inv.series.class,
            coclass: inv.series.coclass,
            derived_length: inv.series.derived_length,
            center_type: inv.series.center_type.clone(),
            fingerprint: inv.fingerprint.clone(),
            tkt_name: tkt_name(&tkt).map(|n| n.name),
            tkt,
            tau1: inv.pattern.tau_ordered.get(1).cloned().unwrap_or_default(),
            ipad2: inv.ipad2.entries.iter().map(|(t0, t1)| (t0.clone(), t1.items().to_vec())).collect(),
            mu: cov.mu,
            nu: cov.nu,
            presentation: pres,
            mainline: false,
            expanded: false,
            children: vec![],
            multiplicity: 1,
            ambiguous: false,
        })
    }

    pub fn is_metabelian(&self) -> bool {
        self.derived_length <= 2
    }

    pub fn is_capable(&self) -> bool {
        self.nu > 0
    }

    /// Order-insensitive second-order IPAD.
    pub fn ipad2_multiset(&self) -> Vec<(AbelianType, Vec<AbelianType>)> {
        let mut v: Vec<(AbelianType, Vec<AbelianType>)> = self
            .ipad2
            .iter()
            .map(|(t0, t1)| {
                let mut t = t1.clone();
                t.sort();
                (t0.clone(), t)
            })
            .collect();
        v.sort();
        v
    }
}

/// Outcome of sibling merging across the whole tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupRecord {
    pub policy: DedupPolicy,
    pub stats: DedupStats,
    /// Labels of vertices that absorbed an unconfirmed merge.
    pub ambiguous: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescendantTree {
    pub root: String,
    /// Vertices in breadth-first order.
    pub nodes: Vec<TreeNode>,
    pub prune: String,
    pub prune_spec: PruneSpec,
    pub mode: TreeMode,
    pub max_order: usize,
    pub dedup: DedupRecord,
    /// Set when a capable vertex was left unexpanded.
    pub truncated: bool,
    /// Set when `max_nodes` stopped the expansion before `max_order` was reached.
    #[serde(default)]
    pub budget_exhausted: bool,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl DescendantTree {
    fn reindex(&mut self) {
        self.index = self.nodes.iter().enumerate().map(|(i, n)| (n.label.clone(), i)).collect();
    }

    pub fn get(&self, label: &str) -> Option<&TreeNode> {
        self.index.get(label).map(|&i| &self.nodes[i])
    }

    pub fn node(&self, label: &str) -> Result<&TreeNode> {
        self.get(label).ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn root_node(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn children(&self, label: &str) -> Vec<&TreeNode> {
        self.get(label).map(|n| n.children.iter().filter_map(|c| self.get(c)).collect()).unwrap_or_default()
    }

    pub fn edges(&self) -> Vec<(&str, &str)> {
        self.nodes.iter().filter_map(|n| n.parent.as_deref().map(|p| (p, n.label.as_str()))).collect()
    }

    /// All vertices in the subtree below `label`, including it.
    pub fn subtree(&self, label: &str) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![label.to_string()];
        while let Some(l) = stack.pop() {
            if let Some(n) = self.get(&l) {
                stack.extend(n.children.iter().rev().cloned());
                out.push(n);
            }
        }
        out
    }

    /// Vertices at the given order exponent.
    pub fn at_order(&self, n: usize) -> Vec<&TreeNode> {
        self.nodes.iter().filter(|v| v.order_exponent == n).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let mut t: DescendantTree = serde_json::from_str(s)?;
        t.reindex();
        for n in &t.nodes {
            if let Some(p) = &n.parent {
                if t.get(p).is_none() {
                    return Err(Error::Malformed(format!("parent {p} of {} missing", n.label)));
                }
            }
        }
        Ok(t)
    }
}

/// Builds the tree of descendants of `root` breadth first.
pub fn build_tree(root: &PcPresentation, opts: &TreeOptions) -> Result<DescendantTree> {
    // standardizing works with normal forms, which are meaningless for an inconsistent input
    if !root.consistency_check() {
        return Err(Error::Inconsistent);
    }
    let root = crate::pcgroup::ensure_standard(root)?;
    let inv = invariants(&root)?;
    let root_node = TreeNode::from_invariants(opts.root_label.clone(), root, None, 0, &inv)?;
    let mut tree = DescendantTree {
        root: opts.root_label.clone(),
        nodes: vec![root_node],
        prune: opts.prune.describe(),
        prune_spec: opts.prune.clone(),
        mode: opts.mode,
        max_order: opts.max_order,
        dedup: DedupRecord { policy: opts.dedup.clone(), ..Default::default() },
        truncated: false,
        budget_exhausted: false,
        index: HashMap::new(),
    };
    let mut next = 0;
    while next < tree.nodes.len() {
        let i = next;
        next += 1;
        let (n, nu, class) = {
            let v = &tree.nodes[i];
            (v.order_exponent, v.nu, v.class)
        };
        if nu == 0 || n >= opts.max_order {
            continue;
        }
        if opts.max_nodes.is_some_and(|m| tree.nodes.len() >= m) {
            tree.budget_exhausted = true;
            continue;
        }
        let max_step = match opts.mode {
            TreeMode::Coclass => 1,
            TreeMode::Full => nu.min(opts.max_order - n),
        };
        let cov = p_cover(&tree.nodes[i].presentation)?;
        let parent_label = tree.nodes[i].label.clone();
        let mut new_nodes = Vec::new();
        for s in 1..=max_step {
            let child_order = n + s;
            let coclass = child_order - (class + 1);
            let keep = |_: &PcPresentation, pat: &ArtinPattern| opts.prune.keeps(child_order, coclass, pat);
            let (ds, stats) = descendants_of_cover(&cov, s, &opts.dedup, &keep)?;
            tree.dedup.stats.absorb(&stats);
            for (k, d) in ds.into_iter().enumerate() {
                let label = format!("{parent_label}-#{s};{}", k + 1);
                let mut node =
                    TreeNode::from_invariants(label.clone(), d.presentation, Some(parent_label.clone()), s, &d.invariants)?;
                node.multiplicity = d.multiplicity;
                node.ambiguous = d.ambiguous;
                if d.ambiguous {
                    tree.dedup.ambiguous.push(label);
                }
                new_nodes.push(node);
            }
        }
        tree.nodes[i].expanded = true;
        tree.nodes[i].children = new_nodes.iter().map(|c| c.label.clone()).collect();
        tree.nodes.extend(new_nodes);
    }
    tree.truncated |= tree.nodes.iter().any(|v| v.is_capable() && !v.expanded);
    tree.reindex();
    mark_mainline(&mut tree);
    Ok(tree)
}

/// Length of the longest chain of coclass-preserving edges below each vertex.
fn coclass_heights(tree: &DescendantTree) -> HashMap<String, usize> {
    let mut h: HashMap<String, usize> = HashMap::new();
    for v in tree.nodes.iter().rev() {
        let best = v
            .children
            .iter()
            .filter_map(|c| tree.get(c))
            .filter(|c| c.step == 1)
            .map(|c| h.get(&c.label).copied().unwrap_or(0) + 1)
            .max()
            .unwrap_or(0);
        h.insert(v.label.clone(), best);
    }
    h
}

/// The capable chain through the root's coclass: at each vertex the step-1 child with the longest
/// step-1 descent, ties broken by subtree size and then label.
pub fn mainline(tree: &DescendantTree) -> Vec<String> {
    let h = coclass_heights(tree);
    let size: HashMap<&str, usize> = tree.nodes.iter().map(|v| (v.label.as_str(), tree.subtree(&v.label).len())).collect();
    let mut out = vec![tree.root.clone()];
    let mut cur = tree.root_node();
    loop {
        let best = tree
            .children(&cur.label)
            .into_iter()
            .filter(|c| c.step == 1 && c.is_capable())
            .max_by(|a, b| {
                (h[&a.label], size[a.label.as_str()])
                    .cmp(&(h[&b.label], size[b.label.as_str()]))
                    .then_with(|| b.label.cmp(&a.label))
            });
        match best {
            Some(c) => {
                out.push(c.label.clone());
                cur = c;
            }
            None => break,
        }
    }
    out
}

fn mark_mainline(tree: &mut DescendantTree) {
    let ml = mainline(tree);
    for v in tree.nodes.iter_mut() {
        v.mainline = false;
    }
    for l in ml {
        let i = tree.index[&l];
        tree.nodes[i].mainline = true;
    }
}

/// Order-independent summary of a branch vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BranchEntry {
    /// Distance from the mainline.
    pub depth: usize,
    pub tkt: Tkt,
    pub center_type: AbelianType,
    pub derived_length: usize,
    pub capable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    /// Order exponent of the mainline vertex the branch hangs from.
    pub order: usize,
    pub root: String,
    pub depth: usize,
    pub members: Vec<String>,
    /// Sorted entries of the non-mainline vertices.
    pub signature: Vec<BranchEntry>,
    /// Whether every vertex of the branch lies strictly below the tree's maximal order.
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureReport {
    pub mainline: Vec<String>,
    /// `branches[j]` hangs from the mainline vertex of the `j`-th smallest order.
    pub branches: Vec<Branch>,
}

impl StructureReport {
    pub fn branch(&self, order: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.order == order)
    }
}

/// Splits the tree into its mainline and the branches hanging from each mainline vertex.
///
/// Only coclass-preserving edges are followed.
pub fn mainline_and_branches(tree: &DescendantTree) -> StructureReport {
    let ml = mainline(tree);
    let on_ml: std::collections::HashSet<&str> = ml.iter().map(|s| s.as_str()).collect();
    let mut branches = Vec::new();
    for m in &ml {
        let root = tree.node(m).expect("mainline vertex");
        let mut members = Vec::new();
        let mut sig = Vec::new();
        let mut depth = 0;
        let mut complete = true;
        let mut stack: Vec<(&TreeNode, usize)> = tree
            .children(m)
            .into_iter()
            .filter(|c| c.step == 1 && !on_ml.contains(c.label.as_str()))
            .map(|c| (c, 1))
            .collect();
        while let Some((v, d)) = stack.pop() {
            depth = depth.max(d);
            members.push(v.label.clone());
            sig.push(BranchEntry {
                depth: d,
                tkt: tkt_canonical(&v.tkt),
                center_type: v.center_type.clone(),
                derived_length: v.derived_length,
                capable: v.is_capable(),
            });
            if v.order_exponent >= tree.max_order {
                complete = false;
            }
            for c in tree.children(&v.label) {
                if c.step == 1 {
                    stack.push((c, d + 1));
                }
            }
        }
        if root.order_exponent + 1 >= tree.max_order {
            complete = false;
        }
        sig.sort();
        members.sort();
        branches.push(Branch { order: root.order_exponent, root: m.clone(), depth, members, signature: sig, complete });
    }
    StructureReport { mainline: ml, branches }
}

/// Vertices selected by order, coclass and kernel type.
/// The coclass-2 vertex of order `p^5` with kernel type equivalent to `tkt`, found in the tree of `C_p x C_p`.
pub fn coclass_two_root(p: u32, tkt: &Tkt) -> Result<TreeNode> {
    let g = PcPresentation::elementary_abelian(p, 2)?;
    let tree = build_tree(&g, &TreeOptions::new("R", 5))?;
    let found = find_nodes(&tree, 5, Some(2), Some(tkt));
    match found.as_slice() {
        [v] => Ok((*v).clone()),
        [] => Err(Error::UnknownTkt(format!("{tkt}: no coclass-2 vertex of order {p}^5"))),
        _ => Err(Error::Malformed(format!("{tkt}: {} coclass-2 vertices of order {p}^5", found.len()))),
    }
}

pub fn find_nodes<'a>(tree: &'a DescendantTree, order: usize, coclass: Option<usize>, tkt: Option<&Tkt>) -> Vec<&'a TreeNode> {
    let canon = tkt.map(tkt_canonical);
    tree.nodes
        .iter()
        .filter(|v| v.order_exponent == order)
        .filter(|v| coclass.is_none_or(|c| v.coclass == c))
        .filter(|v| canon.as_ref().is_none_or(|t| tkt_canonical(&v.tkt) == *t))
        .collect()
}

/// Number of vertices per order exponent.
pub fn order_profile(tree: &DescendantTree) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for v in &tree.nodes {
        *m.entry(v.order_exponent).or_insert(0) += 1;
    }
    m
}
