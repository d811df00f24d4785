//! p-group generation: covering groups, allowable subgroups and descendant trees.

pub mod cover;
pub mod descendants;

pub use cover::{p_cover, PCover, RelKey};
pub use descendants::{
    allowable_bases, allowable_subgroups, descendant, descendants_of_cover, immediate_descendants, CandidateFilter, DedupPolicy,
    DedupStats, Descendant,
};
pub mod tree;

pub use tree::{
    build_tree, coclass_two_root, find_nodes, mainline, mainline_and_branches, order_profile, tau_dominates, Branch, BranchEntry, DedupRecord,
    DescendantTree, PruneSpec, StructureReport, TreeMode, TreeNode, TreeOptions,
};
pub mod export;

pub use export::{to_dot, VertexClass};
