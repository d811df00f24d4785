//! Graphviz rendering of descendant trees.

use serde::{Deserialize, Serialize};
use std::fmt::Write;

use super::tree::{DescendantTree, TreeNode};

/// Drawing class of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexClass {
    /// Metabelian, center of type `(p,p)`.
    MetabelianBicyclicCenter,
    /// Metabelian, cyclic center.
    MetabelianCyclicCenter,
    NonMetabelian,
}

impl VertexClass {
    pub fn of(v: &TreeNode) -> Self {
        if !v.is_metabelian() {
            VertexClass::NonMetabelian
        } else if v.center_type.rank() >= 2 {
            VertexClass::MetabelianBicyclicCenter
        } else {
            VertexClass::MetabelianCyclicCenter
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VertexClass::MetabelianBicyclicCenter => "metabelian-bicyclic-center",
            VertexClass::MetabelianCyclicCenter => "metabelian-cyclic-center",
            VertexClass::NonMetabelian => "non-metabelian",
        }
    }

    fn style(self) -> &'static str {
        match self {
            VertexClass::MetabelianBicyclicCenter => "shape=circle, style=filled, fillcolor=black, fontcolor=white",
            VertexClass::MetabelianCyclicCenter => "shape=circle, style=filled, fillcolor=white",
            VertexClass::NonMetabelian => "shape=square, style=filled, fillcolor=white",
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT text: one rank per order, mainline edges bold, vertex class in the `class` attribute.
pub fn to_dot(tree: &DescendantTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph descendant_tree {{");
    let _ = writeln!(out, "  rankdir=TB;");
    let _ = writeln!(out, "  node [fontsize=10, width=0.3];");
    let p = tree.root_node().presentation.prime();
    let mut orders: Vec<usize> = tree.nodes.iter().map(|v| v.order_exponent).collect();
    orders.sort_unstable();
    orders.dedup();
    for n in &orders {
        let _ = writeln!(out, "  subgraph order_{n} {{ rank=same; \"order {p}^{n}\" [shape=plaintext];");
        for v in tree.nodes.iter().filter(|v| v.order_exponent == *n) {
            let class = VertexClass::of(v);
            let mut label = v.label.clone();
            if let Some(name) = &v.tkt_name {
                label.push_str(&format!("\\n{name}"));
            }
            let _ = writeln!(
                out,
                "    {} [label={}, class={}, {}];",
                quote(&v.label),
                quote(&label),
                quote(class.name()),
                class.style()
            );
        }
        let _ = writeln!(out, "  }}");
    }
    for w in orders.windows(2) {
        let _ = writeln!(out, "  \"order {p}^{}\" -> \"order {p}^{}\" [style=invis];", w[0], w[1]);
    }
    for v in &tree.nodes {
        if let Some(parent) = &v.parent {
            let bold = if v.mainline && tree.get(parent).is_some_and(|u| u.mainline) { ", style=bold" } else { "" };
            let _ = writeln!(out, "  {} -> {} [label=\"{}\"{bold}];", quote(parent), quote(&v.label), v.step);
        }
    }
    out.push_str("}\n");
    out
}

/// Vertex label, class and parent, read back from [`to_dot`] output.
pub fn parse_dot_vertices(dot: &str) -> Vec<(String, String)> {
    dot.lines()
        .filter_map(|l| {
            let l = l.trim();
            let (name, rest) = l.strip_prefix('"')?.split_once('"')?;
            let i = rest.find("class=\"")? + 7;
            let class = rest[i..].split('"').next()?;
            Some((name.to_string(), class.to_string()))
        })
        .collect()
}

/// Edges `(parent, child)` read back from [`to_dot`] output, excluding the order ruler.
pub fn parse_dot_edges(dot: &str) -> Vec<(String, String)> {
    dot.lines()
        .filter_map(|l| {
            let l = l.trim();
            let (a, rest) = l.strip_prefix('"')?.split_once("\" -> \"")?;
            let (b, _) = rest.split_once('"')?;
            (!a.starts_with("order ")).then(|| (a.to_string(), b.to_string()))
        })
        .collect()
}
