//! Runs the `pgtower` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use pgtower::pcgroup::PcPresentation;
use pgtower::pgen::export::{parse_dot_edges, parse_dot_vertices};
use pgtower::pgen::DescendantTree;

fn pgtower(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgtower")).args(args).output().expect("spawn pgtower")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or_else(|| panic!("terminated by a signal: {}", String::from_utf8_lossy(&o.stderr)))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch() -> &'static Path {
    static DIR: OnceLock<tempfile::TempDir> = OnceLock::new();
    DIR.get_or_init(|| tempfile::tempdir().unwrap()).path()
}

fn build(name: &str, args: &[&str]) -> PathBuf {
    let out = scratch().join(name);
    let mut full = vec!["tree", "build", "-o", out.to_str().unwrap()];
    full.extend_from_slice(args);
    let o = pgtower(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

/// Pruned tree of the c.18 root up to order 3^7.
fn c18_tree() -> &'static Path {
    static P: OnceLock<PathBuf> = OnceLock::new();
    P.get_or_init(|| build("c18.json", &["--prune-tkt", "c.18", "--max-order", "3^7"]))
}

#[test]
fn rebuilding_gives_identical_bytes() {
    let a = build("a.json", &["--max-order", "4"]);
    let b = build("b.json", &["--max-order", "3^4", "--threads", "2"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn export_round_trips() {
    let t = build("small.json", &["--max-order", "4"]);
    let t = t.to_str().unwrap();
    let json = pgtower(&["export", "--tree", t, "--json"]);
    assert_eq!(code(&json), 0);
    assert_eq!(stdout(&json).trim_end(), std::fs::read_to_string(t).unwrap().trim_end());

    let tree = DescendantTree::from_json(&std::fs::read_to_string(t).unwrap()).unwrap();
    let dot_path = scratch().join("small.dot");
    let dot = pgtower(&["export", "--tree", t, "--dot", "-o", dot_path.to_str().unwrap()]);
    assert_eq!(code(&dot), 0);
    let text = std::fs::read_to_string(dot_path).unwrap();
    let mut vertices: Vec<String> = parse_dot_vertices(&text).into_iter().map(|(l, _)| l).collect();
    vertices.sort();
    let mut labels: Vec<String> = tree.nodes.iter().map(|v| v.label.clone()).collect();
    labels.sort();
    assert_eq!(vertices, labels);
    let mut edges = parse_dot_edges(&text);
    edges.sort();
    let mut want: Vec<(String, String)> = tree.edges().into_iter().map(|(a, b)| (a.into(), b.into())).collect();
    want.sort();
    assert_eq!(edges, want);
}

#[test]
fn identify_table_lists_every_row() {
    let t = c18_tree().to_str().unwrap();
    let o = pgtower(&["identify", "--tree", t, "--fields", "bundled/c18_ground"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 28);
    let item = |i: &str| rows.iter().filter(|r| r.split_whitespace().nth(1) == Some(i)).count();
    assert_eq!((item("1"), item("2")), (10, 18));
    assert!(rows.iter().all(|r| r.split_whitespace().nth(2) == Some("3")), "{out}");

    let one = pgtower(&["identify", "--tree", t, "--fields", "bundled/c18_ground", "--d", "1030117", "--format", "json"]);
    assert_eq!(code(&one), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&one)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
}

#[test]
fn group_artin_and_cover_agree_with_the_tree() {
    let t = c18_tree().to_str().unwrap();
    let tree = DescendantTree::from_json(&std::fs::read_to_string(t).unwrap()).unwrap();
    let anchor = tree.nodes.iter().find(|v| v.mainline && v.order_exponent == 6).unwrap();
    let g = pgtower(&["group", "--tree", t, "--label", &anchor.label, "--format", "json"]);
    assert_eq!(code(&g), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&g)).unwrap();
    assert_eq!(v["mu"], 4);

    let c = pgtower(&["cover", "--tree", t, "--anchor", &anchor.label, "--format", "json"]);
    assert_eq!(code(&c), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&c)).unwrap();
    assert_eq!(v["members"].as_array().unwrap().len(), 3);

    let a = pgtower(&["artin", "--tree", t, "--group", &anchor.label, "--order", "2"]);
    assert_eq!(code(&a), 0);
    assert!(!stdout(&a).is_empty());
}

#[test]
fn exit_codes() {
    assert_eq!(code(&pgtower(&["frobnicate"])), 1);
    assert_eq!(code(&pgtower(&["tree", "build", "--max-order", "3^20"])), 1);
    assert_eq!(code(&pgtower(&["export", "--tree", "/nonexistent/tree.json", "--dot"])), 1);
    assert_eq!(code(&pgtower(&["identify", "--tree", c18_tree().to_str().unwrap(), "--fields", "bundled/nope"])), 1);

    let out = scratch().join("budget.json");
    let o = pgtower(&["tree", "build", "--max-order", "5", "--max-nodes", "3", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);

    // a1^3 = a2 with [a2, a1] = a3 violates the overlap a1^3 a1 = a1 a1^3
    let bad = PcPresentation::new(3, vec![vec![(1, 1)], vec![(2, 1)], vec![]], vec![vec![], vec![vec![(2, 1)]], vec![vec![], vec![]]])
        .unwrap();
    let root = scratch().join("bad.json");
    std::fs::write(&root, bad.to_json()).unwrap();
    let o = pgtower(&["tree", "build", "--root", root.to_str().unwrap(), "--max-order", "5"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
