//! Quadratic-field Artin-pattern records, identification of tower groups and information reports.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::artin::{tkt_canonical, Tkt};
use crate::error::{Error, Result};
use crate::pcgroup::iso::{iso_test, DEFAULT_ISO_BUDGET};
use crate::pcgroup::{fingerprint, AbelianType, TypeMultiset};
use crate::pgen::{DescendantTree, TreeNode};
use crate::tower::{metabelianization, shafarevich_bound, tower_length_inference, CoverMember, CoverResult, FieldContext, TowerLength};

/// Bundled datasets: name and JSON text.
pub const BUNDLED: &[(&str, &str)] = &[
    ("c18_ground", include_str!("../data/c18_ground.json")),
    ("c18_excited1", include_str!("../data/c18_excited1.json")),
    ("c18_excited2", include_str!("../data/c18_excited2.json")),
    ("c21_ground", include_str!("../data/c21_ground.json")),
    ("c21_excited1", include_str!("../data/c21_excited1.json")),
    ("c21_excited2", include_str!("../data/c21_excited2.json")),
];

const P: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRecord {
    /// Fundamental discriminant; absent when the source does not list it.
    pub discriminant: Option<i64>,
    pub cl_p_type: AbelianType,
    pub kappa1: Tkt,
    pub tau1: Vec<AbelianType>,
    /// For slot `L_i`, the targets of the layer-1 subgroups of `L_i`.
    pub tau2: Option<BTreeMap<usize, Vec<AbelianType>>>,
    pub ctx: FieldContext,
    /// Source grouping, e.g. `"c.18 excited"`, and item within it.
    pub batch: Option<String>,
    pub item: Option<u32>,
    pub note: Option<String>,
}

impl FieldRecord {
    /// Order-insensitive second-order pattern `(τ0(L), τ1(L))` over the provided slots.
    pub fn tau2_multiset(&self) -> Option<Vec<(AbelianType, TypeMultiset)>> {
        let t2 = self.tau2.as_ref()?;
        let mut v: Vec<(AbelianType, TypeMultiset)> =
            t2.iter().map(|(&i, ts)| (self.tau1[i - 1].clone(), TypeMultiset::new(ts.clone()))).collect();
        v.sort();
        Some(v)
    }

    /// `[τ0;τ1]` in formal notation.
    pub fn ipad1_string(&self) -> String {
        format!("[{};{}]", self.cl_p_type.formal(), TypeMultiset::new(self.tau1.clone()).formal())
    }

    /// Whether `τ1` has a homocyclic component of exponent at least 3 (an excited state).
    pub fn is_excited(&self) -> bool {
        self.tau1.iter().any(|t| t.0.len() == 2 && t.0[0] == t.0[1] && t.0[0] >= 3)
    }

    pub fn display_discriminant(&self) -> String {
        self.discriminant.map(|d| d.to_string()).unwrap_or_else(|| "unknown".into())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawCtx {
    r: usize,
    zeta3: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct RawRecord {
    d: Option<i64>,
    cl3: String,
    kappa1: String,
    tau1: Vec<String>,
    #[serde(default)]
    tau2: Option<BTreeMap<String, Vec<String>>>,
    ctx: RawCtx,
    #[serde(default)]
    batch: Option<String>,
    #[serde(default)]
    item: Option<u32>,
    #[serde(default)]
    note: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct CsvRow {
    d: String,
    cl3: String,
    kappa1: String,
    tau1: String,
    #[serde(rename = "L1", default)]
    l1: String,
    #[serde(rename = "L2", default)]
    l2: String,
    #[serde(rename = "L3", default)]
    l3: String,
    #[serde(rename = "L4", default)]
    l4: String,
    r: usize,
    zeta3: bool,
    #[serde(default)]
    batch: String,
    #[serde(default)]
    item: String,
    #[serde(default)]
    note: String,
}

impl CsvRow {
    fn into_raw(self) -> std::result::Result<RawRecord, String> {
        let words = |s: &str| -> Vec<String> { s.split_whitespace().map(String::from).collect() };
        let mut tau2 = BTreeMap::new();
        for (k, v) in [("L1", &self.l1), ("L2", &self.l2), ("L3", &self.l3), ("L4", &self.l4)] {
            if !v.trim().is_empty() {
                tau2.insert(k.to_string(), words(v));
            }
        }
        let d = if self.d.trim().is_empty() {
            None
        } else {
            Some(self.d.trim().parse::<i64>().map_err(|e| format!("bad discriminant '{}': {e}", self.d))?)
        };
        let item = if self.item.trim().is_empty() {
            None
        } else {
            Some(self.item.trim().parse::<u32>().map_err(|e| format!("bad item '{}': {e}", self.item))?)
        };
        let opt = |s: String| if s.trim().is_empty() { None } else { Some(s) };
        Ok(RawRecord {
            d,
            cl3: self.cl3,
            kappa1: self.kappa1,
            tau1: words(&self.tau1),
            tau2: if tau2.is_empty() { None } else { Some(tau2) },
            ctx: RawCtx { r: self.r, zeta3: self.zeta3 },
            batch: opt(self.batch),
            item,
            note: opt(self.note),
        })
    }
}

/// Loaded records with per-row diagnostics for rejected rows.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub records: Vec<FieldRecord>,
    /// `(row number, message)`, rows counted from 1.
    pub diagnostics: Vec<(usize, String)>,
    /// Accepted rows that carry a caveat.
    pub warnings: Vec<(usize, String)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

fn squarefree(mut n: u64) -> bool {
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q * q) {
            return false;
        }
        if n.is_multiple_of(q) {
            n /= q;
        }
        q += 1;
    }
    true
}

/// Whether `d` is a fundamental discriminant of a quadratic field.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let m = d.rem_euclid(4);
    let a = d.unsigned_abs();
    if m == 1 {
        squarefree(a)
    } else if m == 0 {
        let q = d / 4;
        matches!(q.rem_euclid(4), 2 | 3) && squarefree(q.unsigned_abs())
    } else {
        false
    }
}

fn layer_size(rank: usize) -> usize {
    ((P as usize).pow(rank as u32) - 1) / (P as usize - 1)
}

/// Validates a raw row; returns the record and an optional warning.
fn validate(raw: RawRecord) -> std::result::Result<(FieldRecord, Option<String>), String> {
    let e = |x: Error| x.to_string();
    let cl = AbelianType::parse(&raw.cl3).map_err(e)?;
    let kappa = Tkt::parse(&raw.kappa1).map_err(e)?;
    let tau1: Vec<AbelianType> = raw.tau1.iter().map(|s| AbelianType::parse(s)).collect::<Result<_>>().map_err(e)?;
    let expected = layer_size(cl.rank());
    if tau1.len() != expected {
        return Err(format!("tau1 has {} entries, expected {expected}", tau1.len()));
    }
    if kappa.len() != expected {
        return Err(format!("kappa1 has {} entries, expected {expected}", kappa.len()));
    }
    let tau2 = match raw.tau2 {
        None => None,
        Some(m) => {
            let mut out = BTreeMap::new();
            for (k, v) in m {
                let i: usize = k
                    .strip_prefix('L')
                    .and_then(|x| x.parse().ok())
                    .filter(|&i| (1..=expected).contains(&i))
                    .ok_or_else(|| format!("bad tau2 slot '{k}'"))?;
                let ts: Vec<AbelianType> = v.iter().map(|s| AbelianType::parse(s)).collect::<Result<_>>().map_err(e)?;
                let want = layer_size(tau1[i - 1].rank());
                if ts.len() != want {
                    return Err(format!("tau2 slot {k} has {} entries, expected {want}", ts.len()));
                }
                out.insert(i, ts);
            }
            Some(out)
        }
    };
    let mut warning = None;
    match raw.d {
        Some(d) => {
            if (d > 0) != (raw.ctx.r == 1) {
                return Err(format!("discriminant {d} does not match unit rank {}", raw.ctx.r));
            }
            if !is_fundamental_discriminant(d) {
                if raw.note.is_none() {
                    return Err(format!("{d} is not a fundamental discriminant"));
                }
                warning = Some(format!("{d} is not a fundamental discriminant (accepted with note)"));
            }
        }
        None => {
            if raw.note.is_none() {
                return Err("missing discriminant without a note".into());
            }
            warning = Some("discriminant unknown".into());
        }
    }
    let ctx = FieldContext {
        unit_rank: raw.ctx.r,
        contains_zeta_p: raw.ctx.zeta3,
        s_empty: true,
        p_class_rank: Some(cl.rank()),
    };
    Ok((
        FieldRecord {
            discriminant: raw.d,
            cl_p_type: cl,
            kappa1: kappa,
            tau1,
            tau2,
            ctx,
            batch: raw.batch,
            item: raw.item,
            note: raw.note,
        },
        warning,
    ))
}

fn collect(rows: Vec<std::result::Result<RawRecord, String>>, strict: bool) -> Result<Dataset> {
    let mut ds = Dataset::default();
    for (k, row) in rows.into_iter().enumerate() {
        match row.and_then(validate) {
            Ok((r, w)) => {
                if let Some(w) = w {
                    ds.warnings.push((k + 1, w));
                }
                ds.records.push(r);
            }
            Err(msg) => {
                if strict {
                    return Err(Error::Parse(format!("row {}: {msg}", k + 1)));
                }
                ds.diagnostics.push((k + 1, msg));
            }
        }
    }
    Ok(ds)
}

/// Parses a dataset. Malformed rows are collected as diagnostics unless `strict` is set.
pub fn load_dataset_str(text: &str, format: Format, strict: bool) -> Result<Dataset> {
    let rows: Vec<std::result::Result<RawRecord, String>> = match format {
        Format::Json => {
            let values: Vec<serde_json::Value> = serde_json::from_str(text)?;
            values.into_iter().map(|v| serde_json::from_value::<RawRecord>(v).map_err(|e| e.to_string())).collect()
        }
        Format::Csv => {
            let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
            rdr.deserialize::<CsvRow>().map(|r| r.map_err(|e| e.to_string()).and_then(CsvRow::into_raw)).collect()
        }
    };
    collect(rows, strict)
}

pub fn load_dataset(path: &Path, strict: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    load_dataset_str(&text, Format::from_path(path), strict)
}

/// A bundled dataset by name (see [`BUNDLED`]).
pub fn bundled(name: &str) -> Result<Dataset> {
    let name = name.trim_end_matches(".json");
    let name = name.rsplit('/').next().unwrap_or(name);
    let (_, text) = BUNDLED.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::UnknownLabel(name.into()))?;
    load_dataset_str(text, Format::Json, true)
}

/// Writes records in the CSV mirror format.
pub fn to_csv(records: &[FieldRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["d", "cl3", "kappa1", "tau1", "L1", "L2", "L3", "L4", "r", "zeta3", "batch", "item", "note"]).map_err(io)?;
    for r in records {
        let join = |v: &[AbelianType]| v.iter().map(|t| t.digits()).collect::<Vec<_>>().join(" ");
        let slot = |i: usize| r.tau2.as_ref().and_then(|m| m.get(&i)).map(|v| join(v)).unwrap_or_default();
        let kappa: String = r.kappa1.to_string().trim_matches(|c| c == '(' || c == ')').to_string();
        w.write_record([
            r.discriminant.map(|d| d.to_string()).unwrap_or_default(),
            r.cl_p_type.digits(),
            kappa,
            join(&r.tau1),
            slot(1),
            slot(2),
            slot(3),
            slot(4),
            r.ctx.unit_rank.to_string(),
            r.ctx.contains_zeta_p.to_string(),
            r.batch.clone().unwrap_or_default(),
            r.item.map(|i| i.to_string()).unwrap_or_default(),
            r.note.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub discriminant: Option<i64>,
    /// Surviving candidates for the tower group.
    pub matched_labels: Vec<String>,
    pub ambiguous: bool,
    pub tower_length: Option<TowerLength>,
    /// Pattern matches removed by the rank window, with the reason.
    pub excluded: Vec<(String, String)>,
    /// Label of the common second derived quotient of the candidates, if it is a tree vertex.
    pub metabelianization: Option<String>,
    /// The record lacks second-order data, so only first-order compatibility was checked.
    pub insufficient_data: bool,
    pub diagnostics: Vec<String>,
}

fn matches_pattern(v: &TreeNode, rec: &FieldRecord, kappa: &Tkt, tau1: &[AbelianType]) -> bool {
    if v.fingerprint.abelianization != rec.cl_p_type || tkt_canonical(&v.tkt) != *kappa {
        return false;
    }
    let mut t = v.tau1.clone();
    t.sort();
    if t != tau1 {
        return false;
    }
    match rec.tau2_multiset() {
        None => true,
        Some(want) => {
            // the record's slots must occur in the vertex's second-order pattern
            let mut have: Vec<(AbelianType, TypeMultiset)> =
                v.ipad2.iter().map(|(t0, t1)| (t0.clone(), TypeMultiset::new(t1.clone()))).collect();
            for w in want {
                match have.iter().position(|h| *h == w) {
                    Some(i) => {
                        have.swap_remove(i);
                    }
                    None => return false,
                }
            }
            true
        }
    }
}

/// Label of the tree vertex isomorphic to `H/H''` for the vertex `label`.
pub fn metabelian_anchor_of(tree: &DescendantTree, label: &str) -> Result<Option<String>> {
    let v = tree.node(label)?;
    if v.is_metabelian() {
        return Ok(Some(v.label.clone()));
    }
    let q = metabelianization(&v.presentation)?;
    let fp = fingerprint(&q)?;
    for a in tree.nodes.iter().filter(|a| a.is_metabelian() && a.fingerprint == fp) {
        if iso_test(&q, &a.presentation, DEFAULT_ISO_BUDGET).unwrap_or(false) {
            return Ok(Some(a.label.clone()));
        }
    }
    Ok(None)
}

/// Tree vertices whose Artin pattern matches the record, filtered by the record's rank window.
pub fn identify(record: &FieldRecord, tree: &DescendantTree) -> Result<IdentificationResult> {
    let kappa = tkt_canonical(&record.kappa1);
    let mut tau1 = record.tau1.clone();
    tau1.sort();
    let matches: Vec<&TreeNode> = tree.nodes.iter().filter(|v| matches_pattern(v, record, &kappa, &tau1)).collect();
    let mut diagnostics = Vec::new();
    let insufficient_data = record.tau2.is_none();
    if insufficient_data {
        diagnostics.push("no second-order data: candidates are only first-order compatible".into());
    }
    if matches.is_empty() {
        diagnostics.push("no tree vertex matches the record's pattern".into());
        return Ok(IdentificationResult {
            discriminant: record.discriminant,
            matched_labels: vec![],
            ambiguous: false,
            tower_length: None,
            excluded: vec![],
            metabelianization: None,
            insufficient_data,
            diagnostics,
        });
    }
    let window = shafarevich_bound(&record.ctx, record.cl_p_type.rank());
    let mut survivors: Vec<&TreeNode> = Vec::new();
    let mut excluded = Vec::new();
    for v in matches {
        if window.contains(&v.mu) {
            survivors.push(v);
        } else {
            excluded.push((
                v.label.clone(),
                format!("excluded because mu(H)={} is outside [{}, {}]", v.mu, window.start(), window.end()),
            ));
        }
    }
    let mut anchors = Vec::new();
    for v in &survivors {
        let a = metabelian_anchor_of(tree, &v.label)?;
        if !anchors.contains(&a) {
            anchors.push(a);
        }
    }
    let metabelianization = match anchors.as_slice() {
        [Some(a)] => Some(a.clone()),
        _ => None,
    };
    if anchors.len() > 1 {
        diagnostics.push("candidates have different second derived quotients".into());
    }
    let tower_length = if survivors.is_empty() {
        diagnostics.push("every pattern match violates the rank window".into());
        None
    } else {
        let cr = CoverResult {
            metabelian_anchor: metabelianization.clone().unwrap_or_default(),
            members: survivors
                .iter()
                .map(|v| CoverMember {
                    label: v.label.clone(),
                    order_exponent: v.order_exponent,
                    class: v.class,
                    coclass: v.coclass,
                    derived_length: v.derived_length,
                    mu: v.mu,
                    nu: v.nu,
                    fingerprint: v.fingerprint.clone(),
                    ambiguous: v.ambiguous,
                })
                .collect(),
            truncated: tree.truncated,
            excluded: excluded.clone(),
        };
        Some(tower_length_inference(&cr)?)
    };
    Ok(IdentificationResult {
        discriminant: record.discriminant,
        ambiguous: survivors.len() > 1,
        matched_labels: survivors.iter().map(|v| v.label.clone()).collect(),
        tower_length,
        excluded,
        metabelianization,
        insufficient_data,
        diagnostics,
    })
}

/// Identification for records whose `τ1` has a polarized component of type `3^2` or higher.
pub fn excited_state_identify(record: &FieldRecord, tree: &DescendantTree) -> Result<IdentificationResult> {
    if !record.is_excited() {
        return Err(Error::Malformed(format!(
            "record {} has no excited polarized component in tau1",
            record.display_discriminant()
        )));
    }
    identify(record, tree)
}

/// Identifies every record, in ascending order of discriminant (unknown discriminants last).
pub fn identify_all(records: &[FieldRecord], tree: &DescendantTree) -> Result<Vec<(FieldRecord, IdentificationResult)>> {
    use rayon::prelude::*;
    let mut sorted: Vec<FieldRecord> = records.to_vec();
    sorted.sort_by_key(|r| (r.discriminant.is_none(), r.discriminant));
    sorted.into_par_iter().map(|r| identify(&r, tree).map(|res| (r, res))).collect()
}

/// One numbered piece of information about a tower.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoItem {
    pub number: u8,
    pub title: String,
    /// `None` when the item is not available.
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoReport {
    pub discriminant: Option<i64>,
    pub items: Vec<InfoItem>,
}

impl InfoReport {
    pub fn item(&self, n: u8) -> Option<&InfoItem> {
        self.items.iter().find(|i| i.number == n)
    }
}

impl fmt::Display for InfoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.discriminant.map(|d| d.to_string()).unwrap_or_else(|| "unknown".into());
        writeln!(f, "d = {d}")?;
        for it in &self.items {
            writeln!(f, "  ({:>2}) {}: {}", it.number, it.title, it.value.as_deref().unwrap_or("n/a"))?;
        }
        Ok(())
    }
}

/// Collects the numbered facts about the tower of the record's field.
pub fn info_report(result: &IdentificationResult, record: &FieldRecord, tree: &DescendantTree) -> Result<InfoReport> {
    let mut items = Vec::new();
    let mut push = |n: u8, t: &str, v: Option<String>| items.push(InfoItem { number: n, title: t.into(), value: v });
    let cands: Vec<&TreeNode> = result.matched_labels.iter().map(|l| tree.node(l)).collect::<Result<_>>()?;
    if !cands.is_empty() {
        push(1, "tower group candidates", Some(result.matched_labels.join(" | ")));
        let len = result.tower_length.as_ref().map(|t| match t.exact {
            Some(l) => format!("{l}"),
            None => format!(">= {} (derived lengths {}..={})", t.lower_bound, t.dl_range.0, t.dl_range.1),
        });
        push(2, "tower length", len);
        let t2 = record.tau2.as_ref().map(|m| {
            let parts: Vec<String> = m
                .iter()
                .map(|(i, ts)| format!("tau1(L{i})={}", TypeMultiset::new(ts.clone()).formal()))
                .collect();
            parts.join(", ")
        });
        push(3, "iterated IPAD", Some(format!("{}; {}", record.ipad1_string(), t2.unwrap_or_else(|| "second order not given".into()))));
        let g = result.metabelianization.as_ref().map(|l| {
            let n = tree.get(l).map(|v| v.order_exponent).unwrap_or(0);
            format!("{l} of order {P}^{n}")
        });
        push(4, "second derived quotient", g);
        let mut occ: Vec<(usize, usize, usize)> = cands.iter().map(|v| (v.order_exponent, v.class, v.coclass)).collect();
        occ.sort();
        occ.dedup();
        let occ_s: Vec<String> = occ.iter().map(|(o, c, r)| format!("order {P}^{o}, class {c}, coclass {r}")).collect();
        push(5, "order, class, coclass", Some(occ_s.join(" | ")));
        push(6, "annihilator", None);
    }
    push(7, "capitulation type", Some(record.kappa1.to_string()));
    push(8, "abelian type invariants of the unramified cyclic extensions", Some(TypeMultiset::new(record.tau1.clone()).formal()));
    push(9, "p-class group", Some(record.cl_p_type.formal()));
    push(10, "p-class rank", Some(record.cl_p_type.rank().to_string()));
    Ok(InfoReport { discriminant: record.discriminant, items })
}
