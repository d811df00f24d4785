use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use pgtower::artin::{ipad2, tkt_by_name};
use pgtower::error::Error as EngineError;
use pgtower::fields::{self, Dataset, FieldRecord, IdentificationResult};
use pgtower::pcgroup::{invariants, PcPresentation, TypeMultiset};
use pgtower::pgen::{build_tree, coclass_two_root, mainline_and_branches, to_dot, DescendantTree, PruneSpec, TreeMode, TreeOptions, VertexClass};
use pgtower::tower::{cover, n_cover, shafarevich_cover, tower_length_inference, FieldContext};

/// Largest order exponent accepted unless `--ceiling` raises it.
const DEFAULT_CEILING: usize = 14;

#[derive(Parser, Debug)]
#[command(name = "pgtower", version, about = "Descendant trees of finite p-groups and p-class tower groups")]
struct Cli {
    /// Worker threads for descendant enumeration and identification.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or summarize a descendant tree.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Invariants of one tree vertex.
    Group(GroupArgs),
    /// Artin pattern of a tree vertex.
    Artin(ArtinArgs),
    /// Cover of a metabelian vertex.
    Cover(CoverArgs),
    /// Match quadratic fields against tree vertices.
    Identify(IdentifyArgs),
    /// Numbered facts about the tower of each field.
    Report(IdentifyArgs),
    /// Write a tree as DOT or JSON.
    Export(ExportArgs),
}

#[derive(Subcommand, Debug)]
enum TreeCmd {
    Build(BuildArgs),
    /// Mainline and branch summary of a stored tree.
    Show {
        #[arg(long)]
        tree: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Full,
    Coclass,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Table,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(short, long, default_value_t = 3)]
    prime: u32,
    /// Root at the coclass-2 vertex of order p^5 with this kernel type, and keep only vertices of that type.
    #[arg(long)]
    prune_tkt: Option<String>,
    /// Root presentation as JSON; defaults to the elementary abelian group of rank 2.
    #[arg(long, conflicts_with = "prune_tkt")]
    root: Option<PathBuf>,
    #[arg(long, default_value = "R")]
    root_label: String,
    /// Largest order, as an exponent `n` or `p^n`.
    #[arg(long, default_value = "8")]
    max_order: String,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    mode: Mode,
    /// Drop vertices whose coclass exceeds this.
    #[arg(long)]
    max_coclass: Option<usize>,
    /// Stop expanding after this many vertices (exit status 2).
    #[arg(long)]
    max_nodes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_CEILING)]
    ceiling: usize,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GroupArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    label: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct ArtinArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    group: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: u8,
}

#[derive(Args, Debug)]
struct CoverArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    anchor: String,
    /// Order bound for members; defaults to the tree's bound.
    #[arg(long)]
    max_order: Option<String>,
    /// Keep members whose relation rank is at most `d1 + n`.
    #[arg(long)]
    n: Option<usize>,
    /// Field context for the relation-rank window: real-quadratic, complex-quadratic or custom(r,zeta).
    #[arg(long)]
    ctx: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args, Debug)]
struct IdentifyArgs {
    #[arg(long)]
    tree: PathBuf,
    /// JSON or CSV file, or `bundled/<name>` for a built-in table.
    #[arg(long)]
    fields: String,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Reject the whole table on the first malformed row.
    #[arg(long)]
    strict: bool,
    /// Only this discriminant.
    #[arg(long, allow_hyphen_values = true)]
    d: Option<i64>,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long, conflicts_with = "json")]
    dot: bool,
    #[arg(long)]
    json: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Failure carrying its exit status.
#[derive(Debug)]
struct Exit(u8, String);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Exit {}

fn exit_status(e: &anyhow::Error) -> u8 {
    if let Some(Exit(c, _)) = e.downcast_ref::<Exit>() {
        return *c;
    }
    match e.downcast_ref::<EngineError>() {
        Some(EngineError::Inconsistent | EngineError::CollectionDiverged(_) | EngineError::EmptyCandidates) => 3,
        Some(EngineError::Overflow(_)) => 2,
        _ => 1,
    }
}

fn parse_order(s: &str, p: u32) -> Result<usize> {
    let t = s.trim();
    let exp = match t.split_once('^') {
        Some((base, e)) => {
            let b: u32 = base.trim().parse().with_context(|| format!("bad order '{s}'"))?;
            if b != p {
                bail!("order '{s}' is not a power of {p}");
            }
            e.trim()
        }
        None => t,
    };
    exp.parse().with_context(|| format!("bad order '{s}'"))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn load_tree(path: &Path) -> Result<DescendantTree> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let tree = DescendantTree::from_json(&text).with_context(|| format!("parsing tree {}", path.display()))?;
    Ok(tree)
}

fn load_fields(spec: &str, strict: bool) -> Result<Dataset> {
    let ds = match spec.strip_prefix("bundled/") {
        Some(name) => fields::bundled(name)?,
        None => fields::load_dataset(Path::new(spec), strict).with_context(|| format!("loading {spec}"))?,
    };
    for (row, msg) in &ds.diagnostics {
        eprintln!("warning: row {row} rejected: {msg}");
    }
    for (row, msg) in &ds.warnings {
        eprintln!("note: row {row}: {msg}");
    }
    Ok(ds)
}

fn tree_build(a: &BuildArgs) -> Result<u8> {
    let max_order = parse_order(&a.max_order, a.prime)?;
    if max_order > a.ceiling {
        return Err(Exit(1, format!("max order {}^{max_order} exceeds the ceiling {}^{}", a.prime, a.prime, a.ceiling)).into());
    }
    let mut opts = TreeOptions::new(&a.root_label, max_order);
    opts.mode = match a.mode {
        Mode::Full => TreeMode::Full,
        Mode::Coclass => TreeMode::Coclass,
    };
    opts.max_nodes = a.max_nodes;
    let root = if let Some(name) = &a.prune_tkt {
        let tkt = tkt_by_name(name)?;
        opts.prune = PruneSpec::by_tkt(tkt.clone(), 0);
        coclass_two_root(a.prime, &tkt)?.presentation
    } else if let Some(path) = &a.root {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        PcPresentation::from_json(&text)?
    } else {
        PcPresentation::elementary_abelian(a.prime, 2)?
    };
    opts.prune.max_coclass = a.max_coclass;
    let tree = build_tree(&root, &opts)?;
    emit(&tree.to_json()?, a.out.as_deref())?;
    let ml: Vec<&str> = tree.nodes.iter().filter(|v| v.mainline).map(|v| v.label.as_str()).collect();
    eprintln!("{} vertices up to order {}^{}; mainline {}", tree.len(), a.prime, max_order, ml.join(" > "));
    if !tree.dedup.ambiguous.is_empty() {
        eprintln!("warning: {} unconfirmed merges: {}", tree.dedup.ambiguous.len(), tree.dedup.ambiguous.join(", "));
    }
    if tree.budget_exhausted {
        eprintln!("warning: vertex budget exhausted before order {}^{max_order}", a.prime);
        return Ok(2);
    }
    Ok(0)
}

fn tree_show(path: &Path) -> Result<u8> {
    let tree = load_tree(path)?;
    let rep = mainline_and_branches(&tree);
    println!("root {}  prune {}  max order {}", tree.root, tree.prune, tree.max_order);
    println!("mainline: {}", rep.mainline.join(" > "));
    for b in &rep.branches {
        println!(
            "branch at order {}: root {}, depth {}, {} vertices{}",
            b.order,
            b.root,
            b.depth,
            b.members.len(),
            if b.complete { "" } else { " (incomplete)" }
        );
    }
    Ok(0)
}

fn group(a: &GroupArgs) -> Result<u8> {
    let tree = load_tree(&a.tree)?;
    let v = tree.node(&a.label)?;
    if a.format == Format::Json {
        let inv = invariants(&v.presentation)?;
        let val = serde_json::json!({
            "label": v.label,
            "order_exponent": v.order_exponent,
            "class": v.class,
            "coclass": v.coclass,
            "derived_length": v.derived_length,
            "center_type": v.center_type.digits(),
            "vertex_class": VertexClass::of(v).name(),
            "tkt": v.tkt.to_string(),
            "tkt_name": v.tkt_name,
            "mu": v.mu,
            "nu": v.nu,
            "fingerprint": inv.fingerprint,
            "presentation": v.presentation,
        });
        emit(&serde_json::to_string_pretty(&val)?, None)?;
    } else {
        let p = v.presentation.prime();
        println!("{}", v.label);
        println!("  order         {p}^{}", v.order_exponent);
        println!("  class         {}", v.class);
        println!("  coclass       {}", v.coclass);
        println!("  derived len   {}", v.derived_length);
        println!("  center        {}", v.center_type.formal());
        println!("  kind          {}", VertexClass::of(v).name());
        println!("  TKT           {} {}", v.tkt, v.tkt_name.as_deref().unwrap_or(""));
        println!("  tau1          {}", TypeMultiset::new(v.tau1.clone()).formal());
        println!("  mu, nu        {}, {}", v.mu, v.nu);
        println!("  parent        {}", v.parent.as_deref().unwrap_or("-"));
        println!("  children      {}", v.children.join(" "));
    }
    Ok(0)
}

fn artin(a: &ArtinArgs) -> Result<u8> {
    let tree = load_tree(&a.tree)?;
    let v = tree.node(&a.group)?;
    let t0 = v.fingerprint.abelianization.formal();
    match a.order {
        1 => println!("[{t0};{}]  kappa {}", TypeMultiset::new(v.tau1.clone()).formal(), v.tkt),
        _ => println!("{}", ipad2(&v.presentation)?.render()),
    }
    Ok(0)
}

fn cover_cmd(a: &CoverArgs) -> Result<u8> {
    let tree = load_tree(&a.tree)?;
    let p = tree.root_node().presentation.prime();
    let max_order = match &a.max_order {
        Some(s) => parse_order(s, p)?,
        None => tree.max_order,
    };
    let mut c = cover(&a.anchor, &tree, max_order)?;
    if let Some(n) = a.n {
        c = n_cover(&c, n);
    }
    if let Some(ctx) = &a.ctx {
        c = shafarevich_cover(&c, &FieldContext::parse(ctx)?);
    }
    if c.truncated {
        eprintln!("warning: the tree is truncated; members beyond order {p}^{max_order} are not listed");
    }
    if a.format == Format::Json {
        emit(&serde_json::to_string_pretty(&c)?, None)?;
        return Ok(0);
    }
    println!("{:<40} {:>6} {:>3} {:>3} {:>3} {:>3} {:>3}", "member", "order", "cl", "cc", "dl", "mu", "nu");
    for m in &c.members {
        println!(
            "{:<40} {:>6} {:>3} {:>3} {:>3} {:>3} {:>3}{}",
            m.label,
            format!("{p}^{}", m.order_exponent),
            m.class,
            m.coclass,
            m.derived_length,
            m.mu,
            m.nu,
            if m.ambiguous { "  (unconfirmed)" } else { "" }
        );
    }
    for (l, why) in &c.excluded {
        println!("{l}: {why}");
    }
    match tower_length_inference(&c) {
        Ok(t) => println!("tower length: {}", t.exact.map(|l| l.to_string()).unwrap_or(format!(">= {}", t.lower_bound))),
        Err(EngineError::EmptyCandidates) => println!("tower length: no candidates"),
        Err(e) => return Err(e.into()),
    }
    Ok(0)
}

fn selected(ds: &Dataset, d: Option<i64>) -> Result<Vec<FieldRecord>> {
    let recs: Vec<FieldRecord> = ds.records.iter().filter(|r| d.is_none() || r.discriminant == d).cloned().collect();
    if recs.is_empty() {
        return Err(Exit(1, "no matching records".into()).into());
    }
    Ok(recs)
}

fn length_cell(r: &IdentificationResult) -> String {
    match &r.tower_length {
        Some(t) => t.exact.map(|l| l.to_string()).unwrap_or(format!(">={}", t.lower_bound)),
        None => "-".into(),
    }
}

fn identify_cmd(a: &IdentifyArgs) -> Result<u8> {
    let tree = load_tree(&a.tree)?;
    let ds = load_fields(&a.fields, a.strict)?;
    let results = fields::identify_all(&selected(&ds, a.d)?, &tree)?;
    if a.format == Format::Json {
        let rows: Vec<_> = results.iter().map(|(r, res)| serde_json::json!({"record": r, "result": res})).collect();
        emit(&serde_json::to_string_pretty(&rows)?, None)?;
    } else {
        println!("{:>12} {:>4} {:>3}  {:<48} second derived quotient", "d", "item", "len", "tower group candidates");
        for (r, res) in &results {
            println!(
                "{:>12} {:>4} {:>3}  {:<48} {}",
                r.display_discriminant(),
                r.item.map(|i| i.to_string()).unwrap_or_default(),
                length_cell(res),
                if res.matched_labels.is_empty() { "none".into() } else { res.matched_labels.join(", ") },
                res.metabelianization.as_deref().unwrap_or("-")
            );
            for msg in &res.diagnostics {
                eprintln!("note: d={}: {msg}", r.display_discriminant());
            }
        }
    }
    if tree.budget_exhausted {
        eprintln!("warning: the tree was cut short by its vertex budget");
        return Ok(2);
    }
    let unmatched = results.iter().filter(|(_, r)| r.matched_labels.is_empty()).count();
    Ok(if unmatched > 0 { 1 } else { 0 })
}

fn report_cmd(a: &IdentifyArgs) -> Result<u8> {
    let tree = load_tree(&a.tree)?;
    let ds = load_fields(&a.fields, a.strict)?;
    let mut reports = Vec::new();
    for (r, res) in fields::identify_all(&selected(&ds, a.d)?, &tree)? {
        reports.push(fields::info_report(&res, &r, &tree)?);
    }
    if a.format == Format::Json {
        emit(&serde_json::to_string_pretty(&reports)?, None)?;
    } else {
        for rep in &reports {
            print!("{rep}");
        }
    }
    Ok(0)
}

fn export(a: &ExportArgs) -> Result<u8> {
    let tree = load_tree(&a.tree)?;
    let text = if a.dot { to_dot(&tree) } else { tree.to_json()? };
    emit(&text, a.out.as_deref())?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
        .map_err(|e| anyhow!("thread pool: {e}"))?;
    match &cli.command {
        Command::Tree(TreeCmd::Build(a)) => tree_build(a),
        Command::Tree(TreeCmd::Show { tree }) => tree_show(tree),
        Command::Group(a) => group(a),
        Command::Artin(a) => artin(a),
        Command::Cover(a) => cover_cmd(a),
        Command::Identify(a) => identify_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::Export(a) => export(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
