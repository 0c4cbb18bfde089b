//! Seeded generation of (store, view, view update) cases and a fuzz driver
//! that classifies and verifies them.
//!
//! Stores follow one fixed vocabulary:
//!
//! ```text
//! r/A*   A: B, C*, H, K?, N?      C: D, F?, E?    F: G    K: L*
//! s/P*   P: Q, R
//! ```
//!
//! Leaves draw their text from `{"1","2","3"}` so conditions hit often.
//! Join atoms only compare single-valued paths (B, D, H, Q, R).

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::lang::{parse_update, parse_view_def, UpdateStatement, ViewDef};
use crate::translator::{translate_with, Guards, TranslationOutcome};
use crate::verifier::{verify, VerificationReport};
use crate::xml::{DocumentStore, XmlTree};

const POOL: [&str; 3] = ["1", "2", "3"];

/// Shape of generated view/update pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Random bindings, conditions, returns and updates.
    General,
    /// A join between two variables; condition on one side, target on the
    /// other variable.
    Join,
    /// Join views whose update targets a prefix of a join path.
    JoinPrefix,
    /// Every return uses one variable; label and wrapper deletions.
    SingleVar,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::General,
        Family::Join,
        Family::JoinPrefix,
        Family::SingleVar,
    ];
}

/// A generated triple. `view_text`/`update_text` are what was parsed.
#[derive(Debug, Clone)]
pub struct FuzzCase {
    pub family: Family,
    pub view_text: String,
    pub update_text: String,
    pub view: ViewDef,
    pub update: UpdateStatement,
    pub store: DocumentStore,
}

fn val(rng: &mut impl Rng) -> &'static str {
    POOL.choose(rng).expect("non-empty pool")
}

fn leaf(rng: &mut impl Rng, label: &str) -> XmlTree {
    XmlTree::text(label, val(rng))
}

/// A random store with documents `r` and `s`.
pub fn random_store(rng: &mut impl Rng) -> DocumentStore {
    let mut a_nodes = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut kids = vec![leaf(rng, "B")];
        for _ in 0..rng.gen_range(0..=3) {
            let mut c = vec![leaf(rng, "D")];
            if rng.gen_bool(0.5) {
                c.push(XmlTree::element("F", vec![leaf(rng, "G")]));
            }
            if rng.gen_bool(0.4) {
                c.push(leaf(rng, "E"));
            }
            kids.push(XmlTree::element("C", c));
        }
        kids.push(leaf(rng, "H"));
        if rng.gen_bool(0.5) {
            let ls = (0..rng.gen_range(0..=2)).map(|_| leaf(rng, "L")).collect();
            kids.push(XmlTree::element("K", ls));
        }
        if rng.gen_bool(0.4) {
            kids.push(leaf(rng, "N"));
        }
        a_nodes.push(XmlTree::element("A", kids));
    }
    let p_nodes = (0..rng.gen_range(1..=3))
        .map(|_| XmlTree::element("P", vec![leaf(rng, "Q"), leaf(rng, "R")]))
        .collect();
    DocumentStore::new()
        .with("r", XmlTree::element("r", a_nodes))
        .with("s", XmlTree::element("s", p_nodes))
}

/// Label a return expression contributes, given its text (`x/C/F` → F).
fn label_of(ret: &str, bound: &[(&str, &str)]) -> String {
    match ret.rsplit_once('/') {
        Some((_, l)) => l.to_string(),
        None => bound
            .iter()
            .find(|(v, _)| *v == ret)
            .map(|(_, l)| l.to_string())
            .unwrap_or_default(),
    }
}

/// Paths below a node with the given label.
fn sub_paths(label: &str) -> &'static [&'static str] {
    match label {
        "A" => &["", "B", "H", "C", "C/D", "C/F", "C/F/G", "C/E", "K", "K/L", "N"],
        "C" => &["", "D", "F", "F/G", "E"],
        "F" => &["", "G"],
        "K" => &["", "L"],
        "P" => &["", "Q", "R"],
        _ => &[""],
    }
}

fn child_labels(label: &str) -> &'static [&'static str] {
    match label {
        "A" => &["B", "C", "H", "K", "N"],
        "C" => &["D", "F", "E"],
        "F" => &["G"],
        "K" => &["L"],
        "P" => &["Q", "R"],
        _ => &[],
    }
}

fn payload(rng: &mut impl Rng, label: &str) -> String {
    let v = val(rng);
    match label {
        "C" => format!("<C><D>{v}</D></C>"),
        "F" => format!("<F><G>{v}</G></F>"),
        "K" => format!("<K><L>{v}</L></K>"),
        _ => format!("<{label}>{v}</{label}>"),
    }
}

/// An action for a node whose label is `label`.
fn action(rng: &mut impl Rng, label: &str) -> String {
    let kids = child_labels(label);
    let pick = kids.choose(rng).copied();
    match (rng.gen_range(0..3), pick) {
        (0, Some(k)) => format!("delete {k}"),
        (1, Some(k)) if !matches!(k, "C" | "F" | "K") => {
            format!("delete <{k}>{}</{k}>", val(rng))
        }
        (_, Some(k)) if rng.gen_bool(0.7) => format!("insert {}", payload(rng, k)),
        _ => format!("insert {}", payload(rng, "M")),
    }
}

fn join_path(base: &str, sub: &str) -> String {
    if sub.is_empty() {
        base.to_string()
    } else {
        format!("{base}/{sub}")
    }
}

fn last_label(label: &str, sub: &str) -> String {
    sub.rsplit('/').next().filter(|s| !s.is_empty()).unwrap_or(label).to_string()
}

fn view_text(bindings: &[String], atoms: &[String], returns: &[String]) -> String {
    let mut t = format!("<v>{{for {}", bindings.join(", "));
    if !atoms.is_empty() {
        t.push_str(&format!(" where {}", atoms.join(" and ")));
    }
    let rs: String = returns.iter().map(|r| format!("{{{r}}}")).collect();
    t.push_str(&format!(" return <e>{rs}</e>}}</v>"));
    t
}

/// Picks returns with distinct labels, in the order drawn.
fn pick_returns(
    rng: &mut impl Rng,
    candidates: &[&str],
    bound: &[(&str, &str)],
    range: std::ops::RangeInclusive<usize>,
) -> Vec<(String, String)> {
    let mut pool: Vec<&str> = candidates.to_vec();
    pool.shuffle(rng);
    let want = rng.gen_range(range);
    let mut out: Vec<(String, String)> = Vec::new();
    for r in pool {
        let l = label_of(r, bound);
        if out.iter().all(|(_, m)| *m != l) {
            out.push((r.to_string(), l));
        }
        if out.len() == want {
            break;
        }
    }
    out
}

/// Condition and target at `v/e/L/θ` for a chosen return.
fn view_path(rng: &mut impl Rng, label: &str) -> (String, String) {
    let sub = *sub_paths(label).choose(rng).expect("non-empty");
    (join_path(label, sub), last_label(label, sub))
}

fn general(rng: &mut impl Rng) -> (String, String) {
    let use_y = rng.gen_bool(0.6);
    let use_w = rng.gen_bool(0.4);
    let mut bindings = vec![r#"x in doc("r")/r/A"#.to_string()];
    let mut bound = vec![("x", "A")];
    if use_y {
        bindings.push("y in x/C".into());
        bound.push(("y", "C"));
    }
    if use_w {
        bindings.push(r#"w in doc("s")/s/P"#.into());
        bound.push(("w", "P"));
    }
    let has = |v: &str| bound.iter().any(|(b, _)| *b == v);

    let mut atoms: Vec<String> = Vec::new();
    let mut atom_pool: Vec<String> = vec![
        format!("x/B=\"{}\"", val(rng)),
        format!("x/H=\"{}\"", val(rng)),
    ];
    if has("y") {
        atom_pool.push(format!("y/D=\"{}\"", val(rng)));
        atom_pool.push("y/D=x/H".into());
    }
    if has("w") {
        atom_pool.push(format!("w/Q=\"{}\"", val(rng)));
        atom_pool.push("w/Q=x/B".into());
        if has("y") {
            atom_pool.push("w/R=y/D".into());
        }
    }
    atom_pool.shuffle(rng);
    atoms.extend(atom_pool.into_iter().take(rng.gen_range(0..=2)));

    let mut cands = vec!["x/B", "x/H", "x/K", "x/N", "x/C", "x"];
    if has("y") {
        cands.extend(["y/D", "y/F", "y/F/G", "y/E", "y"]);
    }
    if has("w") {
        cands.extend(["w/Q", "w/R", "w"]);
    }
    let returns = pick_returns(rng, &cands, &bound, 1..=4);
    let view = view_text(
        &bindings,
        &atoms,
        &returns.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>(),
    );

    let (rc, lc) = returns.choose(rng).expect("at least one return");
    let (cond, _) = view_path(rng, lc);
    let var_of = |r: &str| r.split('/').next().unwrap_or_default().to_string();
    let same_var: Vec<&(String, String)> = returns
        .iter()
        .filter(|(r, l)| l != lc && var_of(r) == var_of(rc))
        .collect();
    let update = match rng.gen_range(0..10) {
        0 => format!(
            "for u in v where u/e/{cond}=\"{}\" update u {{ {} }}",
            val(rng),
            if rng.gen_bool(0.5) { "delete e".to_string() } else { format!("insert <e>{}</e>", payload(rng, "B")) }
        ),
        1 => {
            let (_, lt) = returns.choose(rng).expect("non-empty");
            let act = if rng.gen_bool(0.5) {
                format!("delete {lt}")
            } else {
                format!("insert {}", payload(rng, lt))
            };
            format!("for r in v/e where r/{cond}=\"{}\" update r {{ {act} }}", val(rng))
        }
        _ => {
            let (_, lt) = match same_var.choose(rng) {
                Some(pair) if rng.gen_bool(0.6) => *pair,
                _ => returns.choose(rng).expect("non-empty"),
            };
            let (target, tl) = view_path(rng, lt);
            format!(
                "for r in v/e where r/{cond}=\"{}\" update r/{target} {{ {} }}",
                val(rng),
                action(rng, &tl)
            )
        }
    };
    (view, update)
}

fn join(rng: &mut impl Rng) -> (String, String) {
    let cross_doc = rng.gen_bool(0.4);
    let mut bindings = vec![r#"x in doc("r")/r/A"#.to_string(), "y in x/C".to_string()];
    let (atom, cond_ret, cond_label) = if cross_doc {
        bindings.push(r#"w in doc("s")/s/P"#.into());
        let a = if rng.gen_bool(0.5) { "w/Q=y/D" } else { "y/D=w/Q" };
        (a, "w/Q", "Q")
    } else {
        bindings.push("z in x/H".into());
        let a = if rng.gen_bool(0.5) { "y/D=z" } else { "z=y/D" };
        (a, "z", "H")
    };
    let mut atoms = vec![atom.to_string()];
    if rng.gen_bool(0.3) {
        atoms.push(format!("x/B=\"{}\"", val(rng)));
    }
    let (target_ret, target_label) = *[("y/F", "F"), ("y/F/G", "G"), ("y/E", "E")]
        .choose(rng)
        .expect("non-empty");
    let mut returns = vec![cond_ret.to_string(), target_ret.to_string()];
    if rng.gen_bool(0.5) {
        returns.push((*["x/B", "x/N"].choose(rng).expect("non-empty")).to_string());
    }
    returns.shuffle(rng);
    let view = view_text(&bindings, &atoms, &returns);
    let (target, tl) = view_path(rng, target_label);
    let update = format!(
        "for r in v/e where r/{cond_label}=\"{}\" update r/{target} {{ {} }}",
        val(rng),
        action(rng, &tl)
    );
    (view, update)
}

fn join_prefix(rng: &mut impl Rng) -> (String, String) {
    let bindings = vec![
        r#"x in doc("r")/r/A"#.to_string(),
        "y in x/C".to_string(),
        "z in x/H".to_string(),
    ];
    let atoms = vec!["y/D=z".to_string()];
    let c_ret = if rng.gen_bool(0.5) { "x/C" } else { "y" };
    let mut returns = vec!["x/B".to_string(), c_ret.to_string(), "z".to_string()];
    returns.shuffle(rng);
    let view = view_text(&bindings, &atoms, &returns);
    let (cond, target) = if rng.gen_bool(0.6) {
        let cond = if rng.gen_bool(0.5) { "B" } else { "H" };
        let target = if rng.gen_bool(0.7) { "C" } else { "C/D" };
        (cond, target)
    } else {
        ("B", "H")
    };
    // C targets mostly get actions that change the joined D values
    let act = match (target, rng.gen_range(0..10)) {
        ("C", 0..=3) => "delete D".to_string(),
        ("C", 4..=6) => format!("insert {}", payload(rng, "D")),
        _ => action(rng, target.rsplit('/').next().unwrap_or(target)),
    };
    let update = format!(
        "for r in v/e where r/{cond}=\"{}\" update r/{target} {{ {act} }}",
        val(rng)
    );
    (view, update)
}

fn single_var(rng: &mut impl Rng) -> (String, String) {
    let over_a = rng.gen_bool(0.7);
    let mut bindings = vec![if over_a {
        r#"x1 in doc("r")/r/A"#.to_string()
    } else {
        r#"x1 in doc("r")/r/A/C"#.to_string()
    }];
    let mut atoms = Vec::new();
    if over_a && rng.gen_bool(0.3) {
        bindings.push("y in x1/C".into());
        atoms.push(format!("y/D=\"{}\"", val(rng)));
    }
    if rng.gen_bool(0.3) {
        let p = if over_a { "x1/B" } else { "x1/D" };
        atoms.push(format!("{p}=\"{}\"", val(rng)));
    }
    let cands: &[&str] = if over_a {
        &["x1/B", "x1/H", "x1/K", "x1/N", "x1/C"]
    } else {
        &["x1/D", "x1/F", "x1/E", "x1/F/G"]
    };
    let bound = [("x1", if over_a { "A" } else { "C" })];
    let returns = pick_returns(rng, cands, &bound, 2..=3);
    let view = view_text(
        &bindings,
        &atoms,
        &returns.iter().map(|(r, _)| r.clone()).collect::<Vec<_>>(),
    );
    let mut labels: Vec<&str> = returns.iter().map(|(_, l)| l.as_str()).collect();
    labels.shuffle(rng);
    let (cond, _) = view_path(rng, labels[0]);
    let update = if rng.gen_bool(0.5) {
        format!(
            "for r in v/e where r/{cond}=\"{}\" update r {{ delete {} }}",
            val(rng),
            labels[1]
        )
    } else {
        format!(
            "for u in v where u/e/{cond}=\"{}\" update u {{ delete e }}",
            val(rng)
        )
    };
    (view, update)
}

/// One random case of the given family.
pub fn random_case(rng: &mut impl Rng, family: Family) -> FuzzCase {
    let (view_text, update_text) = match family {
        Family::General => general(rng),
        Family::Join => join(rng),
        Family::JoinPrefix => join_prefix(rng),
        Family::SingleVar => single_var(rng),
    };
    let view = parse_view_def(&view_text)
        .unwrap_or_else(|e| panic!("generated view does not parse ({e}): {view_text}"));
    let update = parse_update(&update_text)
        .unwrap_or_else(|e| panic!("generated update does not parse ({e}): {update_text}"));
    FuzzCase {
        family,
        view_text,
        update_text,
        view,
        update,
        store: random_store(rng),
    }
}

/// A case after translation and, if translated, verification.
#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case: FuzzCase,
    pub outcome: TranslationOutcome,
    pub report: Option<VerificationReport>,
}

impl CaseResult {
    /// Verified cases must be correct, minimal, and pass L1, L3 and L4.
    pub fn failed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| {
            !r.passed() || ["L1", "L3", "L4"].iter().any(|l| r.lemma(l) != Some(true))
        })
    }
}

pub fn run_case(case: FuzzCase, guards: Guards) -> Result<CaseResult> {
    let outcome = translate_with(&case.view, &case.update, guards)?;
    let report = match outcome.translated() {
        Some(ds) => Some(verify(&case.view, &case.update, ds, &case.store)?),
        None => None,
    };
    Ok(CaseResult {
        case,
        outcome,
        report,
    })
}

/// Draws cases of one family until `n` satisfy `keep` or `n * 500`
/// attempts have been made. Only cases that are kept get verified.
pub fn collect(
    seed: u64,
    family: Family,
    n: usize,
    guards: Guards,
    keep: impl Fn(&TranslationOutcome) -> bool,
) -> Result<Vec<CaseResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..n.saturating_mul(500) {
        if out.len() == n {
            break;
        }
        let case = random_case(&mut rng, family);
        let outcome = translate_with(&case.view, &case.update, guards)?;
        if !keep(&outcome) {
            continue;
        }
        let report = match outcome.translated() {
            Some(ds) => Some(verify(&case.view, &case.update, ds, &case.store)?),
            None => None,
        };
        out.push(CaseResult {
            case,
            outcome,
            report,
        });
    }
    Ok(out)
}

/// Histogram and failures of a fuzz run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub seed: u64,
    pub count: usize,
    pub histogram: BTreeMap<String, usize>,
    pub verified: usize,
    /// `(case number, view, update)` of every oracle failure.
    pub failures: Vec<(usize, String, String)>,
}

impl FuzzSummary {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "count": self.count,
            "histogram": self.histogram,
            "verified": self.verified,
            "failures": self.failures.iter().map(|(i, v, u)| serde_json::json!({
                "case": i, "view": v, "update": u,
            })).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for FuzzSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {} count {}", self.seed, self.count)?;
        for (k, v) in &self.histogram {
            writeln!(f, "{k:<42} {v}")?;
        }
        writeln!(f, "verified {}", self.verified)?;
        writeln!(f, "failures {}", self.failures.len())?;
        for (i, v, u) in &self.failures {
            writeln!(f, "  case {i}: {v}\n    {u}")?;
        }
        Ok(())
    }
}

/// Generates `count` cases across all families, translating each and
/// verifying every translated one.
pub fn fuzz(seed: u64, count: usize) -> Result<FuzzSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = FuzzSummary {
        seed,
        count,
        ..FuzzSummary::default()
    };
    for i in 0..count {
        let family = *Family::ALL.choose(&mut rng).expect("non-empty");
        let case = random_case(&mut rng, family);
        let res = run_case(case, Guards::default())?;
        *summary.histogram.entry(res.outcome.tag()).or_default() += 1;
        if res.report.is_some() {
            summary.verified += 1;
        }
        if res.failed() {
            summary
                .failures
                .push((i, res.case.view_text.clone(), res.case.update_text.clone()));
        }
    }
    Ok(summary)
}
