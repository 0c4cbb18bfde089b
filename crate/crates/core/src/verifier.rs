//! Executable precision checks for a (view, view update, source update,
//! store) quadruple.
//!
//! *Correctness*: evaluating the view over the updated store gives the same
//! ordered value tree as applying the view update to the evaluated view.
//! *Minimality*: no single edit of the source run can be left out while
//! keeping correctness. The lemma checks look at one instance in detail:
//!
//! - `L1`: every context selected by the condition has all of its targets
//!   updated, and no other node is.
//! - `L2`: tuples that satisfied the view condition still do afterwards.
//! - `L3`: the source condition holds on a tuple exactly when the view
//!   condition holds on its wrapper tree.
//! - `L4`: updated targets are value-equal on both routes, and wrapper
//!   trees deleted in the view have no counterpart after re-evaluation.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::json;

use crate::error::Result;
use crate::evaluator::{eval_condition, evaluate_view, fortup, fortup_in, Source, ViewInstance};
use crate::lang::{Action, ConditionAtom, UpdateStatement, ViewDef};
use crate::translator::map_paths;
use crate::updater::{
    abstract_form, apply_update, apply_update_traced, replay, Edit, UpdateTarget,
};
use crate::xml::{serialize, DocumentStore, NodeId, XmlTree};

/// First point where two view instances differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diff {
    /// Label path with 1-based sibling positions, e.g. `Qbk/use[2]/auths`.
    pub at: String,
    /// Subtree in the view re-evaluated over the updated source.
    pub from_source: String,
    /// Subtree in the directly updated view.
    pub from_view: String,
}

fn first_divergence(a: Option<&XmlTree>, b: Option<&XmlTree>, at: String) -> Option<Diff> {
    let show = |t: Option<&XmlTree>| t.map(serialize).unwrap_or_else(|| "(absent)".into());
    let differ = |at: String| {
        Some(Diff {
            at,
            from_source: show(a),
            from_view: show(b),
        })
    };
    let (x, y) = match (a, b) {
        (Some(x), Some(y)) => (x, y),
        (None, None) => return None,
        _ => return differ(at),
    };
    if x.label() != y.label() || x.is_text() != y.is_text() || x.text_value() != y.text_value() {
        return differ(at);
    }
    let n = x.children().len().max(y.children().len());
    for i in 0..n {
        let (cx, cy) = (x.children().get(i), y.children().get(i));
        let label = cx.or(cy).map(XmlTree::label).unwrap_or_default();
        if let Some(d) = first_divergence(cx, cy, format!("{at}/{label}[{}]", i + 1)) {
            return Some(d);
        }
    }
    None
}

/// `(A, B)`: view over the updated source, and the updated view.
fn both_routes(
    v: &ViewDef,
    dv: &UpdateStatement,
    ds: &UpdateStatement,
    s: &DocumentStore,
) -> Result<(XmlTree, XmlTree)> {
    let mut s1 = s.clone();
    apply_update(ds, UpdateTarget::Store(&mut s1))?;
    let a = evaluate_view(v, &s1)?.tree;
    let mut b = evaluate_view(v, s)?.tree;
    apply_update(dv, UpdateTarget::View(&mut b))?;
    Ok((a, b))
}

/// Correctness check; on failure, the first divergence.
pub fn check_correctness(
    v: &ViewDef,
    dv: &UpdateStatement,
    ds: &UpdateStatement,
    s: &DocumentStore,
) -> Result<(bool, Option<Diff>)> {
    let (a, b) = both_routes(v, dv, ds, s)?;
    if a.value_eq(&b) {
        return Ok((true, None));
    }
    let diff = first_divergence(Some(&a), Some(&b), a.label().to_string());
    Ok((false, diff))
}

/// Leave-one-edit-out minimality check; on failure, an edit that was not
/// needed.
pub fn check_minimality(
    v: &ViewDef,
    dv: &UpdateStatement,
    ds: &UpdateStatement,
    s: &DocumentStore,
) -> Result<(bool, Option<Edit>)> {
    let mut s1 = s.clone();
    let log = apply_update(ds, UpdateTarget::Store(&mut s1))?;
    let mut b = evaluate_view(v, s)?.tree;
    apply_update(dv, UpdateTarget::View(&mut b))?;
    for i in 0..log.len() {
        let mut variant = s.clone();
        let rest: Vec<Edit> = log
            .edits
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, e)| e.clone())
            .collect();
        replay(&mut variant, &rest);
        if evaluate_view(v, &variant)?.tree.value_eq(&b) {
            return Ok((false, Some(log.edits[i].clone())));
        }
    }
    Ok((true, None))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaCheck {
    pub lemma: &'static str,
    pub pass: bool,
}

/// Nodes a source statement's tuple would touch.
fn tuple_targets(ds: &UpdateStatement, t: &crate::evaluator::Tuple<'_>, s: &DocumentStore) -> Vec<NodeId> {
    if let Action::DeleteBinding(var) = &ds.action {
        return t.get(var).map(|n| vec![n.id()]).unwrap_or_default();
    }
    t.locate(&ds.target.var_path())
        .into_iter()
        .filter_map(|n| {
            if ds.target.parent {
                s.parent_of(n.id()).map(XmlTree::id)
            } else {
                Some(n.id())
            }
        })
        .collect()
}

fn lemma1(
    ds: &UpdateStatement,
    dv: &UpdateStatement,
    s: &DocumentStore,
    inst: &ViewInstance,
) -> Result<bool> {
    let mut s1 = s.clone();
    let applied = apply_update_traced(ds, UpdateTarget::Store(&mut s1))?;
    let touched: HashSet<NodeId> = applied.targets.iter().copied().collect();
    let mut expected = HashSet::new();
    for t in fortup_in(&ds.bindings, Source::Store(s))? {
        if eval_condition(&ds.conditions, &t) {
            expected.extend(tuple_targets(ds, &t, s));
        }
    }
    if touched != expected {
        return Ok(false);
    }

    let mut view = inst.tree.clone();
    let applied = apply_update_traced(dv, UpdateTarget::View(&mut view))?;
    let touched: HashSet<NodeId> = applied.targets.iter().copied().collect();
    let a = abstract_form(dv, None)?;
    if a.ps.steps.len() < 2 {
        // root deletions act on whole wrapper trees
        return Ok(true);
    }
    let rel = a.target_full.steps.skip(2);
    for e in inst.tree.children() {
        let targets = e.locate(&rel);
        let hit = targets.iter().filter(|n| touched.contains(&n.id())).count();
        if hit != 0 && hit != targets.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lemma2(v: &ViewDef, ds: &UpdateStatement, s: &DocumentStore) -> Result<bool> {
    let before: Vec<Vec<NodeId>> = fortup(v, s)?
        .iter()
        .filter(|t| eval_condition(&v.conditions, t))
        .map(|t| t.ids())
        .collect();
    let mut s1 = s.clone();
    apply_update(ds, UpdateTarget::Store(&mut s1))?;
    let after = fortup(v, &s1)?;
    Ok(before.iter().all(|ids| {
        after
            .iter()
            .find(|t| &t.ids() == ids)
            .is_none_or(|t| eval_condition(&v.conditions, t))
    }))
}

fn lemma3(v: &ViewDef, dv: &UpdateStatement, s: &DocumentStore, inst: &ViewInstance) -> Result<bool> {
    let a = abstract_form(dv, Some(v))?;
    let Ok(m) = map_paths(v, &a) else {
        return Ok(false);
    };
    let Some(src) = m.cond.source() else {
        return Ok(false);
    };
    let atom = [ConditionAtom::PathEqString(src, a.literal.clone())];
    let rel = a.cond_full.steps.skip(2);
    let tuples = fortup(v, s)?;
    for rec in inst.provenance.etrees() {
        let Some(e) = inst.etree(rec.tuple_index) else {
            return Ok(false);
        };
        let in_view = e.locate(&rel).iter().any(|n| n.string_value() == a.literal);
        if in_view != eval_condition(&atom, &tuples[rec.tuple_index]) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn lemma4(
    v: &ViewDef,
    dv: &UpdateStatement,
    ds: &UpdateStatement,
    s: &DocumentStore,
    inst: &ViewInstance,
) -> Result<bool> {
    let mut s1 = s.clone();
    apply_update(ds, UpdateTarget::Store(&mut s1))?;
    let after = evaluate_view(v, &s1)?;
    let mut view = inst.tree.clone();
    let applied = apply_update_traced(dv, UpdateTarget::View(&mut view))?;
    let touched: HashSet<NodeId> = applied.targets.iter().copied().collect();
    let a = abstract_form(dv, None)?;
    let rel = a.target_full.steps.skip(2);

    for rec in inst.provenance.etrees() {
        let counterpart = after
            .provenance
            .etrees()
            .iter()
            .find(|r| r.bindings == rec.bindings)
            .and_then(|r| after.tree.children().iter().find(|c| c.id() == r.etree));
        let Some(updated) = view.children().iter().find(|c| c.id() == rec.etree) else {
            // deleted in the view: must be gone after re-evaluation too
            if counterpart.is_some() {
                return Ok(false);
            }
            continue;
        };
        let original = inst.tree.children().iter().find(|c| c.id() == rec.etree);
        let was_touched = original
            .map(|o| o.descendants().any(|n| touched.contains(&n.id())))
            .unwrap_or(false);
        if !was_touched {
            continue;
        }
        let Some(counterpart) = counterpart else {
            return Ok(false);
        };
        let xs = updated.locate(&rel);
        let ys = counterpart.locate(&rel);
        if xs.len() != ys.len() || xs.iter().zip(&ys).any(|(x, y)| !x.value_eq(y)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Runs the four lemma checks on one instance.
pub fn run_lemma_suite(
    v: &ViewDef,
    dv: &UpdateStatement,
    ds: &UpdateStatement,
    s: &DocumentStore,
) -> Result<Vec<LemmaCheck>> {
    let inst = evaluate_view(v, s)?;
    Ok(vec![
        LemmaCheck {
            lemma: "L1",
            pass: lemma1(ds, dv, s, &inst)?,
        },
        LemmaCheck {
            lemma: "L2",
            pass: lemma2(v, ds, s)?,
        },
        LemmaCheck {
            lemma: "L3",
            pass: lemma3(v, dv, s, &inst)?,
        },
        LemmaCheck {
            lemma: "L4",
            pass: lemma4(v, dv, ds, s, &inst)?,
        },
    ])
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub correct: bool,
    pub diff: Option<Diff>,
    /// Only established when `correct`; false otherwise.
    pub minimal: bool,
    pub witness: Option<Edit>,
    pub lemmas: Vec<LemmaCheck>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.correct && self.minimal
    }

    pub fn lemma(&self, id: &str) -> Option<bool> {
        self.lemmas.iter().find(|l| l.lemma == id).map(|l| l.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "correct": self.correct,
            "minimal": self.minimal,
            "diff": self.diff,
            "witness": self.witness.as_ref().map(Edit::to_json),
            "lemmas": self.lemmas,
        })
    }
}

/// Correctness, minimality (when correct) and the lemma checks.
pub fn verify(
    v: &ViewDef,
    dv: &UpdateStatement,
    ds: &UpdateStatement,
    s: &DocumentStore,
) -> Result<VerificationReport> {
    let (correct, diff) = check_correctness(v, dv, ds, s)?;
    let (minimal, witness) = if correct {
        check_minimality(v, dv, ds, s)?
    } else {
        (false, None)
    };
    Ok(VerificationReport {
        correct,
        diff,
        minimal,
        witness,
        lemmas: run_lemma_suite(v, dv, ds, s)?,
    })
}
