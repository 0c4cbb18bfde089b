//! Rewriting view updates into source updates.
//!
//! A view path `v/e/L/θ` is mapped back through the return expression whose
//! label is `L`. The pair of mapped condition and target paths is then
//! classified into one of four translatable shapes or rejected with a
//! reason:
//!
//! - **T1**: target inside a returned subtree, condition on the same variable.
//! - **T2**: as T1 but on different variables linked by a join atom whose one
//!   side is exactly the condition's source path.
//! - **T3**: `delete L` at the wrapper element of a single-variable view.
//! - **T4**: deleting wrapper elements at the view root of a single-variable
//!   view; the source statement removes the bound node.
//!
//! Every translation copies the view's for-clause and conditions and appends
//! the mapped condition last.

use std::fmt;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::lang::{
    normalize_path, Action, ConditionAtom, Level, Target, UpdateStatement, VarPath, ViewDef,
};
use crate::updater::{abstract_form, AbstractUpdate};
use crate::xml::{Path, QualifiedPath};

/// Where a view path lands after mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappedPath {
    /// The view root `v`.
    Root,
    /// The wrapper element `v/e`.
    Wrapper,
    /// `v/e/L/θ` with `L` the label of return `index` = `var/gamma`.
    Return {
        index: usize,
        var: String,
        gamma: Path,
        theta: Path,
    },
}

impl MappedPath {
    /// `var/gamma/theta`, for mapped return paths.
    pub fn source(&self) -> Option<VarPath> {
        match self {
            MappedPath::Return {
                var, gamma, theta, ..
            } => Some(VarPath::new(var.clone(), gamma.join(theta))),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub cond: MappedPath,
    pub target: MappedPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Case {
    T1,
    T2,
    T3,
    T4,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ReasonCode {
    InsertionAtWrapperOrRoot,
    NoUniqueSourcePlacement,
    ViolatesProduction,
    NoSpecifiableCondition,
    CondTargetDifferentVarsNoJoin,
    TargetPrefixOfWherePath,
    UnmappableName,
    MultiVariableReturnRootDeletion,
    /// The source change would also alter other returned subtrees, where
    /// paths, or bindings.
    SideEffectOverlap,
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub reason: ReasonCode,
    /// Finer classification under `reason`, used for wrapper/root inserts.
    pub cause: Option<ReasonCode>,
    pub detail: String,
}

impl Rejection {
    fn new(reason: ReasonCode, detail: impl Into<String>) -> Self {
        Rejection {
            reason,
            cause: None,
            detail: detail.into(),
        }
    }

    fn insertion(cause: ReasonCode, detail: impl Into<String>) -> Self {
        Rejection {
            reason: ReasonCode::InsertionAtWrapperOrRoot,
            cause: Some(cause),
            detail: detail.into(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut j = json!({
            "translatable": false,
            "reason": self.reason.to_string(),
            "detail": self.detail,
        });
        if let Some(c) = self.cause {
            j["cause"] = json!(c.to_string());
        }
        j
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TranslationOutcome {
    Translated { delta_s: UpdateStatement, case: Case },
    Rejected(Rejection),
}

impl TranslationOutcome {
    pub fn translated(&self) -> Option<&UpdateStatement> {
        match self {
            TranslationOutcome::Translated { delta_s, .. } => Some(delta_s),
            TranslationOutcome::Rejected(_) => None,
        }
    }

    pub fn case(&self) -> Option<Case> {
        match self {
            TranslationOutcome::Translated { case, .. } => Some(*case),
            TranslationOutcome::Rejected(_) => None,
        }
    }

    pub fn rejection(&self) -> Option<&Rejection> {
        match self {
            TranslationOutcome::Rejected(r) => Some(r),
            TranslationOutcome::Translated { .. } => None,
        }
    }

    /// Histogram key: `T1` … `T4` or `Rejected(Reason)`.
    pub fn tag(&self) -> String {
        match self {
            TranslationOutcome::Translated { case, .. } => case.to_string(),
            TranslationOutcome::Rejected(r) => format!("Rejected({})", r.reason),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            TranslationOutcome::Translated { delta_s, case } => json!({
                "translatable": true,
                "case": case.to_string(),
                "delta_s": delta_s.to_string(),
            }),
            TranslationOutcome::Rejected(r) => r.to_json(),
        }
    }
}

/// Classifier switches. Both guards are on by default; turning one off is
/// only meant for demonstrating what it protects against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guards {
    /// Reject when the target's source path is a prefix of a where path.
    pub prefix: bool,
    /// Reject when the target overlaps other returns, where paths or bindings.
    pub overlap: bool,
}

impl Default for Guards {
    fn default() -> Self {
        Guards {
            prefix: true,
            overlap: true,
        }
    }
}

fn map_one(v: &ViewDef, q: &QualifiedPath) -> std::result::Result<MappedPath, Rejection> {
    let names = q.steps.names();
    match names.len() {
        0 | 1 => return Ok(MappedPath::Root),
        _ if names[1] != v.wrapper => {
            return Err(Rejection::new(
                ReasonCode::UnmappableName,
                format!("`{}` is not the wrapper element `{}`", names[1], v.wrapper),
            ))
        }
        2 => return Ok(MappedPath::Wrapper),
        _ => {}
    }
    let label = &names[2];
    let index = v.return_index_for(label).ok_or_else(|| {
        Rejection::new(
            ReasonCode::UnmappableName,
            format!("no return expression is labelled `{label}`"),
        )
    })?;
    let r = &v.returns[index];
    Ok(MappedPath::Return {
        index,
        var: r.var.clone(),
        gamma: r.path.clone(),
        theta: q.steps.skip(3),
    })
}

/// Maps the condition and target paths of an abstract view update onto
/// return expressions.
pub fn map_paths(v: &ViewDef, a: &AbstractUpdate) -> std::result::Result<Mapping, Rejection> {
    Ok(Mapping {
        cond: map_one(v, &a.cond_full)?,
        target: map_one(v, &a.target_full)?,
    })
}

struct Ctx<'a> {
    v: &'a ViewDef,
    guards: Guards,
}

impl Ctx<'_> {
    fn norm(&self, vp: &VarPath) -> std::result::Result<QualifiedPath, Rejection> {
        self.v
            .normalize(vp)
            .map_err(|e| Rejection::new(ReasonCode::UnmappableName, e.to_string()))
    }

    /// Normalized where-paths of the would-be source statement.
    fn where_paths(&self, appended: &VarPath) -> std::result::Result<Vec<QualifiedPath>, Rejection> {
        let mut out = Vec::new();
        for atom in &self.v.conditions {
            for s in atom.sides() {
                out.push(self.norm(s)?);
            }
        }
        out.push(self.norm(appended)?);
        Ok(out)
    }

    fn return_paths(&self) -> std::result::Result<Vec<QualifiedPath>, Rejection> {
        self.v.returns.iter().map(|r| self.norm(r)).collect()
    }

    fn binding_paths(&self) -> std::result::Result<Vec<(String, QualifiedPath)>, Rejection> {
        self.v
            .bindings
            .iter()
            .map(|b| Ok((b.var.clone(), self.norm(&VarPath::bare(b.var.clone()))?)))
            .collect()
    }

    fn single_return_var(&self) -> std::result::Result<String, Rejection> {
        let first = &self.v.returns[0].var;
        if self.v.returns.iter().any(|r| &r.var != first) {
            return Err(Rejection::new(
                ReasonCode::MultiVariableReturnRootDeletion,
                "return expressions use more than one variable",
            ));
        }
        Ok(first.clone())
    }

    fn prefix_guard(
        &self,
        t: &QualifiedPath,
        wheres: &[QualifiedPath],
    ) -> std::result::Result<(), Rejection> {
        if !self.guards.prefix {
            return Ok(());
        }
        match wheres.iter().find(|w| t.is_prefix_of(w)) {
            Some(w) => Err(Rejection::new(
                ReasonCode::TargetPrefixOfWherePath,
                format!("target {t} is a prefix of where path {w}"),
            )),
            None => Ok(()),
        }
    }

    fn overlap(&self, detail: String) -> std::result::Result<(), Rejection> {
        if self.guards.overlap {
            Err(Rejection::new(ReasonCode::SideEffectOverlap, detail))
        } else {
            Ok(())
        }
    }
}

fn is_proper_prefix(a: &QualifiedPath, b: &QualifiedPath) -> bool {
    a.is_prefix_of(b) && a != b
}

/// Decides which translatable shape an update has, or why it has none.
pub fn classify(
    v: &ViewDef,
    a: &AbstractUpdate,
    m: &Mapping,
    guards: Guards,
) -> std::result::Result<Case, Rejection> {
    let ctx = Ctx { v, guards };

    if let Action::InsertTree(payload) = &a.action {
        match &m.target {
            MappedPath::Root => {
                return Err(Rejection::insertion(
                    ReasonCode::NoUniqueSourcePlacement,
                    "a new wrapper tree has no unique source placement",
                ))
            }
            MappedPath::Wrapper => {
                let label = payload.label();
                return Err(match v.return_index_for(label) {
                    Some(i) if v.returns[i].path.is_empty() => Rejection::insertion(
                        ReasonCode::ViolatesProduction,
                        format!("inserting `{label}` would add a binding outside any tuple"),
                    ),
                    Some(_) => Rejection::insertion(
                        ReasonCode::NoSpecifiableCondition,
                        format!("no source condition selects where `{label}` must go"),
                    ),
                    None => Rejection::insertion(
                        ReasonCode::ViolatesProduction,
                        format!("`{label}` is not produced by any return expression"),
                    ),
                });
            }
            MappedPath::Return { .. } => {}
        }
    }

    let cond_src = match m.cond.source() {
        Some(c) => c,
        None => {
            return Err(Rejection::new(
                ReasonCode::NoSpecifiableCondition,
                "condition tests a wrapper or root element as a whole",
            ))
        }
    };

    match &m.target {
        MappedPath::Return {
            index: t_idx,
            var: x_t,
            ..
        } => {
            if a.ps.steps.len() > 2 {
                return Err(Rejection::new(
                    ReasonCode::NoSpecifiableCondition,
                    "condition and target lie in the same returned subtree",
                ));
            }
            let target_src = m.target.source().expect("return slot");
            let t = ctx.norm(&target_src)?;
            let wheres = ctx.where_paths(&cond_src)?;
            ctx.prefix_guard(&t, &wheres)?;

            let child = a.action.child_label().map(|l| t.join(&Path::from_names([l])));
            if let Some(w) = wheres.iter().find(|w| is_proper_prefix(w, &t)) {
                ctx.overlap(format!("where path {w} contains target {t}"))?;
            }
            for (i, r) in ctx.return_paths()?.iter().enumerate() {
                if i == *t_idx {
                    continue;
                }
                let hit = r.is_prefix_of(&t) || child.as_ref().is_some_and(|c| c.is_prefix_of(r));
                if hit {
                    ctx.overlap(format!("target {t} overlaps return {}", v.returns[i]))?;
                }
            }
            if let Some(c) = &child {
                for (var, n) in ctx.binding_paths()? {
                    if c.is_prefix_of(&n) {
                        ctx.overlap(format!("action at {t} changes bindings of `{var}`"))?;
                    }
                }
            }

            if &cond_src.var == x_t {
                return Ok(Case::T1);
            }
            let joined = v.conditions.iter().any(|atom| match atom {
                ConditionAtom::PathEqPath(l, r) => {
                    (l == &cond_src && &r.var == x_t) || (r == &cond_src && &l.var == x_t)
                }
                ConditionAtom::PathEqString(..) => false,
            });
            if joined {
                Ok(Case::T2)
            } else {
                Err(Rejection::new(
                    ReasonCode::CondTargetDifferentVarsNoJoin,
                    format!(
                        "condition on `{}` and target on `{x_t}` are not linked by a join on {cond_src}",
                        cond_src.var
                    ),
                ))
            }
        }

        MappedPath::Wrapper => {
            let Action::DeleteLabel(lt) = &a.action else {
                return Err(Rejection::new(
                    ReasonCode::NoSpecifiableCondition,
                    "only label deletion is supported at the wrapper element",
                ));
            };
            let x1 = ctx.single_return_var()?;
            let t_idx = match v.return_index_for(lt) {
                Some(i) if !v.returns[i].path.is_empty() => i,
                Some(_) => {
                    return Err(Rejection::new(
                        ReasonCode::ViolatesProduction,
                        format!("`{lt}` is the bound node itself"),
                    ))
                }
                None => {
                    return Err(Rejection::new(
                        ReasonCode::UnmappableName,
                        format!("no return expression is labelled `{lt}`"),
                    ))
                }
            };
            if let MappedPath::Return { index, .. } = &m.cond {
                if *index == t_idx {
                    return Err(Rejection::new(
                        ReasonCode::NoSpecifiableCondition,
                        "condition selects among the subtrees being deleted",
                    ));
                }
            }
            let gamma_t = &v.returns[t_idx].path;
            let d = ctx.norm(&VarPath::new(x1.clone(), gamma_t.clone()))?;
            let p = d.parent().expect("non-empty gamma");
            let wheres = ctx.where_paths(&cond_src)?;
            ctx.prefix_guard(&d, &wheres)?;
            if let Some(w) = wheres.iter().find(|w| w.is_prefix_of(&p)) {
                ctx.overlap(format!("where path {w} contains {p}"))?;
            }
            for (i, r) in ctx.return_paths()?.iter().enumerate() {
                if i != t_idx && (d.is_prefix_of(r) || r.is_prefix_of(&p)) {
                    ctx.overlap(format!("deleting {d} also changes return {}", v.returns[i]))?;
                }
            }
            for (var, n) in ctx.binding_paths()? {
                if d.is_prefix_of(&n) {
                    ctx.overlap(format!("deleting {d} removes bindings of `{var}`"))?;
                }
            }
            Ok(Case::T3)
        }

        MappedPath::Root => {
            match &a.action {
                Action::DeleteLabel(l) if *l == v.wrapper => {}
                _ => {
                    return Err(Rejection::new(
                        ReasonCode::ViolatesProduction,
                        "only wrapper elements can be deleted at the view root",
                    ))
                }
            }
            let x1 = ctx.single_return_var()?;
            let n1 = ctx.norm(&VarPath::bare(x1.clone()))?;
            if n1.steps.len() <= 1 {
                return Err(Rejection::new(
                    ReasonCode::ViolatesProduction,
                    format!("`{x1}` is bound to a document root"),
                ));
            }
            let chained = chained_from(v, &x1);
            for (var, n) in ctx.binding_paths()? {
                if !chained.contains(&var) && n1.is_prefix_of(&n) {
                    ctx.overlap(format!("deleting `{x1}` also removes bindings of `{var}`"))?;
                }
            }
            let mut sides: Vec<&VarPath> = v.conditions.iter().flat_map(|c| c.sides()).collect();
            sides.push(&cond_src);
            for s in sides {
                if chained.contains(&s.var) {
                    continue;
                }
                let n = ctx.norm(s)?;
                if n1.is_prefix_of(&n) || n.is_prefix_of(&n1) {
                    ctx.overlap(format!("where path {n} depends on `{x1}`'s subtree"))?;
                }
            }
            Ok(Case::T4)
        }
    }
}

/// `x` plus every variable whose binding chain passes through it.
fn chained_from(v: &ViewDef, x: &str) -> Vec<String> {
    let mut out = vec![x.to_string()];
    let mut changed = true;
    while changed {
        changed = false;
        for b in &v.bindings {
            if let crate::xml::PathRoot::Variable(src) = &b.source.root {
                if out.contains(src) && !out.contains(&b.var) {
                    out.push(b.var.clone());
                    changed = true;
                }
            }
        }
    }
    out
}

/// Translates with the default guards.
pub fn translate(v: &ViewDef, dv: &UpdateStatement) -> Result<TranslationOutcome> {
    translate_with(v, dv, Guards::default())
}

pub fn translate_with(
    v: &ViewDef,
    dv: &UpdateStatement,
    guards: Guards,
) -> Result<TranslationOutcome> {
    if dv.level != Level::View {
        return Err(Error::LevelMismatch {
            expected: "view",
            found: dv.level.name(),
        });
    }
    let a = abstract_form(dv, Some(v))?;
    let outcome = map_paths(v, &a).and_then(|m| {
        let case = classify(v, &a, &m, guards)?;
        Ok((m, case))
    });
    let (m, case) = match outcome {
        Ok(x) => x,
        Err(r) => return Ok(TranslationOutcome::Rejected(r)),
    };
    let cond_src = m.cond.source().expect("classified updates map their condition");
    let mut conditions = v.conditions.clone();
    conditions.push(ConditionAtom::PathEqString(cond_src, a.literal.clone()));
    let (target, action) = match case {
        Case::T1 | Case::T2 => {
            let t = m.target.source().expect("return target");
            (Target::new(t.var, t.path), a.action.clone())
        }
        Case::T3 => {
            let x1 = v.returns[0].var.clone();
            let lt = a.action.child_label().expect("label deletion").to_string();
            let gamma = v.returns[v.return_index_for(&lt).expect("classified")].path.clone();
            (Target::parent_of(x1, gamma), Action::DeleteLabel(lt))
        }
        Case::T4 => {
            let x1 = v.returns[0].var.clone();
            (
                Target::parent_of(x1.clone(), Path::empty()),
                Action::DeleteBinding(x1),
            )
        }
    };
    let delta_s = UpdateStatement {
        level: Level::Source,
        bindings: v.bindings.clone(),
        conditions,
        target,
        action,
    };
    debug_assert!(normalize_path(&delta_s.bindings, &delta_s.target.var, &delta_s.target.path).is_ok());
    Ok(TranslationOutcome::Translated { delta_s, case })
}
