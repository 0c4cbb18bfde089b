//! Applying updates to source stores and view instances.
//!
//! Source-level statements run per condition-satisfying tuple of their own
//! for-clause. View-level statements run per context node located by `ps`,
//! the longest common prefix of the full condition and target paths: a
//! context whose condition subtree matches has every target under it
//! updated. When the target is the context itself and the action deletes
//! the label the condition path starts with, the test is made per child,
//! so `for u in v where u/e/H="1" update u { delete e }` removes only the
//! matching wrapper trees.
//!
//! Conditions and targets are resolved against the pre-state. Each target
//! node receives the action at most once per run. Inserts append.

use std::collections::HashSet;

use serde_json::json;

use crate::error::{Error, Result};
use crate::evaluator::{eval_condition, fortup_in, Source};
use crate::lang::{Action, ConditionAtom, Level, UpdateStatement, ViewDef};
use crate::xml::{serialize, DocumentStore, NodeId, Path, PathRoot, QualifiedPath, XmlTree};

/// Fully expanded form of an update: condition path with its literal, target
/// path, and their maximal common front part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractUpdate {
    pub ps: QualifiedPath,
    pub cond_full: QualifiedPath,
    pub literal: String,
    pub target_full: QualifiedPath,
    pub action: Action,
}

impl AbstractUpdate {
    /// Condition path relative to `ps`.
    pub fn cond_rel(&self) -> Path {
        self.cond_full.steps.skip(self.ps.steps.len())
    }

    /// Target path relative to `ps`.
    pub fn target_rel(&self) -> Path {
        self.target_full.steps.skip(self.ps.steps.len())
    }
}

/// Expands the statement's (last) string-comparison atom and its target.
/// With a view given, view-rooted paths must start at its root element.
pub fn abstract_form(u: &UpdateStatement, v: Option<&ViewDef>) -> Result<AbstractUpdate> {
    let (lhs, literal) = u
        .conditions
        .iter()
        .rev()
        .find_map(|a| match a {
            ConditionAtom::PathEqString(p, s) => Some((p, s.clone())),
            ConditionAtom::PathEqPath(..) => None,
        })
        .ok_or_else(|| Error::UnsupportedFeature("update without a string condition".into()))?;
    let cond_full = u.normalize(lhs)?;
    let mut target_full = u.normalize(&u.target.var_path())?;
    if u.target.parent {
        target_full = target_full
            .parent()
            .ok_or_else(|| Error::UnresolvableVariable(u.target.var.clone()))?;
    }
    if let Some(v) = v {
        for q in [&cond_full, &target_full] {
            if q.root == PathRoot::ViewRoot && q.steps.first_name() != Some(v.view_root.as_str()) {
                return Err(Error::ViewMismatch(q.to_string()));
            }
        }
    }
    let ps_steps = if cond_full.root == target_full.root {
        cond_full.steps.common_prefix(&target_full.steps)
    } else {
        Path::empty()
    };
    Ok(AbstractUpdate {
        ps: QualifiedPath::new(target_full.root.clone(), ps_steps),
        cond_full,
        literal,
        target_full,
        action: u.action.clone(),
    })
}

/// One primitive change.
#[derive(Debug, Clone)]
pub enum Edit {
    Inserted { parent: NodeId, tree: XmlTree },
    Deleted { parent: NodeId, removed: NodeId, tree: XmlTree },
}

impl Edit {
    pub fn parent(&self) -> NodeId {
        match self {
            Edit::Inserted { parent, .. } | Edit::Deleted { parent, .. } => *parent,
        }
    }

    pub fn tree(&self) -> &XmlTree {
        match self {
            Edit::Inserted { tree, .. } | Edit::Deleted { tree, .. } => tree,
        }
    }

    pub fn op(&self) -> &'static str {
        match self {
            Edit::Inserted { .. } => "insert",
            Edit::Deleted { .. } => "delete",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({"op": self.op(), "parent": self.parent().get(), "tree": serialize(self.tree())})
    }
}

impl PartialEq for Edit {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Edit::Inserted { parent: p, tree: t }, Edit::Inserted { parent: q, tree: u }) => {
                p == q && t.value_eq(u)
            }
            (
                Edit::Deleted { parent: p, removed: r, .. },
                Edit::Deleted { parent: q, removed: s, .. },
            ) => p == q && r == s,
            _ => false,
        }
    }
}

/// Ordered record of the edits one run performed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EditLog {
    pub edits: Vec<Edit>,
}

impl EditLog {
    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        self.edits
            .iter()
            .map(|e| format!("{}\n", e.to_json()))
            .collect()
    }
}

/// Applies an action to one node. Text nodes are left alone.
pub fn apply_action(node: &mut XmlTree, a: &Action) -> Vec<Edit> {
    let parent = node.id();
    let Some(children) = node.children_mut() else {
        return Vec::new();
    };
    match a {
        Action::InsertTree(t) => {
            let copy = t.deep_copy();
            children.push(copy.clone());
            vec![Edit::Inserted { parent, tree: copy }]
        }
        Action::DeleteTree(t) => remove_where(parent, children, |c| c.value_eq(t)),
        Action::DeleteLabel(l) => remove_where(parent, children, |c| c.label() == l),
        Action::DeleteBinding(_) => Vec::new(),
    }
}

fn remove_where(
    parent: NodeId,
    children: &mut Vec<XmlTree>,
    pred: impl Fn(&XmlTree) -> bool,
) -> Vec<Edit> {
    let mut edits = Vec::new();
    children.retain(|c| {
        if pred(c) {
            edits.push(Edit::Deleted {
                parent,
                removed: c.id(),
                tree: c.clone(),
            });
            false
        } else {
            true
        }
    });
    edits
}

/// Where an update is applied.
pub enum UpdateTarget<'a> {
    Store(&'a mut DocumentStore),
    View(&'a mut XmlTree),
}

/// Edits plus the nodes that received the action (for binding deletions,
/// the removed nodes).
#[derive(Debug, Clone, Default)]
pub struct Applied {
    pub log: EditLog,
    pub targets: Vec<NodeId>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Planned {
    Apply(NodeId),
    Remove(NodeId),
}

trait Host {
    fn node_mut(&mut self, id: NodeId) -> Option<&mut XmlTree>;
    fn parent_id(&self, id: NodeId) -> Option<NodeId>;
}

impl Host for DocumentStore {
    fn node_mut(&mut self, id: NodeId) -> Option<&mut XmlTree> {
        self.find_mut(id)
    }
    fn parent_id(&self, id: NodeId) -> Option<NodeId> {
        self.parent_of(id).map(XmlTree::id)
    }
}

impl Host for XmlTree {
    fn node_mut(&mut self, id: NodeId) -> Option<&mut XmlTree> {
        self.find_mut(id)
    }
    fn parent_id(&self, id: NodeId) -> Option<NodeId> {
        self.parent_of(id).map(XmlTree::id)
    }
}

/// Applies `u`, mutating the target in place.
pub fn apply_update(u: &UpdateStatement, target: UpdateTarget<'_>) -> Result<EditLog> {
    apply_update_traced(u, target).map(|a| a.log)
}

/// As [`apply_update`], also reporting which nodes the action reached.
pub fn apply_update_traced(u: &UpdateStatement, target: UpdateTarget<'_>) -> Result<Applied> {
    match (u.level, target) {
        (Level::Source, UpdateTarget::Store(s)) => {
            let plan = plan_source(u, s)?;
            Ok(execute(s, &u.action, plan))
        }
        (Level::View, UpdateTarget::View(t)) => {
            let plan = plan_view(&abstract_form(u, None)?, t)?;
            Ok(execute(t, &u.action, plan))
        }
        (Level::Source, UpdateTarget::View(_)) => Err(Error::LevelMismatch {
            expected: "view",
            found: "source",
        }),
        (Level::View, UpdateTarget::Store(_)) => Err(Error::LevelMismatch {
            expected: "source",
            found: "view",
        }),
    }
}

fn plan_source(u: &UpdateStatement, s: &DocumentStore) -> Result<Vec<Planned>> {
    let mut plan = Vec::new();
    for t in fortup_in(&u.bindings, Source::Store(s))? {
        if !eval_condition(&u.conditions, &t) {
            continue;
        }
        if let Action::DeleteBinding(var) = &u.action {
            let node = t
                .get(var)
                .ok_or_else(|| Error::UnboundVariable(var.clone()))?;
            if s.parent_of(node.id()).is_none() {
                return Err(Error::TargetIsRoot(node.label().to_string()));
            }
            plan.push(Planned::Remove(node.id()));
            continue;
        }
        for n in t.locate(&u.target.var_path()) {
            if u.target.parent {
                if let Some(p) = s.parent_of(n.id()) {
                    plan.push(Planned::Apply(p.id()));
                }
            } else {
                plan.push(Planned::Apply(n.id()));
            }
        }
    }
    Ok(plan)
}

fn plan_view(a: &AbstractUpdate, view: &XmlTree) -> Result<Vec<Planned>> {
    let contexts = Source::View(view).resolve(&a.ps)?;
    let cond_rel = a.cond_rel();
    let target_rel = a.target_rel();
    let holds = |n: &XmlTree, rel: &Path| n.locate(rel).iter().any(|c| c.string_value() == a.literal);
    let mut plan = Vec::new();
    for c in contexts {
        if let Action::DeleteLabel(l) = &a.action {
            if target_rel.is_empty() && cond_rel.first_name() == Some(l.as_str()) {
                let rest = cond_rel.skip(1);
                for child in c.children().iter().filter(|ch| ch.label() == l) {
                    if holds(child, &rest) {
                        plan.push(Planned::Remove(child.id()));
                    }
                }
                continue;
            }
        }
        if holds(c, &cond_rel) {
            plan.extend(c.locate(&target_rel).iter().map(|n| Planned::Apply(n.id())));
        }
    }
    Ok(plan)
}

fn execute<H: Host>(host: &mut H, action: &Action, plan: Vec<Planned>) -> Applied {
    let mut seen = HashSet::new();
    let mut out = Applied::default();
    for p in plan {
        if !seen.insert(p) {
            continue;
        }
        match p {
            Planned::Apply(id) => {
                if let Some(node) = host.node_mut(id) {
                    out.targets.push(id);
                    out.log.edits.extend(apply_action(node, action));
                }
            }
            Planned::Remove(id) => {
                let Some(pid) = host.parent_id(id) else { continue };
                if let Some(parent) = host.node_mut(pid) {
                    out.targets.push(id);
                    out.log
                        .edits
                        .extend(apply_action_remove(parent, id));
                }
            }
        }
    }
    out
}

fn apply_action_remove(parent: &mut XmlTree, id: NodeId) -> Vec<Edit> {
    let pid = parent.id();
    match parent.children_mut() {
        Some(children) => remove_where(pid, children, |c| c.id() == id),
        None => Vec::new(),
    }
}

/// Re-performs a subset of logged edits on a store that still carries the
/// pre-state node ids (a `Clone` of the original). Edits whose parent or
/// removed node no longer exists are skipped.
pub fn replay(store: &mut DocumentStore, edits: &[Edit]) {
    for e in edits {
        let Some(parent) = store.find_mut(e.parent()) else { continue };
        let pid = parent.id();
        let Some(children) = parent.children_mut() else { continue };
        match e {
            Edit::Inserted { tree, .. } => children.push(tree.clone()),
            Edit::Deleted { removed, .. } => {
                remove_where(pid, children, |c| c.id() == *removed);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluator::evaluate_view;
    use crate::fixtures;
    use crate::lang::{parse_update, parse_view_def};
    use crate::xml::parse_document;

    fn store(name: &str, xml: &str) -> DocumentStore {
        DocumentStore::new().with(name, parse_document(xml).unwrap())
    }

    #[test]
    fn abstract_form_of_qbk_update() {
        let u = parse_update(fixtures::QBK_UPDATE).unwrap();
        let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
        let a = abstract_form(&u, Some(&v)).unwrap();
        assert_eq!(a.cond_full, QualifiedPath::view("Qbk/use/title").unwrap());
        assert_eq!(a.target_full, QualifiedPath::view("Qbk/use/auths").unwrap());
        assert_eq!(a.ps, QualifiedPath::view("Qbk/use").unwrap());
        assert_eq!(a.literal, "IS");
    }

    #[test]
    fn abstract_form_root_and_identical_paths() {
        let u = parse_update(r#"for u in v where u/e/B="1" update u { delete e }"#).unwrap();
        let a = abstract_form(&u, None).unwrap();
        assert_eq!(a.target_full, QualifiedPath::view("v").unwrap());
        assert_eq!(a.ps, QualifiedPath::view("v").unwrap());

        let u = parse_update(r#"for r in v/e where r/B="1" update r/B { delete X }"#).unwrap();
        let a = abstract_form(&u, None).unwrap();
        assert_eq!(a.ps, a.cond_full);
        assert_eq!(a.ps, a.target_full);

        let other = parse_view_def(fixtures::QBK_VIEW).unwrap();
        assert!(matches!(
            abstract_form(&u, Some(&other)),
            Err(Error::ViewMismatch(_))
        ));
    }

    #[test]
    fn apply_action_cases() {
        let mut auths = parse_document("<auths><aName>John</aName></auths>").unwrap();
        let e = apply_action(&mut auths, &Action::InsertTree(XmlTree::text("aName", "Susan")));
        assert_eq!(e.len(), 1);
        assert_eq!(
            serialize(&auths),
            "<auths><aName>John</aName><aName>Susan</aName></auths>"
        );

        let mut a = parse_document("<A><B>b1</B><C><D>1</D></C><C><D>2</D></C><H>1</H></A>").unwrap();
        let e = apply_action(&mut a, &Action::DeleteLabel("C".into()));
        assert_eq!(e.len(), 2);
        assert_eq!(serialize(&a), "<A><B>b1</B><H>1</H></A>");

        let e = apply_action(&mut a, &Action::DeleteTree(XmlTree::text("X", "1")));
        assert!(e.is_empty());

        let mut t = XmlTree::text("B", "x");
        assert!(apply_action(&mut t, &Action::DeleteLabel("B".into())).is_empty());
    }

    #[test]
    fn translated_qbk_update_touches_only_is_book() {
        let mut s = fixtures::qbk_store();
        let u = parse_update(fixtures::QBK_SOURCE_UPDATE).unwrap();
        let log = apply_update(&u, UpdateTarget::Store(&mut s)).unwrap();
        assert_eq!(log.len(), 1);
        let books = s.get("bkInf.xml").unwrap().children();
        for b in books {
            let names: Vec<_> = b.children()[1].children().iter().map(|n| n.string_value()).collect();
            let title = b.children()[0].string_value();
            assert_eq!(names.contains(&"Susan".to_string()), title == "IS", "{title}");
        }
        let line = log.to_json_lines();
        assert!(line.starts_with(r#"{"op":"insert","parent":"#), "{line}");
        assert!(line.ends_with("\"tree\":\"<aName>Susan</aName>\"}\n"), "{line}");
    }

    #[test]
    fn view_update_reaches_every_matching_wrapper() {
        let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
        let mut inst = evaluate_view(&v, &fixtures::qbk_store()).unwrap();
        let u = parse_update(fixtures::QBK_UPDATE).unwrap();
        let log = apply_update(&u, UpdateTarget::View(&mut inst.tree)).unwrap();
        assert_eq!(log.len(), 2);
        for use_ in inst.tree.children() {
            let has = use_.children()[0]
                .children()
                .iter()
                .any(|n| n.string_value() == "Susan");
            assert_eq!(has, use_.children()[1].string_value() == "IS");
        }
    }

    #[test]
    fn unsatisfiable_condition_is_identity() {
        let mut s = fixtures::qbk_store();
        let before = s.clone();
        let u = parse_update(
            r#"for x in doc("bkInf.xml")/bkInf/book where x/title="none" update x/auths { delete aName }"#,
        )
        .unwrap();
        assert!(apply_update(&u, UpdateTarget::Store(&mut s)).unwrap().is_empty());
        assert!(s.value_eq(&before));
    }

    #[test]
    fn first_application_collapses_duplicates() {
        // two C children give two tuples sharing the same x; insert once
        let mut s = store("r", "<r><A><C><D>1</D></C><C><D>2</D></C></A></r>");
        let u = parse_update(
            r#"for x in doc("r")/r/A, y in x/C update x { insert <N>n</N> }"#,
        )
        .unwrap();
        let applied = apply_update_traced(&u, UpdateTarget::Store(&mut s)).unwrap();
        assert_eq!(applied.log.len(), 1);
        assert_eq!(applied.targets.len(), 1);
        assert_eq!(
            serialize(s.get("r").unwrap()),
            "<r><A><C><D>1</D></C><C><D>2</D></C><N>n</N></A></r>"
        );
    }

    #[test]
    fn binding_deletion_removes_only_bound_node() {
        let mut s = store("r", "<r><A><B>1</B></A><A><B>2</B></A><A><B>1</B></A></r>");
        let u = parse_update(r#"for x in doc("r")/r/A where x/B="2" update x/.. { delete A }"#).unwrap();
        let log = apply_update(&u, UpdateTarget::Store(&mut s)).unwrap();
        assert_eq!(log.len(), 1);
        assert_eq!(
            serialize(s.get("r").unwrap()),
            "<r><A><B>1</B></A><A><B>1</B></A></r>"
        );

        let u = parse_update(r#"for x in doc("r")/r update x/.. { delete r }"#).unwrap();
        assert_eq!(
            apply_update(&u, UpdateTarget::Store(&mut s)).unwrap_err(),
            Error::TargetIsRoot("r".into())
        );
    }

    #[test]
    fn root_deletion_in_view_is_per_wrapper() {
        let mut view = parse_document("<v><e><B>1</B></e><e><B>2</B></e><e><B>1</B></e></v>").unwrap();
        let u = parse_update(r#"for u in v where u/e/B="1" update u { delete e }"#).unwrap();
        let log = apply_update(&u, UpdateTarget::View(&mut view)).unwrap();
        assert_eq!(log.len(), 2);
        assert_eq!(serialize(&view), "<v><e><B>2</B></e></v>");
    }

    #[test]
    fn level_mismatch() {
        let mut s = fixtures::qbk_store();
        let u = parse_update(fixtures::QBK_UPDATE).unwrap();
        assert!(matches!(
            apply_update(&u, UpdateTarget::Store(&mut s)),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn replay_subset_matches_full_run() {
        let s0 = store("r", "<r><A><B>1</B><C>x</C></A><A><B>1</B><C>y</C></A></r>");
        let u = parse_update(r#"for x in doc("r")/r/A where x/B="1" update x { delete C }"#).unwrap();
        let mut full = s0.clone();
        let log = apply_update(&u, UpdateTarget::Store(&mut full)).unwrap();
        assert_eq!(log.len(), 2);

        let mut again = s0.clone();
        replay(&mut again, &log.edits);
        assert!(again.value_eq(&full));

        let mut partial = s0.clone();
        replay(&mut partial, &log.edits[1..]);
        assert_eq!(
            serialize(partial.get("r").unwrap()),
            "<r><A><B>1</B><C>x</C></A><A><B>1</B></A></r>"
        );
    }
}
