use std::fmt;

use crate::error::{Error, Result};
use crate::xml::{Path, PathRoot, QualifiedPath, XmlTree};

/// `var in source` in a for-clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    pub var: String,
    pub source: QualifiedPath,
}

/// A variable followed by a possibly empty relative path: `y/D`, `z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarPath {
    pub var: String,
    pub path: Path,
}

impl VarPath {
    pub fn new(var: impl Into<String>, path: Path) -> Self {
        VarPath {
            var: var.into(),
            path,
        }
    }

    pub fn bare(var: impl Into<String>) -> Self {
        VarPath::new(var, Path::empty())
    }
}

impl fmt::Display for VarPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.var)
        } else {
            write!(f, "{}/{}", self.var, self.path)
        }
    }
}

/// `{x/γ}` in the return clause.
pub type ReturnExpr = VarPath;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConditionAtom {
    PathEqPath(VarPath, VarPath),
    PathEqString(VarPath, String),
}

impl ConditionAtom {
    /// The variable paths mentioned by the atom.
    pub fn sides(&self) -> Vec<&VarPath> {
        match self {
            ConditionAtom::PathEqPath(a, b) => vec![a, b],
            ConditionAtom::PathEqString(a, _) => vec![a],
        }
    }
}

impl fmt::Display for ConditionAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionAtom::PathEqPath(a, b) => write!(f, "{a}={b}"),
            ConditionAtom::PathEqString(a, s) => write!(f, "{a}=\"{s}\""),
        }
    }
}

/// Parsed `<v>{ for … where … return <e>{…}…</e> }</v>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDef {
    pub view_root: String,
    pub wrapper: String,
    pub bindings: Vec<Binding>,
    pub conditions: Vec<ConditionAtom>,
    pub returns: Vec<ReturnExpr>,
}

impl ViewDef {
    pub fn binding(&self, var: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.var == var)
    }

    pub fn normalize(&self, vp: &VarPath) -> Result<QualifiedPath> {
        normalize_path(&self.bindings, &vp.var, &vp.path)
    }

    /// `L(x_i/γ_i)`: the element name a return expression contributes to
    /// each wrapper tree.
    pub fn return_label(&self, index: usize) -> Result<String> {
        let r = &self.returns[index];
        match r.path.last_name() {
            Some(n) => Ok(n.to_string()),
            None => self
                .normalize(r)?
                .last_name()
                .map(str::to_string)
                .ok_or_else(|| Error::UnresolvableVariable(r.var.clone())),
        }
    }

    /// Index of the return expression whose label is `label`.
    pub fn return_index_for(&self, label: &str) -> Option<usize> {
        (0..self.returns.len()).find(|&i| self.return_label(i).ok().as_deref() == Some(label))
    }

    /// Every element name that occurs in the view's source paths.
    pub fn source_names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        let mut add = |p: &Path| {
            for n in p.names() {
                if !names.contains(n) {
                    names.push(n.clone());
                }
            }
        };
        for b in &self.bindings {
            add(&b.source.steps);
        }
        for c in &self.conditions {
            for s in c.sides() {
                add(&s.path);
            }
        }
        for r in &self.returns {
            add(&r.path);
        }
        names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    View,
    Source,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::View => "view",
            Level::Source => "source",
        }
    }
}

/// `var/path` or `var/path/..` after `update`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    pub var: String,
    pub path: Path,
    pub parent: bool,
}

impl Target {
    pub fn new(var: impl Into<String>, path: Path) -> Self {
        Target {
            var: var.into(),
            path,
            parent: false,
        }
    }

    pub fn parent_of(var: impl Into<String>, path: Path) -> Self {
        Target {
            var: var.into(),
            path,
            parent: true,
        }
    }

    pub fn var_path(&self) -> VarPath {
        VarPath::new(self.var.clone(), self.path.clone())
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.var_path())?;
        if self.parent {
            f.write_str("/..")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum Action {
    InsertTree(XmlTree),
    DeleteTree(XmlTree),
    /// Remove every child carrying the label.
    DeleteLabel(String),
    /// Remove the node bound to the variable from its parent.
    DeleteBinding(String),
}

impl Action {
    pub fn is_insert(&self) -> bool {
        matches!(self, Action::InsertTree(_))
    }

    /// Label of the children this action adds or removes, when known.
    pub fn child_label(&self) -> Option<&str> {
        match self {
            Action::InsertTree(t) | Action::DeleteTree(t) => Some(t.label()),
            Action::DeleteLabel(l) => Some(l),
            Action::DeleteBinding(_) => None,
        }
    }
}

impl PartialEq for Action {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Action::InsertTree(a), Action::InsertTree(b))
            | (Action::DeleteTree(a), Action::DeleteTree(b)) => a.value_eq(b),
            (Action::DeleteLabel(a), Action::DeleteLabel(b))
            | (Action::DeleteBinding(a), Action::DeleteBinding(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Action {}

/// A parsed update, either against a view (`for r in v/e …`) or against
/// source documents (`for x in doc("…")/… …`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateStatement {
    pub level: Level,
    pub bindings: Vec<Binding>,
    pub conditions: Vec<ConditionAtom>,
    pub target: Target,
    pub action: Action,
}

impl UpdateStatement {
    pub fn binding(&self, var: &str) -> Option<&Binding> {
        self.bindings.iter().find(|b| b.var == var)
    }

    pub fn normalize(&self, vp: &VarPath) -> Result<QualifiedPath> {
        normalize_path(&self.bindings, &vp.var, &vp.path)
    }
}

/// Expands `var/path` through the binding chain until it is rooted at a
/// document or at the view root.
pub fn normalize_path(bindings: &[Binding], var: &str, path: &Path) -> Result<QualifiedPath> {
    let mut current = var.to_string();
    let mut tail = path.clone();
    for _ in 0..=bindings.len() {
        let b = bindings
            .iter()
            .find(|b| b.var == current)
            .ok_or_else(|| Error::UnboundVariable(current.clone()))?;
        tail = b.source.steps.join(&tail);
        match &b.source.root {
            PathRoot::Variable(v) => current = v.clone(),
            root => return Ok(QualifiedPath::new(root.clone(), tail)),
        }
    }
    Err(Error::CyclicBinding(var.to_string()))
}
