use std::fmt;

use crate::error::{Error, Result};

/// A slash-separated sequence of element names. May be empty where the
/// grammar allows a bare variable (`{z}`, `y/D=z`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Path {
    names: Vec<String>,
}

impl Path {
    pub fn empty() -> Self {
        Path { names: Vec::new() }
    }

    /// Builds a query path; names must be pairwise distinct.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::NonDistinctPathNames(n.clone()));
            }
        }
        Ok(Path { names })
    }

    /// Builds a path without the distinctness check. Used for paths that
    /// are concatenations of several query paths.
    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Path {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    /// Parses `A/B/C`; the empty string gives the empty path.
    pub fn parse(s: &str) -> Result<Self> {
        if s.is_empty() {
            return Ok(Path::empty());
        }
        Path::new(s.split('/'))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn first_name(&self) -> Option<&str> {
        self.names.first().map(String::as_str)
    }

    /// Last element name; `None` for the empty path.
    pub fn last_name(&self) -> Option<&str> {
        self.names.last().map(String::as_str)
    }

    pub fn join(&self, other: &Path) -> Path {
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        Path { names }
    }

    pub fn push(&mut self, name: impl Into<String>) {
        self.names.push(name.into());
    }

    /// Path without its last name (`a/b/..` as a plain path).
    pub fn parent(&self) -> Option<Path> {
        let (_, init) = self.names.split_last()?;
        Some(Path {
            names: init.to_vec(),
        })
    }

    /// Suffix after the first `n` names.
    pub fn skip(&self, n: usize) -> Path {
        Path {
            names: self.names.iter().skip(n).cloned().collect(),
        }
    }

    /// Equal-or-proper prefix.
    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.names.starts_with(&self.names)
    }

    pub fn common_prefix(&self, other: &Path) -> Path {
        Path {
            names: self
                .names
                .iter()
                .zip(&other.names)
                .take_while(|(a, b)| a == b)
                .map(|(a, _)| a.clone())
                .collect(),
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.names.join("/"))
    }
}

/// Free-function form of [`Path::last_name`].
pub fn last_name(p: &Path) -> Option<&str> {
    p.last_name()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathRoot {
    /// `doc("name")`; the first step is the document's root label.
    Document(String),
    Variable(String),
    /// The view instance root; the first step is the view root name.
    ViewRoot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QualifiedPath {
    pub root: PathRoot,
    pub steps: Path,
}

impl QualifiedPath {
    pub fn new(root: PathRoot, steps: Path) -> Self {
        QualifiedPath { root, steps }
    }

    pub fn doc(name: &str, steps: &str) -> Result<Self> {
        Ok(QualifiedPath::new(
            PathRoot::Document(name.to_string()),
            Path::parse(steps)?,
        ))
    }

    pub fn view(steps: &str) -> Result<Self> {
        Ok(QualifiedPath::new(PathRoot::ViewRoot, Path::parse(steps)?))
    }

    pub fn is_prefix_of(&self, other: &QualifiedPath) -> bool {
        self.root == other.root && self.steps.is_prefix_of(&other.steps)
    }

    pub fn join(&self, rest: &Path) -> QualifiedPath {
        QualifiedPath::new(self.root.clone(), self.steps.join(rest))
    }

    pub fn parent(&self) -> Option<QualifiedPath> {
        Some(QualifiedPath::new(self.root.clone(), self.steps.parent()?))
    }

    pub fn last_name(&self) -> Option<&str> {
        self.steps.last_name()
    }
}

impl fmt::Display for QualifiedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = match &self.root {
            PathRoot::Document(d) => format!("doc(\"{d}\")"),
            PathRoot::Variable(v) => v.clone(),
            PathRoot::ViewRoot => {
                return f.write_str(&self.steps.to_string());
            }
        };
        if self.steps.is_empty() {
            f.write_str(&head)
        } else {
            write!(f, "{head}/{}", self.steps)
        }
    }
}

/// `a` equals `b` or is a proper prefix of it; roots must agree.
pub fn is_prefix(a: &QualifiedPath, b: &QualifiedPath) -> bool {
    a.is_prefix_of(b)
}
