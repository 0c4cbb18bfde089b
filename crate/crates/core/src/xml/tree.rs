use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use super::path::Path;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// Node identifier. Allocated from a process-wide counter, so identifiers
/// never collide between a store and the view instances derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(u64);

impl NodeId {
    pub fn fresh() -> Self {
        NodeId(NEXT_ID.fetch_add(1, Ordering::Relaxed))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub enum Content {
    Text(String),
    Children(Vec<XmlTree>),
}

/// An ordered labeled tree: every node carries an identifier, a label and
/// either a text string or a (possibly empty) sequence of child trees.
///
/// `Clone` keeps identifiers, which is what store snapshots want. Use
/// [`XmlTree::deep_copy`] to obtain a copy with fresh identifiers.
#[derive(Debug, Clone)]
pub struct XmlTree {
    id: NodeId,
    label: String,
    content: Content,
}

impl XmlTree {
    pub fn element(label: impl Into<String>, children: Vec<XmlTree>) -> Self {
        XmlTree {
            id: NodeId::fresh(),
            label: label.into(),
            content: Content::Children(children),
        }
    }

    pub fn text(label: impl Into<String>, text: impl Into<String>) -> Self {
        XmlTree {
            id: NodeId::fresh(),
            label: label.into(),
            content: Content::Text(text.into()),
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn content(&self) -> &Content {
        &self.content
    }

    pub fn is_text(&self) -> bool {
        matches!(self.content, Content::Text(_))
    }

    pub fn text_value(&self) -> Option<&str> {
        match &self.content {
            Content::Text(t) => Some(t),
            Content::Children(_) => None,
        }
    }

    /// Child trees; empty for text nodes.
    pub fn children(&self) -> &[XmlTree] {
        match &self.content {
            Content::Text(_) => &[],
            Content::Children(c) => c,
        }
    }

    pub(crate) fn children_mut(&mut self) -> Option<&mut Vec<XmlTree>> {
        match &mut self.content {
            Content::Text(_) => None,
            Content::Children(c) => Some(c),
        }
    }

    /// Copy with fresh identifiers throughout.
    pub fn deep_copy(&self) -> XmlTree {
        self.deep_copy_with(&mut |_, _| {})
    }

    /// Copy with fresh identifiers, reporting each `(new, original)` pair.
    pub fn deep_copy_with(&self, link: &mut impl FnMut(NodeId, NodeId)) -> XmlTree {
        let id = NodeId::fresh();
        link(id, self.id);
        let content = match &self.content {
            Content::Text(t) => Content::Text(t.clone()),
            Content::Children(c) => {
                Content::Children(c.iter().map(|ch| ch.deep_copy_with(link)).collect())
            }
        };
        XmlTree {
            id,
            label: self.label.clone(),
            content,
        }
    }

    /// Value equality: identifiers are ignored, everything else (labels,
    /// content kind, text, child order) must agree recursively.
    pub fn value_eq(&self, other: &XmlTree) -> bool {
        if self.label != other.label {
            return false;
        }
        match (&self.content, &other.content) {
            (Content::Text(a), Content::Text(b)) => a == b,
            (Content::Children(a), Content::Children(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.value_eq(y))
            }
            _ => false,
        }
    }

    /// Concatenation of all descendant text in document order.
    pub fn string_value(&self) -> String {
        let mut out = String::new();
        self.push_text(&mut out);
        out
    }

    fn push_text(&self, out: &mut String) {
        match &self.content {
            Content::Text(t) => out.push_str(t),
            Content::Children(c) => c.iter().for_each(|ch| ch.push_text(out)),
        }
    }

    /// Subtrees reached from this node along `path`, in document order.
    /// The first name matches children of `self`; an empty path yields
    /// `self`.
    pub fn locate(&self, path: &Path) -> Vec<&XmlTree> {
        let mut frontier = vec![self];
        for name in path.names() {
            frontier = frontier
                .into_iter()
                .flat_map(|n| n.children().iter().filter(|c| c.label == *name))
                .collect();
        }
        frontier
    }

    /// Preorder traversal including `self`.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    pub fn find(&self, id: NodeId) -> Option<&XmlTree> {
        self.descendants().find(|n| n.id == id)
    }

    pub fn find_mut(&mut self, id: NodeId) -> Option<&mut XmlTree> {
        if self.id == id {
            return Some(self);
        }
        match &mut self.content {
            Content::Text(_) => None,
            Content::Children(c) => c.iter_mut().find_map(|ch| ch.find_mut(id)),
        }
    }

    /// The node whose child has identifier `id`.
    pub fn parent_of(&self, id: NodeId) -> Option<&XmlTree> {
        self.descendants()
            .find(|n| n.children().iter().any(|c| c.id == id))
    }

    pub fn node_count(&self) -> usize {
        self.descendants().count()
    }
}

impl fmt::Display for XmlTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::serialize(self))
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a XmlTree>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a XmlTree;

    fn next(&mut self) -> Option<&'a XmlTree> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children().iter().rev());
        Some(node)
    }
}

/// Free-function form of [`XmlTree::value_eq`].
pub fn value_equal(a: &XmlTree, b: &XmlTree) -> bool {
    a.value_eq(b)
}

/// Named source documents. Iteration order is by document name.
#[derive(Debug, Clone, Default)]
pub struct DocumentStore {
    docs: BTreeMap<String, XmlTree>,
}

impl DocumentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tree: XmlTree) -> Option<XmlTree> {
        self.docs.insert(name.into(), tree)
    }

    pub fn with(mut self, name: impl Into<String>, tree: XmlTree) -> Self {
        self.insert(name, tree);
        self
    }

    pub fn get(&self, name: &str) -> Option<&XmlTree> {
        self.docs.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &XmlTree)> {
        self.docs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn find(&self, id: NodeId) -> Option<&XmlTree> {
        self.docs.values().find_map(|d| d.find(id))
    }

    pub fn find_mut(&mut self, id: NodeId) -> Option<&mut XmlTree> {
        self.docs.values_mut().find_map(|d| d.find_mut(id))
    }

    pub fn parent_of(&self, id: NodeId) -> Option<&XmlTree> {
        self.docs.values().find_map(|d| d.parent_of(id))
    }

    /// Name of the document whose root has identifier `id`.
    pub fn root_doc(&self, id: NodeId) -> Option<&str> {
        self.docs
            .iter()
            .find(|(_, t)| t.id() == id)
            .map(|(k, _)| k.as_str())
    }

    /// True iff both stores hold the same document names with value-equal
    /// trees.
    pub fn value_eq(&self, other: &DocumentStore) -> bool {
        self.docs.len() == other.docs.len()
            && self
                .docs
                .iter()
                .zip(&other.docs)
                .all(|((ka, a), (kb, b))| ka == kb && a.value_eq(b))
    }
}
