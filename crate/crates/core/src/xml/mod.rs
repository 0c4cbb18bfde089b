//! Ordered labeled trees, element-name paths, and the XML subset they are
//! read from and written to.
//!
//! The accepted subset is elements and text. Attributes, comments,
//! processing instructions, namespaces and mixed content are rejected at
//! parse time. Whitespace-only text between elements is dropped; text in a
//! leaf element is kept verbatim. Elements without children serialize as
//! `<name/>`, so a text node holding the empty string does not survive a
//! round trip.

mod parse;
mod path;
mod tree;

pub(crate) use parse::element_extent;
pub use parse::{parse_document, serialize};
pub use path::{is_prefix, last_name, Path, PathRoot, QualifiedPath};
pub use tree::{value_equal, Content, Descendants, DocumentStore, NodeId, XmlTree};
