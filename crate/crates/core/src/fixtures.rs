//! Sample views, updates and documents used by the tests, the examples and
//! the CLI walkthrough in the README. The text lives under `fixtures/`.

use crate::xml::{parse_document, DocumentStore};

/// Three-variable view with a join between `y/D` and `z`.
pub const EX1_VIEW: &str = include_str!("../fixtures/ex1.xq");
/// Source document `r` for [`EX1_VIEW`].
pub const D1_DOC: &str = include_str!("../fixtures/d1.xml");

/// Book-use view over `bkInf.xml` and `subjInf.xml`.
pub const QBK_VIEW: &str = include_str!("../fixtures/qbk.xq");
/// Add author Susan to the book titled IS, stated against the view.
pub const QBK_UPDATE: &str = include_str!("../fixtures/qbk_update.xq");
/// The source update that [`QBK_UPDATE`] translates to.
pub const QBK_SOURCE_UPDATE: &str = include_str!("../fixtures/qbk_source_update.xq");
/// A correct but over-updating source statement: it also touches a book no
/// subject uses.
pub const QBK_PADDED_UPDATE: &str = include_str!("../fixtures/qbk_padded.xq");
/// Insertion directly under the wrapper element; not translatable.
pub const QBK_WRAPPER_INSERT: &str = include_str!("../fixtures/qbk_wrapper_insert.xq");
pub const BKINF_DOC: &str = include_str!("../fixtures/bkInf.xml");
pub const SUBJINF_DOC: &str = include_str!("../fixtures/subjInf.xml");

pub fn d1_store() -> DocumentStore {
    DocumentStore::new().with("r", parse_document(D1_DOC).expect("d1 fixture parses"))
}

pub fn qbk_store() -> DocumentStore {
    DocumentStore::new()
        .with("bkInf.xml", parse_document(BKINF_DOC).expect("bkInf fixture parses"))
        .with(
            "subjInf.xml",
            parse_document(SUBJINF_DOC).expect("subjInf fixture parses"),
        )
}
