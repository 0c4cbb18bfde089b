//! Update translation for virtual XML views.
//!
//! A view is a `for-where-return` query over source documents. Users update
//! the view as if it were stored; this crate rewrites such an update into an
//! update on the sources, decides whether a precise rewrite exists, applies
//! updates, and checks that a rewrite is correct and minimal on concrete
//! document stores.
//!
//! ```
//! use xview::{lang, translator, fixtures};
//!
//! let view = lang::parse_view_def(fixtures::QBK_VIEW).unwrap();
//! let dv = lang::parse_update(fixtures::QBK_UPDATE).unwrap();
//! let outcome = translator::translate(&view, &dv).unwrap();
//! let ds = outcome.translated().unwrap();
//! assert!(lang::render_update(ds).contains(r#"where x/title=z/title and x/title="IS""#));
//! ```

pub mod cli;
pub mod error;
pub mod evaluator;
pub mod fixtures;
pub mod gen;
pub mod lang;
pub mod translator;
pub mod updater;
pub mod verifier;
pub mod xml;

pub use error::{Error, Result};
