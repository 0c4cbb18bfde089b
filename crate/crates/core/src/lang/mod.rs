//! The view-definition and update dialects.
//!
//! Identifiers are alphanumeric (plus `_` and `-`); a leading `$` on a
//! variable is accepted and dropped. Keywords: `for in where and return
//! update insert delete doc view`. String literals are double-quoted with no
//! escapes. Conditions are conjunctions of equalities. An update action may
//! be written in braces or parentheses; braces are emitted on render.

mod ast;
mod parser;
mod render;

pub use ast::{
    normalize_path, Action, Binding, ConditionAtom, Level, ReturnExpr, Target, UpdateStatement,
    VarPath, ViewDef,
};
pub use parser::{parse_update, parse_view_def};
pub use render::{render_update, render_view};
