use std::fmt::{self, Write as _};

use super::ast::*;
use crate::xml::{serialize, PathRoot, QualifiedPath};

fn source_text(q: &QualifiedPath) -> String {
    match &q.root {
        PathRoot::Document(d) => format!("doc(\"{d}\")/{}", q.steps),
        PathRoot::Variable(v) if q.steps.is_empty() => v.clone(),
        PathRoot::Variable(v) => format!("{v}/{}", q.steps),
        PathRoot::ViewRoot => q.steps.to_string(),
    }
}

fn write_for(out: &mut String, bindings: &[Binding], indent: &str) {
    for (i, b) in bindings.iter().enumerate() {
        if i == 0 {
            let _ = write!(out, "{indent}for {} in {}", b.var, source_text(&b.source));
        } else {
            let _ = write!(out, ",\n{indent}    {} in {}", b.var, source_text(&b.source));
        }
    }
    out.push('\n');
}

fn write_where(out: &mut String, atoms: &[ConditionAtom], indent: &str) {
    if atoms.is_empty() {
        return;
    }
    let joined: Vec<String> = atoms.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "{indent}where {}", joined.join(" and "));
}

/// Renders an update in `for / where / update` layout. Actions use the
/// brace form; a binding deletion is written `update x/.. { delete L }`
/// with `L` the last name of `x`'s binding path.
pub fn render_update(u: &UpdateStatement) -> String {
    let mut out = String::new();
    write_for(&mut out, &u.bindings, "");
    write_where(&mut out, &u.conditions, "");
    let action = match &u.action {
        Action::InsertTree(t) => format!("insert {}", serialize(t)),
        Action::DeleteTree(t) => format!("delete {}", serialize(t)),
        Action::DeleteLabel(l) => format!("delete {l}"),
        Action::DeleteBinding(v) => {
            let label = normalize_path(&u.bindings, v, &crate::xml::Path::empty())
                .ok()
                .and_then(|q| q.last_name().map(str::to_string))
                .unwrap_or_else(|| v.clone());
            format!("delete {label}")
        }
    };
    let _ = write!(out, "update {} {{ {action} }}", u.target);
    out
}

/// Renders a view definition; the output parses back to the same value.
pub fn render_view(v: &ViewDef) -> String {
    let mut out = format!("<{}>{{ ", v.view_root);
    let mut body = String::new();
    write_for(&mut body, &v.bindings, "");
    write_where(&mut body, &v.conditions, "");
    let returns: String = v.returns.iter().map(|r| format!("{{{r}}}")).collect();
    let _ = write!(body, "return <{w}>{returns}</{w}>", w = v.wrapper);
    out.push_str(&body.replace('\n', "\n    "));
    let _ = write!(out, " }}</{}>", v.view_root);
    out
}

impl fmt::Display for UpdateStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_update(self))
    }
}

impl fmt::Display for ViewDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_view(self))
    }
}
