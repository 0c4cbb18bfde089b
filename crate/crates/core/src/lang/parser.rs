//! Recursive-descent parsers for view definitions and update statements.
//!
//! Lexing is on demand so that an XML payload inside an update action can be
//! handed to the document parser as raw text.

use super::ast::*;
use crate::error::{Error, Result};
use crate::xml::{element_extent, parse_document, Path, PathRoot, QualifiedPath};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Lt,
    LtSlash,
    Gt,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Slash,
    Comma,
    Eq,
    DotDot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Lt => "`<`".into(),
            Tok::LtSlash => "`</`".into(),
            Tok::Gt => "`>`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "for", "in", "where", "and", "return", "update", "insert", "delete", "doc", "view",
];

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { src, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn lex(&self) -> Result<(Tok, usize)> {
        let rest = self.rest();
        let mut chars = rest.chars();
        let Some(c) = chars.next() else {
            return Ok((Tok::Eof, 0));
        };
        let one = |t| Ok((t, c.len_utf8()));
        match c {
            '<' if rest.starts_with("</") => Ok((Tok::LtSlash, 2)),
            '<' => one(Tok::Lt),
            '>' => one(Tok::Gt),
            '{' => one(Tok::LBrace),
            '}' => one(Tok::RBrace),
            '(' => one(Tok::LParen),
            ')' => one(Tok::RParen),
            '/' => one(Tok::Slash),
            ',' => one(Tok::Comma),
            '=' => one(Tok::Eq),
            '.' if rest.starts_with("..") => Ok((Tok::DotDot, 2)),
            '"' => {
                let body = &rest[1..];
                let end = body
                    .find('"')
                    .ok_or_else(|| Error::syntax(self.pos, "unterminated string literal"))?;
                Ok((Tok::Str(body[..end].to_string()), end + 2))
            }
            '$' | '\\' => {
                // `$x`, and `\$x` as it appears in typeset sources.
                let skip = if c == '\\' && rest.starts_with("\\$") { 2 } else { 1 };
                if c == '\\' && skip == 1 {
                    return Err(Error::syntax(self.pos, "unexpected `\\`"));
                }
                let body = &rest[skip..];
                let len: usize = body
                    .chars()
                    .take_while(|&c| is_ident_char(c))
                    .map(char::len_utf8)
                    .sum();
                if len == 0 {
                    return Err(Error::syntax(self.pos, "`$` must precede a variable name"));
                }
                Ok((Tok::Ident(body[..len].to_string()), skip + len))
            }
            c if is_ident_char(c) => {
                let len: usize = rest
                    .chars()
                    .take_while(|&c| is_ident_char(c))
                    .map(char::len_utf8)
                    .sum();
                Ok((Tok::Ident(rest[..len].to_string()), len))
            }
            other => Err(Error::syntax(self.pos, format!("unexpected character `{other}`"))),
        }
    }

    fn peek(&mut self) -> Result<Tok> {
        self.skip_ws();
        Ok(self.lex()?.0)
    }

    fn next(&mut self) -> Result<Tok> {
        self.skip_ws();
        let (tok, len) = self.lex()?;
        self.pos += len;
        Ok(tok)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::syntax(self.pos, msg))
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let at = self.pos;
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            Err(Error::syntax(
                at,
                format!("expected {}, found {}", want.describe(), got.describe()),
            ))
        }
    }

    fn peek_keyword(&mut self, kw: &str) -> Result<bool> {
        Ok(matches!(self.peek()?, Tok::Ident(ref s) if s == kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let at = self.pos;
        match self.next()? {
            Tok::Ident(s) if s == kw => Ok(()),
            other => Err(Error::syntax(
                at,
                format!("expected `{kw}`, found {}", other.describe()),
            )),
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self) -> Result<String> {
        let at = self.pos;
        match self.next()? {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(s),
            other => Err(Error::syntax(
                at,
                format!("expected a name, found {}", other.describe()),
            )),
        }
    }

    /// `/a/b/c` continuation. Stops before `/..`.
    fn steps(&mut self) -> Result<Vec<String>> {
        let mut names = Vec::new();
        while self.peek()? == Tok::Slash {
            let save = self.pos;
            self.next()?;
            if self.peek()? == Tok::DotDot {
                self.pos = save;
                break;
            }
            names.push(self.name()?);
        }
        Ok(names)
    }

    fn var_path(&mut self) -> Result<VarPath> {
        let var = self.name()?;
        let path = Path::new(self.steps()?)?;
        Ok(VarPath::new(var, path))
    }

    /// Binding source: `doc("d")/…`, `view(V)/…`, `var/…`, or a bare view
    /// root name `v/…` when `allow_view` is set and the head is unbound.
    fn source(&mut self, bound: &[Binding], allow_view: bool) -> Result<QualifiedPath> {
        let at = self.pos;
        if self.peek_keyword("doc")? {
            self.next()?;
            self.expect(Tok::LParen)?;
            let name = match self.next()? {
                Tok::Str(s) => s,
                other => return self.err(format!("expected a document name, found {}", other.describe())),
            };
            self.expect(Tok::RParen)?;
            let steps = self.steps()?;
            if steps.is_empty() {
                return Err(Error::syntax(at, "a doc() path needs at least the root label"));
            }
            return Ok(QualifiedPath::new(PathRoot::Document(name), Path::new(steps)?));
        }
        if self.peek_keyword("view")? {
            self.next()?;
            self.expect(Tok::LParen)?;
            let name = match self.next()? {
                Tok::Str(s) | Tok::Ident(s) => s,
                other => return self.err(format!("expected a view name, found {}", other.describe())),
            };
            self.expect(Tok::RParen)?;
            let steps = self.steps()?;
            if steps.first() != Some(&name) {
                return Err(Error::syntax(
                    at,
                    format!("view({name}) must be followed by /{name}"),
                ));
            }
            if !allow_view {
                return Err(Error::syntax(at, "view paths are not allowed here"));
            }
            return Ok(QualifiedPath::new(PathRoot::ViewRoot, Path::new(steps)?));
        }
        let head = self.name()?;
        let steps = self.steps()?;
        if bound.iter().any(|b| b.var == head) {
            Ok(QualifiedPath::new(PathRoot::Variable(head), Path::new(steps)?))
        } else if allow_view {
            let mut names = vec![head];
            names.extend(steps);
            Ok(QualifiedPath::new(PathRoot::ViewRoot, Path::new(names)?))
        } else {
            Err(Error::UnboundVariable(head))
        }
    }

    fn for_clause(&mut self, allow_view: bool) -> Result<Vec<Binding>> {
        self.keyword("for")?;
        let mut bindings: Vec<Binding> = Vec::new();
        loop {
            let var = self.name()?;
            if bindings.iter().any(|b| b.var == var) {
                return Err(Error::DuplicateVariable(var));
            }
            self.keyword("in")?;
            let source = self.source(&bindings, allow_view)?;
            bindings.push(Binding { var, source });
            if self.peek()? == Tok::Comma {
                self.next()?;
            } else {
                return Ok(bindings);
            }
        }
    }

    fn atom(&mut self) -> Result<ConditionAtom> {
        let lhs = self.var_path()?;
        self.expect(Tok::Eq)?;
        if let Tok::Str(_) = self.peek()? {
            let Tok::Str(s) = self.next()? else { unreachable!() };
            Ok(ConditionAtom::PathEqString(lhs, s))
        } else {
            Ok(ConditionAtom::PathEqPath(lhs, self.var_path()?))
        }
    }

    fn where_clause(&mut self) -> Result<Vec<ConditionAtom>> {
        if !self.peek_keyword("where")? {
            return Ok(Vec::new());
        }
        self.next()?;
        let mut atoms = vec![self.atom()?];
        while self.peek_keyword("and")? {
            self.next()?;
            atoms.push(self.atom()?);
        }
        Ok(atoms)
    }

    fn end(&mut self) -> Result<()> {
        match self.next()? {
            Tok::Eof => Ok(()),
            other => self.err(format!("trailing input starting with {}", other.describe())),
        }
    }
}

fn check_bound(bindings: &[Binding], var: &str) -> Result<()> {
    if bindings.iter().any(|b| b.var == var) {
        Ok(())
    } else {
        Err(Error::UnboundVariable(var.to_string()))
    }
}

fn check_atoms(bindings: &[Binding], atoms: &[ConditionAtom]) -> Result<()> {
    for a in atoms {
        for side in a.sides() {
            check_bound(bindings, &side.var)?;
        }
    }
    Ok(())
}

/// Parses a view definition.
pub fn parse_view_def(text: &str) -> Result<ViewDef> {
    let mut p = Parser::new(text);
    p.expect(Tok::Lt)?;
    let view_root = p.name()?;
    p.expect(Tok::Gt)?;
    p.expect(Tok::LBrace)?;
    let bindings = p.for_clause(false)?;
    let conditions = p.where_clause()?;
    check_atoms(&bindings, &conditions)?;
    p.keyword("return")?;
    p.expect(Tok::Lt)?;
    let wrapper = p.name()?;
    p.expect(Tok::Gt)?;
    let mut returns = Vec::new();
    loop {
        match p.peek()? {
            Tok::LBrace => {
                p.next()?;
                let r = p.var_path()?;
                check_bound(&bindings, &r.var)?;
                p.expect(Tok::RBrace)?;
                returns.push(r);
            }
            Tok::Lt => return p.err("nested constant elements are not supported in return"),
            _ => break,
        }
    }
    if returns.is_empty() {
        return p.err("the return clause needs at least one {expression}");
    }
    p.expect(Tok::LtSlash)?;
    let close = p.name()?;
    if close != wrapper {
        return p.err(format!("</{close}> does not close <{wrapper}>"));
    }
    p.expect(Tok::Gt)?;
    p.expect(Tok::RBrace)?;
    p.expect(Tok::LtSlash)?;
    let close = p.name()?;
    if close != view_root {
        return p.err(format!("</{close}> does not close <{view_root}>"));
    }
    p.expect(Tok::Gt)?;
    p.end()?;

    let view = ViewDef {
        view_root,
        wrapper,
        bindings,
        conditions,
        returns,
    };
    validate_view(&view)?;
    Ok(view)
}

fn validate_view(view: &ViewDef) -> Result<()> {
    let mut labels: Vec<String> = Vec::new();
    for i in 0..view.returns.len() {
        let l = view.return_label(i)?;
        if labels.contains(&l) {
            return Err(Error::DuplicateReturnName(l));
        }
        labels.push(l);
    }
    if view.view_root == view.wrapper {
        return Err(Error::syntax(0, "view root and wrapper must have different names"));
    }
    let names = view.source_names();
    for own in [&view.view_root, &view.wrapper] {
        if names.contains(own) || labels.contains(own) {
            return Err(Error::syntax(
                0,
                format!("`{own}` names both a view element and a source element"),
            ));
        }
    }
    Ok(())
}

/// Parses a view-level or source-level update statement. The level follows
/// from the for-clause roots: `doc(…)` means source, `view(…)` or an unbound
/// name means view.
pub fn parse_update(text: &str) -> Result<UpdateStatement> {
    let mut p = Parser::new(text);
    let bindings = p.for_clause(true)?;
    let view_rooted = bindings
        .iter()
        .any(|b| b.source.root == PathRoot::ViewRoot);
    let doc_rooted = bindings
        .iter()
        .any(|b| matches!(b.source.root, PathRoot::Document(_)));
    let level = match (view_rooted, doc_rooted) {
        (true, false) => Level::View,
        (false, true) => Level::Source,
        _ => return Err(Error::syntax(0, "bindings mix view and document roots")),
    };

    let where_at = p.pos;
    let conditions = p.where_clause()?;
    check_atoms(&bindings, &conditions)?;
    if level == Level::View {
        match conditions.as_slice() {
            [ConditionAtom::PathEqString(..)] => {}
            [] => return Err(Error::syntax(where_at, "a view update needs a where clause")),
            [_] => {
                return Err(Error::syntax(
                    where_at,
                    "a view update condition compares a path with a string",
                ))
            }
            _ => {
                return Err(Error::syntax(
                    where_at,
                    "a view update takes exactly one condition",
                ))
            }
        }
    }

    p.keyword("update")?;
    let var = p.name()?;
    check_bound(&bindings, &var)?;
    let path = Path::new(p.steps()?)?;
    let parent = if p.peek()? == Tok::Slash {
        p.next()?;
        p.expect(Tok::DotDot)?;
        true
    } else {
        false
    };
    let target = Target { var, path, parent };

    let close = match p.next()? {
        Tok::LBrace => Tok::RBrace,
        Tok::LParen => Tok::RParen,
        other => return p.err(format!("expected `{{` or `(`, found {}", other.describe())),
    };
    let insert = if p.peek_keyword("insert")? {
        true
    } else if p.peek_keyword("delete")? {
        false
    } else {
        return p.err("expected `insert` or `delete`");
    };
    p.next()?;
    let action = if p.peek()? == Tok::Lt {
        p.skip_ws();
        let len = element_extent(p.rest())?;
        let tree = parse_document(&p.rest()[..len])?;
        p.pos += len;
        if insert {
            Action::InsertTree(tree)
        } else {
            Action::DeleteTree(tree)
        }
    } else {
        if insert {
            return p.err("insert needs an XML tree");
        }
        let label = p.name()?;
        let deletes_binding = level == Level::Source
            && target.parent
            && target.path.is_empty()
            && normalize_path(&bindings, &target.var, &Path::empty())?
                .last_name()
                == Some(label.as_str());
        if deletes_binding {
            Action::DeleteBinding(target.var.clone())
        } else {
            Action::DeleteLabel(label)
        }
    };
    p.expect(close)?;
    p.end()?;

    Ok(UpdateStatement {
        level,
        bindings,
        conditions,
        target,
        action,
    })
}
