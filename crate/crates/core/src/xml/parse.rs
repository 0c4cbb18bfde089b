use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::tree::{Content, XmlTree};
use crate::error::{Error, Result};

struct Frame {
    label: String,
    children: Vec<XmlTree>,
    text: String,
}

impl Frame {
    fn finish(self) -> Result<XmlTree> {
        if self.children.is_empty() {
            if self.text.is_empty() {
                Ok(XmlTree::element(self.label, Vec::new()))
            } else {
                Ok(XmlTree::text(self.label, self.text))
            }
        } else if self.text.trim().is_empty() {
            Ok(XmlTree::element(self.label, self.children))
        } else {
            Err(Error::UnsupportedFeature(format!(
                "mixed content in <{}>",
                self.label
            )))
        }
    }
}

fn element_name(e: &BytesStart<'_>) -> Result<String> {
    let name = std::str::from_utf8(e.name().as_ref())
        .map_err(|err| Error::MalformedXml(err.to_string()))?
        .to_string();
    if name.contains(':') {
        return Err(Error::UnsupportedFeature(format!("namespaced name <{name}>")));
    }
    if e.attributes().next().is_some() {
        return Err(Error::UnsupportedFeature(format!("attributes on <{name}>")));
    }
    Ok(name)
}

fn malformed(err: impl std::fmt::Display) -> Error {
    Error::MalformedXml(err.to_string())
}

/// Parses the supported XML subset (elements and text only) into a tree
/// with fresh identifiers assigned in document order.
pub fn parse_document(text: &str) -> Result<XmlTree> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<Frame> = Vec::new();
    let mut root: Option<XmlTree> = None;

    loop {
        match reader.read_event().map_err(malformed)? {
            Event::Start(e) => {
                if root.is_some() {
                    return Err(Error::MalformedXml("content after the root element".into()));
                }
                stack.push(Frame {
                    label: element_name(&e)?,
                    children: Vec::new(),
                    text: String::new(),
                });
            }
            Event::Empty(e) => {
                let node = XmlTree::element(element_name(&e)?, Vec::new());
                match stack.last_mut() {
                    Some(top) => top.children.push(node),
                    None if root.is_none() => root = Some(node),
                    None => {
                        return Err(Error::MalformedXml("content after the root element".into()))
                    }
                }
            }
            Event::End(_) => {
                let frame = stack
                    .pop()
                    .ok_or_else(|| Error::MalformedXml("unexpected closing tag".into()))?;
                let node = frame.finish()?;
                match stack.last_mut() {
                    Some(top) => top.children.push(node),
                    None => root = Some(node),
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(malformed)?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(&s),
                    None if s.trim().is_empty() => {}
                    None => return Err(Error::MalformedXml("text outside the root element".into())),
                }
            }
            Event::CData(c) => {
                let s = std::str::from_utf8(&c).map_err(malformed)?;
                match stack.last_mut() {
                    Some(top) => top.text.push_str(s),
                    None => return Err(Error::MalformedXml("CDATA outside the root element".into())),
                }
            }
            Event::Comment(_) => return Err(Error::UnsupportedFeature("comments".into())),
            Event::PI(_) => return Err(Error::UnsupportedFeature("processing instructions".into())),
            Event::DocType(_) => return Err(Error::UnsupportedFeature("DOCTYPE".into())),
            Event::Decl(_) => {}
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err(Error::MalformedXml(format!(
            "unclosed element <{}>",
            stack.last().map(|f| f.label.as_str()).unwrap_or_default()
        )));
    }
    root.ok_or_else(|| Error::MalformedXml("no root element".into()))
}

/// Byte length of the first complete element at the start of `text`.
/// Used to cut an XML payload out of an update statement.
pub(crate) fn element_extent(text: &str) -> Result<usize> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);
    let mut depth = 0usize;
    loop {
        let ev = reader.read_event().map_err(malformed)?;
        match ev {
            Event::Start(_) => depth += 1,
            Event::End(_) => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| Error::MalformedXml("unexpected closing tag".into()))?;
            }
            Event::Empty(_) => {}
            Event::Eof => return Err(Error::MalformedXml("unterminated element".into())),
            _ => {
                if depth == 0 {
                    return Err(Error::MalformedXml("expected an element".into()));
                }
            }
        }
        if depth == 0 {
            return Ok(reader.buffer_position() as usize);
        }
    }
}

fn escape_into(out: &mut String, s: &str) {
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
}

/// Canonical serialization: no insignificant whitespace, children in stored
/// order, elements without children written as `<name/>`.
pub fn serialize(t: &XmlTree) -> String {
    let mut out = String::new();
    write_tree(&mut out, t);
    out
}

fn write_tree(out: &mut String, t: &XmlTree) {
    match t.content() {
        Content::Children(c) if c.is_empty() => {
            out.push('<');
            out.push_str(t.label());
            out.push_str("/>");
        }
        Content::Children(c) => {
            out.push('<');
            out.push_str(t.label());
            out.push('>');
            c.iter().for_each(|ch| write_tree(out, ch));
            out.push_str("</");
            out.push_str(t.label());
            out.push('>');
        }
        Content::Text(s) => {
            out.push('<');
            out.push_str(t.label());
            out.push('>');
            escape_into(out, s);
            out.push_str("</");
            out.push_str(t.label());
            out.push('>');
        }
    }
}
