//! View evaluation: context-based production of binding tuples, condition
//! testing, wrapper-tree construction and provenance.
//!
//! Equality in conditions compares string values (`y/D=z` holds between
//! `(D:1)` and `(H:1)`), existentially over every located subtree.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::lang::{Binding, ConditionAtom, ReturnExpr, VarPath, ViewDef};
use crate::xml::{DocumentStore, NodeId, PathRoot, QualifiedPath, XmlTree};

/// What `doc(…)` and view-rooted paths resolve against.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    Store(&'a DocumentStore),
    View(&'a XmlTree),
}

impl<'a> Source<'a> {
    /// Nodes located by an absolute (document- or view-rooted) path.
    pub fn resolve(self, q: &QualifiedPath) -> Result<Vec<&'a XmlTree>> {
        let (doc_name, tree) = match (&q.root, self) {
            (PathRoot::Document(d), Source::Store(s)) => (
                d.clone(),
                s.get(d).ok_or_else(|| Error::UnknownDocument(d.clone()))?,
            ),
            (PathRoot::Document(d), Source::View(_)) => {
                return Err(Error::UnknownDocument(d.clone()))
            }
            (PathRoot::ViewRoot, Source::View(t)) => ("view".to_string(), t),
            (PathRoot::ViewRoot, Source::Store(_)) => {
                return Err(Error::UnknownDocument("view".into()))
            }
            (PathRoot::Variable(v), _) => return Err(Error::UnresolvableVariable(v.clone())),
        };
        match q.steps.first_name() {
            None => Ok(vec![tree]),
            Some(first) if first == tree.label() => Ok(tree.locate(&q.steps.skip(1))),
            Some(first) => Err(Error::RootLabelMismatch {
                doc: doc_name,
                expected: first.to_string(),
                found: tree.label().to_string(),
            }),
        }
    }
}

/// One result of context-based production: a node per for-variable, in
/// binding order. The same source node may appear in many tuples.
#[derive(Debug, Clone)]
pub struct Tuple<'a> {
    bindings: &'a [Binding],
    nodes: Vec<&'a XmlTree>,
}

impl<'a> Tuple<'a> {
    pub fn get(&self, var: &str) -> Option<&'a XmlTree> {
        let i = self.bindings.iter().position(|b| b.var == var)?;
        self.nodes.get(i).copied()
    }

    pub fn nodes(&self) -> &[&'a XmlTree] {
        &self.nodes
    }

    pub fn ids(&self) -> Vec<NodeId> {
        self.nodes.iter().map(|n| n.id()).collect()
    }

    /// Subtrees at `var/path` within this tuple.
    pub fn locate(&self, vp: &VarPath) -> Vec<&'a XmlTree> {
        self.get(&vp.var)
            .map(|n| n.locate(&vp.path))
            .unwrap_or_default()
    }
}

/// Nested-loop production over `bindings`; each binding enumerates its
/// located subtrees in document order within the context of the earlier
/// bindings. No deduplication.
pub fn fortup_in<'a>(bindings: &'a [Binding], source: Source<'a>) -> Result<Vec<Tuple<'a>>> {
    let mut fixed: Vec<Option<Vec<&'a XmlTree>>> = Vec::with_capacity(bindings.len());
    for b in bindings {
        fixed.push(match &b.source.root {
            PathRoot::Variable(_) => None,
            _ => Some(source.resolve(&b.source)?),
        });
    }
    let mut partial: Vec<Vec<&'a XmlTree>> = vec![Vec::new()];
    for (i, b) in bindings.iter().enumerate() {
        let ctx_index = match &b.source.root {
            PathRoot::Variable(v) => Some(
                bindings[..i]
                    .iter()
                    .position(|p| &p.var == v)
                    .ok_or_else(|| Error::UnboundVariable(v.clone()))?,
            ),
            _ => None,
        };
        let mut next = Vec::new();
        for t in partial {
            let candidates = match (ctx_index, &fixed[i]) {
                (Some(c), _) => t[c].locate(&b.source.steps),
                (None, Some(nodes)) => nodes.clone(),
                (None, None) => unreachable!("non-variable roots are resolved up front"),
            };
            for n in candidates {
                let mut ext = t.clone();
                ext.push(n);
                next.push(ext);
            }
        }
        partial = next;
    }
    Ok(partial
        .into_iter()
        .map(|nodes| Tuple { bindings, nodes })
        .collect())
}

/// Tuples of a view's for-clause over a document store.
pub fn fortup<'a>(v: &'a ViewDef, s: &'a DocumentStore) -> Result<Vec<Tuple<'a>>> {
    fortup_in(&v.bindings, Source::Store(s))
}

/// Conjunction of the atoms on one tuple. An empty conjunction holds.
pub fn eval_condition(atoms: &[ConditionAtom], t: &Tuple<'_>) -> bool {
    atoms.iter().all(|a| match a {
        ConditionAtom::PathEqString(lhs, lit) => {
            t.locate(lhs).iter().any(|n| n.string_value() == *lit)
        }
        ConditionAtom::PathEqPath(lhs, rhs) => {
            let left: BTreeSet<String> = t.locate(lhs).iter().map(|n| n.string_value()).collect();
            t.locate(rhs).iter().any(|n| left.contains(&n.string_value()))
        }
    })
}

/// Links from a view instance back to the tuples and source nodes it was
/// built from.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    etrees: Vec<EtreeRecord>,
    source_of: HashMap<NodeId, NodeId>,
    gamma_return: HashMap<NodeId, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtreeRecord {
    /// Position of the tuple in the full production, including tuples that
    /// failed the condition.
    pub tuple_index: usize,
    pub etree: NodeId,
    /// Source node per for-variable.
    pub bindings: Vec<NodeId>,
}

impl Provenance {
    /// One record per wrapper tree, in view order.
    pub fn etrees(&self) -> &[EtreeRecord] {
        &self.etrees
    }

    pub fn etree_for_tuple(&self, tuple_index: usize) -> Option<NodeId> {
        self.etrees
            .iter()
            .find(|r| r.tuple_index == tuple_index)
            .map(|r| r.etree)
    }

    pub fn tuple_for_etree(&self, etree: NodeId) -> Option<usize> {
        self.etrees
            .iter()
            .find(|r| r.etree == etree)
            .map(|r| r.tuple_index)
    }

    /// Source node a view node was copied from.
    pub fn source_of(&self, view_node: NodeId) -> Option<NodeId> {
        self.source_of.get(&view_node).copied()
    }

    /// Return expression that produced a wrapper child.
    pub fn return_of(&self, gamma_root: NodeId) -> Option<usize> {
        self.gamma_return.get(&gamma_root).copied()
    }

    /// True iff tuples and wrapper trees are in one-to-one correspondence.
    pub fn is_bijective(&self) -> bool {
        let tuples: BTreeSet<_> = self.etrees.iter().map(|r| r.tuple_index).collect();
        let trees: BTreeSet<_> = self.etrees.iter().map(|r| r.etree).collect();
        tuples.len() == self.etrees.len() && trees.len() == self.etrees.len()
    }
}

/// Wrapper tree for one tuple plus the provenance it contributes.
pub struct Etree {
    pub tree: XmlTree,
    pub source_of: Vec<(NodeId, NodeId)>,
    pub gamma_return: Vec<(NodeId, usize)>,
}

/// Builds the wrapper tree of a tuple: deep copies of every subtree located
/// by each return expression, expression order outer, document order inner.
/// A return expression with an empty path copies the bound node itself.
pub fn build_etree(wrapper: &str, returns: &[ReturnExpr], t: &Tuple<'_>) -> Etree {
    let mut source_of = Vec::new();
    let mut gamma_return = Vec::new();
    let mut children = Vec::new();
    for (ri, r) in returns.iter().enumerate() {
        for n in t.locate(r) {
            let copy = n.deep_copy_with(&mut |new, old| source_of.push((new, old)));
            gamma_return.push((copy.id(), ri));
            children.push(copy);
        }
    }
    Etree {
        tree: XmlTree::element(wrapper, children),
        source_of,
        gamma_return,
    }
}

/// A materialized view instance and its provenance.
#[derive(Debug, Clone)]
pub struct ViewInstance {
    pub tree: XmlTree,
    pub provenance: Provenance,
}

impl ViewInstance {
    /// The wrapper tree built from production tuple `tuple_index`, if it
    /// passed the condition and is still present.
    pub fn etree(&self, tuple_index: usize) -> Option<&XmlTree> {
        let id = self.provenance.etree_for_tuple(tuple_index)?;
        self.tree.children().iter().find(|c| c.id() == id)
    }
}

/// Evaluates a view over a store.
pub fn evaluate_view(v: &ViewDef, s: &DocumentStore) -> Result<ViewInstance> {
    let tuples = fortup(v, s)?;
    let mut prov = Provenance::default();
    let mut etrees = Vec::new();
    for (i, t) in tuples.iter().enumerate() {
        if !eval_condition(&v.conditions, t) {
            continue;
        }
        let e = build_etree(&v.wrapper, &v.returns, t);
        prov.etrees.push(EtreeRecord {
            tuple_index: i,
            etree: e.tree.id(),
            bindings: t.ids(),
        });
        prov.source_of.extend(e.source_of);
        prov.gamma_return.extend(e.gamma_return);
        etrees.push(e.tree);
    }
    Ok(ViewInstance {
        tree: XmlTree::element(v.view_root.clone(), etrees),
        provenance: prov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lang::parse_view_def;
    use crate::xml::{parse_document, serialize, Path};

    fn ex1() -> ViewDef {
        parse_view_def(fixtures::EX1_VIEW).unwrap()
    }

    /// Nested loops written out by hand for the three-variable view:
    /// x over r/A, y over x/C, z over x/H.
    fn brute_force(store: &DocumentStore) -> Vec<Vec<NodeId>> {
        let r = store.get("r").unwrap();
        let mut out = Vec::new();
        for a in r.children().iter().filter(|n| n.label() == "A") {
            for c in a.children().iter().filter(|n| n.label() == "C") {
                for h in a.children().iter().filter(|n| n.label() == "H") {
                    out.push(vec![a.id(), c.id(), h.id()]);
                }
            }
        }
        out
    }

    #[test]
    fn fortup_on_d1() {
        let v = ex1();
        let s = fixtures::d1_store();
        let tuples = fortup(&v, &s).unwrap();
        assert_eq!(tuples.len(), 2);
        let got: Vec<_> = tuples.iter().map(|t| t.ids()).collect();
        assert_eq!(got, brute_force(&s));
        assert_eq!(tuples[0].get("y").unwrap().string_value(), "1g1");
        assert_eq!(tuples[1].get("y").unwrap().string_value(), "2");
    }

    #[test]
    fn fortup_shares_copies_of_outer_bindings() {
        let v = ex1();
        let s = DocumentStore::new().with(
            "r",
            parse_document("<r><A><C><D>1</D></C><H>1</H></A><A><C><D>2</D></C><H>2</H></A></r>")
                .unwrap(),
        );
        let got: Vec<_> = fortup(&v, &s).unwrap().iter().map(|t| t.ids()).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got, brute_force(&s));

        let s2 = DocumentStore::new().with(
            "r",
            parse_document("<r><A><C><D>1</D></C><C><D>3</D></C><H>1</H></A></r>").unwrap(),
        );
        let got: Vec<_> = fortup(&v, &s2).unwrap().iter().map(|t| t.ids()).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0][0], got[1][0]);
        assert_eq!(got, brute_force(&s2));
    }

    #[test]
    fn fortup_errors() {
        let v = ex1();
        assert_eq!(
            fortup(&v, &DocumentStore::new()).unwrap_err(),
            Error::UnknownDocument("r".into())
        );
        let s = DocumentStore::new().with("r", parse_document("<q/>").unwrap());
        assert!(matches!(
            fortup(&v, &s).unwrap_err(),
            Error::RootLabelMismatch { .. }
        ));
        let empty = DocumentStore::new().with("r", parse_document("<r/>").unwrap());
        assert!(fortup(&v, &empty).unwrap().is_empty());
    }

    #[test]
    fn conditions_on_d1() {
        let v = ex1();
        let s = fixtures::d1_store();
        let tuples = fortup(&v, &s).unwrap();
        assert!(eval_condition(&v.conditions, &tuples[0]));
        assert!(!eval_condition(&v.conditions[..1], &tuples[1]));
        assert!(eval_condition(&[], &tuples[1]));
    }

    #[test]
    fn etree_copies_every_located_tree() {
        let v = ex1();
        let s = fixtures::d1_store();
        let tuples = fortup(&v, &s).unwrap();
        let e = build_etree(&v.wrapper, &v.returns, &tuples[0]);
        assert_eq!(
            serialize(&e.tree),
            "<e><B>b1</B><C><D>1</D><F><G>g1</G></F></C><C><D>2</D></C><G>g1</G><H>1</H></e>"
        );
        let no_b = DocumentStore::new().with(
            "r",
            parse_document("<r><A><C><D>1</D></C><H>1</H></A></r>").unwrap(),
        );
        let tuples = fortup(&v, &no_b).unwrap();
        let e = build_etree(&v.wrapper, &v.returns, &tuples[0]);
        assert_eq!(serialize(&e.tree), "<e><C><D>1</D></C><H>1</H></e>");
        let nothing = build_etree("e", &[VarPath::new("x", Path::parse("Q").unwrap())], &tuples[0]);
        assert!(nothing.tree.children().is_empty());
    }

    #[test]
    fn evaluates_example_one() {
        let v = ex1();
        let s = fixtures::d1_store();
        let inst = evaluate_view(&v, &s).unwrap();
        assert_eq!(
            serialize(&inst.tree),
            "<v><e><B>b1</B><C><D>1</D><F><G>g1</G></F></C><C><D>2</D></C><G>g1</G><H>1</H></e></v>"
        );
        assert!(inst.provenance.is_bijective());
        assert_eq!(inst.provenance.etrees().len(), 1);
        assert_eq!(inst.provenance.etrees()[0].tuple_index, 0);

        // every copied node traces back to a value-equal source node
        for n in inst.tree.children()[0].children() {
            let src = s.find(inst.provenance.source_of(n.id()).unwrap()).unwrap();
            assert!(src.value_eq(n));
            assert!(inst.provenance.return_of(n.id()).is_some());
        }
    }

    #[test]
    fn no_satisfying_tuple_gives_empty_view() {
        let v = ex1();
        let s = DocumentStore::new().with(
            "r",
            parse_document("<r><A><C><D>2</D></C><H>1</H></A></r>").unwrap(),
        );
        assert_eq!(serialize(&evaluate_view(&v, &s).unwrap().tree), "<v/>");
    }

    #[test]
    fn qbk_wrapper_trees_carry_all_four_returns() {
        let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
        let inst = evaluate_view(&v, &fixtures::qbk_store()).unwrap();
        let uses = inst.tree.children();
        assert_eq!(uses.len(), 3);
        for u in uses {
            let labels: Vec<_> = u.children().iter().map(|c| c.label()).collect();
            assert_eq!(labels, ["auths", "title", "uName", "profs"]);
        }
        let titles: Vec<_> = uses.iter().map(|u| u.children()[1].string_value()).collect();
        assert_eq!(titles, ["IS", "IS", "DB"]);
    }

    #[test]
    fn evaluation_is_deterministic() {
        let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
        let s = fixtures::qbk_store();
        let a = serialize(&evaluate_view(&v, &s).unwrap().tree);
        let b = serialize(&evaluate_view(&v, &s).unwrap().tree);
        assert_eq!(a, b);
    }
}
