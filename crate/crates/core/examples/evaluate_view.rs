//! Materialize a view and show which source node each returned subtree
//! came from.

use xview::evaluator::evaluate_view;
use xview::fixtures;
use xview::lang::parse_view_def;
use xview::xml::serialize;

fn main() -> xview::Result<()> {
    let view = parse_view_def(fixtures::QBK_VIEW)?;
    let store = fixtures::qbk_store();
    let inst = evaluate_view(&view, &store)?;
    println!("{}\n", serialize(&inst.tree));

    for rec in inst.provenance.etrees() {
        let etree = inst.tree.find(rec.etree).expect("etree in view");
        println!("tuple {} -> <{}>", rec.tuple_index, etree.label());
        for child in etree.children() {
            let src = inst.provenance.source_of(child.id()).expect("copied");
            let doc = store
                .iter()
                .find(|(_, t)| t.find(src).is_some())
                .map_or("?", |(name, _)| name);
            println!("  {:<6} from node {:>3} in {doc}", child.label(), src.get());
        }
    }
    Ok(())
}
