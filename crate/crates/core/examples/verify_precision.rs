//! Check a translation for correctness and minimality, then show what the
//! checks report for an over-broad and an under-constrained source update.

use xview::fixtures;
use xview::lang::{parse_update, parse_view_def};
use xview::translator::translate;
use xview::verifier::verify;

fn main() -> xview::Result<()> {
    let view = parse_view_def(fixtures::QBK_VIEW)?;
    let dv = parse_update(fixtures::QBK_UPDATE)?;
    let store = fixtures::qbk_store();

    let ds = translate(&view, &dv)?.translated().cloned().expect("translatable");
    let dropped = parse_update(
        r#"for x in doc("bkInf.xml")/bkInf/book update x/auths { insert <aName>Susan</aName> }"#,
    )?;
    let padded = parse_update(fixtures::QBK_PADDED_UPDATE)?;

    for (name, candidate) in [("translated", ds), ("no condition", dropped), ("padded", padded)] {
        let r = verify(&view, &dv, &candidate, &store)?;
        println!("{name:<14} correct={} minimal={}", r.correct, r.minimal);
        if let Some(d) = &r.diff {
            println!("{:14} first difference at {}", "", d.at);
        }
        if let Some(w) = &r.witness {
            println!("{:14} unneeded edit {}", "", w.to_json());
        }
    }
    Ok(())
}
