//! Translate an insertion on the Qbk view into a source update.

use xview::fixtures;
use xview::lang::{parse_update, parse_view_def, render_update};
use xview::translator::translate;

fn main() -> xview::Result<()> {
    let view = parse_view_def(fixtures::QBK_VIEW)?;
    for text in [fixtures::QBK_UPDATE, fixtures::QBK_WRAPPER_INSERT] {
        let dv = parse_update(text)?;
        println!("view update:\n{}", render_update(&dv));
        let outcome = translate(&view, &dv)?;
        match outcome.translated() {
            Some(ds) => println!("=> {}:\n{}\n", outcome.tag(), render_update(ds)),
            None => println!("=> {}\n", outcome.to_json()),
        }
    }
    Ok(())
}
