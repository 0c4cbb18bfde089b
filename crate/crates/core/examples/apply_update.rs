//! Apply a source update and print the resulting edit log.

use xview::fixtures;
use xview::lang::parse_update;
use xview::updater::{apply_update, UpdateTarget};
use xview::xml::serialize;

fn main() -> xview::Result<()> {
    let mut store = fixtures::qbk_store();
    let ds = parse_update(fixtures::QBK_SOURCE_UPDATE)?;
    let log = apply_update(&ds, UpdateTarget::Store(&mut store))?;
    print!("{}", log.to_json_lines());
    println!("{}", serialize(store.get("bkInf.xml").expect("bound")));
    Ok(())
}
