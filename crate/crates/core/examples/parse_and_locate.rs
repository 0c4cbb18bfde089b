//! Parse a document, walk child-axis paths, and compare trees by value.

use xview::fixtures;
use xview::xml::{parse_document, serialize, Path};

fn main() -> xview::Result<()> {
    let doc = parse_document(fixtures::BKINF_DOC)?;
    println!("{}", serialize(&doc));

    let names = Path::parse("book/auths/aName")?;
    for n in doc.locate(&names) {
        println!("{:>6}  {}", n.id().get(), n.string_value());
    }

    let copy = doc.deep_copy();
    println!("value-equal copy: {}", copy.value_eq(&doc));
    println!("same root id: {}", copy.id() == doc.id());
    Ok(())
}
