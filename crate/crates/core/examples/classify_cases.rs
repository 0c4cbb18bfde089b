//! One update per translation case, plus a few rejections, on small views.

use xview::lang::{parse_update, parse_view_def};
use xview::translator::translate;

const CASES: &[(&str, &str)] = &[
    (
        r#"<v>{for x in doc("r")/r/A return <e>{x/B}{x/K}</e>}</v>"#,
        r#"for e in view(v)/v/e where e/B="1" update e/K { insert <L>2</L> }"#,
    ),
    (
        r#"<v>{for x in doc("r")/r/A, y in x/C, z in x/H where y/D=z return <e>{y/F}{z}</e>}</v>"#,
        r#"for e in view(v)/v/e where e/H="1" update e/F { delete G }"#,
    ),
    (
        r#"<v>{for x in doc("r")/r/A return <e>{x/B}{x/C}</e>}</v>"#,
        r#"for e in view(v)/v/e where e/B="1" update e { delete C }"#,
    ),
    (
        r#"<v>{for x in doc("r")/r/A return <e>{x/B}{x/C}</e>}</v>"#,
        r#"for u in v where u/e/B="1" update u { delete e }"#,
    ),
    (
        r#"<v>{for x in doc("r")/r/A return <e>{x/B}{x/C}</e>}</v>"#,
        r#"for u in v where u/e/B="1" update u { insert <e><B>9</B></e> }"#,
    ),
    (
        r#"<v>{for x in doc("r")/r/A, y in x/C return <e>{x/B}{y/D}</e>}</v>"#,
        r#"for u in v where u/e/B="1" update u { delete e }"#,
    ),
    (
        r#"<v>{for x in doc("r")/r/A, y in x/C where y/D="1" return <e>{x/B}{y}</e>}</v>"#,
        r#"for e in view(v)/v/e where e/B="1" update e/C { delete D }"#,
    ),
];

fn main() -> xview::Result<()> {
    for (view, update) in CASES {
        let v = parse_view_def(view)?;
        let dv = parse_update(update)?;
        let o = translate(&v, &dv)?;
        println!("{:<42} {update}", o.tag());
    }
    Ok(())
}
