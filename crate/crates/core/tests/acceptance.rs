//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use xview::evaluator::{eval_condition, evaluate_view, fortup_in, Source};
use xview::fixtures;
use xview::gen::{collect, fuzz, random_store, CaseResult, Family};
use xview::lang::{parse_update, parse_view_def, Action};
use xview::translator::{translate, Case, Guards, ReasonCode};
use xview::updater::{apply_update, Edit, UpdateTarget};
use xview::verifier::{check_correctness, check_minimality};
use xview::xml::serialize;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn fail_case(c: &CaseResult) -> String {
    format!("{}\n      {}", c.case.view_text, c.case.update_text)
}

fn all_precise(cases: &[CaseResult]) -> Result<(), String> {
    for c in cases {
        let r = c.report.as_ref().ok_or("case was not verified")?;
        ensure(r.correct && r.minimal, || {
            format!("correct={} minimal={}: {}", r.correct, r.minimal, fail_case(c))
        })?;
    }
    Ok(())
}

fn c1_worked_example() -> Check {
    let start = Instant::now();
    let v = parse_view_def(fixtures::QBK_VIEW).map_err(|e| e.to_string())?;
    let dv = parse_update(fixtures::QBK_UPDATE).map_err(|e| e.to_string())?;
    let want = parse_update(fixtures::QBK_SOURCE_UPDATE).map_err(|e| e.to_string())?;
    let out = translate(&v, &dv).map_err(|e| e.to_string())?;
    ensure(out.case() == Some(Case::T1), || format!("case {:?}", out.tag()))?;
    ensure(out.translated() == Some(&want), || format!("got {:?}", out.translated()))?;
    within(Duration::from_secs(1), start)?;
    Ok("translation equals the expected source statement".into())
}

fn c2_end_to_end() -> Check {
    let start = Instant::now();
    let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
    let dv = parse_update(fixtures::QBK_UPDATE).unwrap();
    let ds = parse_update(fixtures::QBK_SOURCE_UPDATE).unwrap();
    let s = fixtures::qbk_store();

    let books = s.get("bkInf.xml").unwrap().children();
    let is_books = books.iter().filter(|b| b.children()[1].string_value() == "IS").count();
    let unis = s.get("subjInf.xml").unwrap().children().len();
    ensure(is_books == 1 && books.len() >= 3 && unis >= 2, || {
        "fixture shape".to_string()
    })?;

    let (ok, diff) = check_correctness(&v, &dv, &ds, &s).map_err(|e| e.to_string())?;
    ensure(ok, || format!("diff {diff:?}"))?;

    let mut s1 = s.clone();
    apply_update(&ds, UpdateTarget::Store(&mut s1)).map_err(|e| e.to_string())?;
    for (before, after) in books.iter().zip(s1.get("bkInf.xml").unwrap().children()) {
        let is = before.children()[1].string_value() == "IS";
        let gained = after.children()[0]
            .children()
            .iter()
            .any(|a| a.string_value() == "Susan");
        ensure(gained == is, || format!("book {} changed wrongly", serialize(before)))?;
        if !is {
            ensure(before.value_eq(after), || "non-IS book changed".to_string())?;
        }
    }
    ensure(s.get("subjInf.xml").unwrap().value_eq(s1.get("subjInf.xml").unwrap()), || {
        "subjInf changed".into()
    })?;
    within(Duration::from_secs(1), start)?;
    Ok("view of updated source equals updated view; only the IS book gains Susan".into())
}

fn c3_same_variable(cases: &[CaseResult]) -> Check {
    ensure(cases.len() == 200, || format!("only {} T1 cases", cases.len()))?;
    all_precise(cases)?;
    Ok("200/200 correct and minimal".into())
}

fn c4_join(t2: &[CaseResult], prefix: &[CaseResult]) -> Check {
    ensure(t2.len() == 100, || format!("only {} T2 cases", t2.len()))?;
    all_precise(t2)?;
    ensure(prefix.len() == 100, || format!("only {} prefix cases", prefix.len()))?;
    for c in prefix {
        let reason = c.outcome.rejection().map(|r| r.reason);
        ensure(reason == Some(ReasonCode::TargetPrefixOfWherePath), || {
            format!("{}: {}", c.outcome.tag(), fail_case(c))
        })?;
    }
    Ok("100/100 joins precise; 100/100 join-prefix targets rejected".into())
}

fn c5_single_variable(cases: &[CaseResult]) -> Check {
    ensure(cases.len() == 100, || format!("only {} cases", cases.len()))?;
    all_precise(cases)?;
    let t3 = cases.iter().filter(|c| c.outcome.case() == Some(Case::T3)).count();
    let t4 = cases.len() - t3;
    ensure(t3 > 0 && t4 > 0, || format!("T3 {t3} T4 {t4}"))?;
    let mut removed = 0;
    for c in cases.iter().filter(|c| c.outcome.case() == Some(Case::T4)) {
        let ds = c.outcome.translated().unwrap();
        let Action::DeleteBinding(var) = &ds.action else {
            return Err("T4 without binding deletion".into());
        };
        let s = &c.case.store;
        let doomed: HashSet<_> = fortup_in(&ds.bindings, Source::Store(s))
            .unwrap()
            .iter()
            .filter(|t| eval_condition(&ds.conditions, t))
            .map(|t| t.get(var).unwrap().id())
            .collect();
        let mut s1 = s.clone();
        apply_update(ds, UpdateTarget::Store(&mut s1)).unwrap();
        ensure(doomed.iter().all(|id| s1.find(*id).is_none()), || {
            format!("binding survived: {}", fail_case(c))
        })?;
        let after = evaluate_view(&c.case.view, &s1).unwrap();
        let dangling = after
            .provenance
            .etrees()
            .iter()
            .any(|r| r.bindings.iter().any(|b| doomed.contains(b)));
        ensure(!dangling, || format!("wrapper tree survived: {}", fail_case(c)))?;
        removed += doomed.len();
    }
    Ok(format!(
        "T3 {t3}, T4 {t4}, all precise; {removed} bound nodes removed and absent after re-evaluation"
    ))
}

fn c6_rejections() -> Check {
    let ex1 = parse_view_def(fixtures::EX1_VIEW).unwrap();
    let qbk = parse_view_def(fixtures::QBK_VIEW).unwrap();
    let cross = parse_view_def(
        r#"<v>{for x in doc("r")/r/A, w in doc("s")/s/P return <e>{x/B}{w/Q}{x/K}</e>}</v>"#,
    )
    .unwrap();
    let scenarios = [
        // new wrapper tree: nowhere unique to put its parts
        (&ex1, r#"for u in v where u/e/B="b1" update u { insert <e><B>b2</B></e> }"#, ReasonCode::InsertionAtWrapperOrRoot, Some(ReasonCode::NoUniqueSourcePlacement)),
        (&qbk, r#"for u in Qbk where u/use/title="IS" update u { insert <use><title>ML</title></use> }"#, ReasonCode::InsertionAtWrapperOrRoot, Some(ReasonCode::NoUniqueSourcePlacement)),
        // new bound node outside any tuple
        (&ex1, r#"for r in v/e where r/B="b1" update r { insert <H>2</H> }"#, ReasonCode::InsertionAtWrapperOrRoot, Some(ReasonCode::ViolatesProduction)),
        (&ex1, r#"for r in v/e where r/H="1" update r { insert <H>1</H> }"#, ReasonCode::InsertionAtWrapperOrRoot, Some(ReasonCode::ViolatesProduction)),
        // new returned subtree: no condition says which source node gets it
        (&qbk, fixtures::QBK_WRAPPER_INSERT, ReasonCode::InsertionAtWrapperOrRoot, Some(ReasonCode::NoSpecifiableCondition)),
        (&ex1, r#"for r in v/e where r/H="1" update r { insert <B>b2</B> }"#, ReasonCode::InsertionAtWrapperOrRoot, Some(ReasonCode::NoSpecifiableCondition)),
        // condition and target on unrelated variables
        (&cross, r#"for r in v/e where r/Q="1" update r/K { insert <L>1</L> }"#, ReasonCode::CondTargetDifferentVarsNoJoin, None),
        (&cross, r#"for r in v/e where r/B="1" update r/Q { delete X }"#, ReasonCode::CondTargetDifferentVarsNoJoin, None),
    ];
    for (v, text, reason, cause) in scenarios {
        let out = translate(v, &parse_update(text).unwrap()).unwrap();
        let r = out.rejection().ok_or_else(|| format!("translated: {text}"))?;
        ensure(r.reason == reason && r.cause == cause, || {
            format!("{text}: got {:?}/{:?}", r.reason, r.cause)
        })?;
    }
    Ok(format!("{} scenarios, all rejected with their designated reason", scenarios.len()))
}

fn c7_lemmas(suites: &[&[CaseResult]]) -> Check {
    let mut n = 0;
    for cases in suites {
        for c in cases.iter().filter(|c| c.report.is_some()) {
            let r = c.report.as_ref().unwrap();
            for l in ["L1", "L3", "L4"] {
                ensure(r.lemma(l) == Some(true), || format!("{l} failed: {}", fail_case(c)))?;
            }
            n += 1;
        }
    }
    let bypass = Guards {
        prefix: false,
        ..Guards::default()
    };
    let unguarded = collect(404, Family::JoinPrefix, 100, bypass, |o| o.translated().is_some())
        .map_err(|e| e.to_string())?;
    let broken = unguarded
        .iter()
        .filter(|c| !c.report.as_ref().is_some_and(|r| r.correct))
        .count();
    ensure(broken > 0, || format!("{} unguarded translations, none incorrect", unguarded.len()))?;
    Ok(format!(
        "L1/L3/L4 hold on {n} translated cases; without the prefix guard {broken}/{} translations are incorrect",
        unguarded.len()
    ))
}

fn c8_oracle_sensitivity() -> Check {
    let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
    let dv = parse_update(fixtures::QBK_UPDATE).unwrap();
    let s = fixtures::qbk_store();

    let padded = parse_update(fixtures::QBK_PADDED_UPDATE).unwrap();
    let (ok, _) = check_correctness(&v, &dv, &padded, &s).unwrap();
    ensure(ok, || "padded statement should still be correct".into())?;
    let (minimal, witness) = check_minimality(&v, &dv, &padded, &s).unwrap();
    let xml_book = &s.get("bkInf.xml").unwrap().children()[2];
    ensure(xml_book.children()[1].string_value() == "XML", || "fixture order".into())?;
    let want = Edit::Inserted {
        parent: xml_book.children()[0].id(),
        tree: xview::xml::XmlTree::text("aName", "Susan"),
    };
    ensure(!minimal && witness.as_ref() == Some(&want), || format!("witness {witness:?}"))?;

    let mut bare = translate(&v, &dv).unwrap().translated().unwrap().clone();
    bare.conditions.pop();
    let (ok, diff) = check_correctness(&v, &dv, &bare, &s).unwrap();
    let diff = diff.ok_or("no diff")?;
    ensure(!ok && !diff.from_source.is_empty(), || "missing atom not detected".into())?;
    Ok(format!("padded edit flagged exactly; dropped condition diverges at {}", diff.at))
}

fn c9_determinism() -> Check {
    let v = parse_view_def(fixtures::QBK_VIEW).unwrap();
    let s = fixtures::qbk_store();
    let a = serialize(&evaluate_view(&v, &s).unwrap().tree);
    let b = serialize(&evaluate_view(&v, &s).unwrap().tree);
    ensure(a == b, || "view evaluation differs".into())?;

    use rand::SeedableRng;
    let ex1 = parse_view_def(fixtures::EX1_VIEW).unwrap();
    let mut r1 = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut r2 = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let (s1, s2) = (random_store(&mut r1), random_store(&mut r2));
        let x = serialize(&evaluate_view(&ex1, &s1).unwrap().tree);
        let y = serialize(&evaluate_view(&ex1, &s2).unwrap().tree);
        ensure(x == y, || "seeded stores evaluate differently".into())?;
    }

    let run = || {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = xview::cli::run(["xview", "fuzz", "--seed", "7", "--count", "200"], &mut out, &mut err);
        (code, out)
    };
    let (c1, o1) = run();
    let (c2, o2) = run();
    ensure(c1 == 0 && c1 == c2 && o1 == o2 && !o1.is_empty(), || "fuzz output differs".into())?;
    ensure(fuzz(7, 200).unwrap() == fuzz(7, 200).unwrap(), || "fuzz summary differs".into())?;
    Ok("evaluation and fuzz output byte-identical across runs".into())
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, name: &str, start: Instant, r: Check| {
        let took = start.elapsed();
        match r {
            Ok(msg) => println!("criterion {n} [{name}]: PASS ({took:.2?}) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} [{name}]: FAIL ({took:.2?}) {msg}");
            }
        }
    };

    let t = Instant::now();
    report(1, "worked example translation", t, c1_worked_example());
    let t = Instant::now();
    report(2, "worked example semantics", t, c2_end_to_end());

    let t = Instant::now();
    let t1 = collect(3, Family::General, 200, Guards::default(), |o| o.case() == Some(Case::T1))
        .expect("generation");
    let r3 = c3_same_variable(&t1).and_then(|m| {
        within(Duration::from_secs(30), t)?;
        Ok(m)
    });
    report(3, "same-variable updates", t, r3);

    let t = Instant::now();
    let t2 = collect(4, Family::Join, 100, Guards::default(), |o| o.case() == Some(Case::T2))
        .expect("generation");
    let prefix = collect(44, Family::JoinPrefix, 100, Guards::default(), |_| true).expect("generation");
    report(4, "join updates", t, c4_join(&t2, &prefix));

    let t = Instant::now();
    let single = collect(5, Family::SingleVar, 100, Guards::default(), |o| {
        matches!(o.case(), Some(Case::T3 | Case::T4))
    })
    .expect("generation");
    report(5, "label and wrapper deletions", t, c5_single_variable(&single));

    let t = Instant::now();
    report(6, "rejection taxonomy", t, c6_rejections());
    let t = Instant::now();
    report(7, "lemma checks", t, c7_lemmas(&[&t1, &t2, &single]));
    let t = Instant::now();
    report(8, "oracle sensitivity", t, c8_oracle_sensitivity());
    let t = Instant::now();
    report(9, "determinism", t, c9_determinism());

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
