//! The `xview` command line.
//!
//! Exit codes: 0 success, 2 untranslatable update, 3 unreadable input
//! (syntax, unsupported XML, wrong update level, bad arguments), 4
//! evaluation or I/O failure, 5 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evaluator::evaluate_view;
use crate::gen::fuzz;
use crate::lang::{parse_update, parse_view_def, render_update, Level, UpdateStatement, ViewDef};
use crate::translator::{translate, TranslationOutcome};
use crate::updater::{apply_update, UpdateTarget};
use crate::verifier::verify;
use crate::xml::{parse_document, serialize, DocumentStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNTRANSLATABLE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_EVAL: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "xview", version, about = "Translate view updates into source updates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct Common {
    /// Bind a document name used in `doc("name")` to a file.
    #[arg(long = "doc", value_name = "NAME=PATH", value_parser = parse_doc_binding)]
    docs: Vec<(String, PathBuf)>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a view over the bound documents.
    Eval {
        #[arg(long)]
        view: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Translate a view update into a source update.
    Translate {
        #[arg(long)]
        view: PathBuf,
        #[arg(long)]
        update: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Apply a source-level update to the bound documents.
    Apply {
        #[arg(long)]
        update: PathBuf,
        /// Write updated documents here (one file per document name)
        /// instead of printing them.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Translate, apply both ways, and check correctness and minimality.
    Verify {
        #[arg(long)]
        view: PathBuf,
        #[arg(long)]
        update: PathBuf,
        /// Check this source update instead of the translation.
        #[arg(long)]
        delta_s: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate, translate and verify random cases.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn parse_doc_binding(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => {
            Ok((name.to_string(), PathBuf::from(path)))
        }
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

fn read(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_view(path: &FsPath) -> Result<ViewDef> {
    parse_view_def(&read(path)?)
}

fn load_update(path: &FsPath, level: Level) -> Result<UpdateStatement> {
    let u = parse_update(&read(path)?)?;
    if u.level != level {
        return Err(Error::LevelMismatch {
            expected: level.name(),
            found: u.level.name(),
        });
    }
    Ok(u)
}

fn load_store(docs: &[(String, PathBuf)]) -> Result<DocumentStore> {
    let mut store = DocumentStore::new();
    for (name, path) in docs {
        store.insert(name.clone(), parse_document(&read(path)?)?);
    }
    Ok(store)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_parse_error() {
        EXIT_PARSE
    } else {
        EXIT_EVAL
    }
}

fn emit_rejection(out: &mut dyn Write, o: &TranslationOutcome) -> Result<i32> {
    writeln!(out, "{}", o.to_json())?;
    Ok(EXIT_UNTRANSLATABLE)
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Eval { view, common } => {
            let v = load_view(&view)?;
            let store = load_store(&common.docs)?;
            let text = serialize(&evaluate_view(&v, &store)?.tree);
            match common.format {
                Format::Text => writeln!(out, "{text}")?,
                Format::Json => writeln!(out, "{}", json!({ "view": text }))?,
            }
            Ok(EXIT_OK)
        }
        Command::Translate {
            view,
            update,
            format,
        } => {
            let v = load_view(&view)?;
            let dv = load_update(&update, Level::View)?;
            let outcome = translate(&v, &dv)?;
            let Some(ds) = outcome.translated() else {
                return emit_rejection(out, &outcome);
            };
            match format {
                Format::Text => writeln!(out, "{}", render_update(ds))?,
                Format::Json => writeln!(out, "{}", outcome.to_json())?,
            }
            Ok(EXIT_OK)
        }
        Command::Apply {
            update,
            out_dir,
            common,
        } => {
            let ds = load_update(&update, Level::Source)?;
            let mut store = load_store(&common.docs)?;
            let log = apply_update(&ds, UpdateTarget::Store(&mut store))?;
            if let Some(dir) = &out_dir {
                fs::create_dir_all(dir)?;
                for (name, tree) in store.iter() {
                    fs::write(dir.join(name), serialize(tree) + "\n")?;
                }
            }
            match common.format {
                Format::Text => {
                    if out_dir.is_none() {
                        for (name, tree) in store.iter() {
                            writeln!(out, "== {name} ==\n{}", serialize(tree))?;
                        }
                        writeln!(out, "== edits ==")?;
                    }
                    write!(out, "{}", log.to_json_lines())?;
                }
                Format::Json => {
                    let docs: serde_json::Map<String, serde_json::Value> = store
                        .iter()
                        .map(|(n, t)| (n.to_string(), json!(serialize(t))))
                        .collect();
                    let edits: Vec<_> = log.edits.iter().map(|e| e.to_json()).collect();
                    writeln!(out, "{}", json!({ "documents": docs, "edits": edits }))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            view,
            update,
            delta_s,
            common,
        } => {
            let v = load_view(&view)?;
            let dv = load_update(&update, Level::View)?;
            let store = load_store(&common.docs)?;
            let outcome = translate(&v, &dv)?;
            let ds = match (&delta_s, outcome.translated()) {
                (Some(p), _) => load_update(p, Level::Source)?,
                (None, Some(ds)) => ds.clone(),
                (None, None) => return emit_rejection(out, &outcome),
            };
            let report = verify(&v, &dv, &ds, &store)?;
            match common.format {
                Format::Json => writeln!(out, "{}", report.to_json())?,
                Format::Text => {
                    writeln!(out, "correct {}", report.correct)?;
                    if let Some(d) = &report.diff {
                        writeln!(out, "  diverges at {}", d.at)?;
                        writeln!(out, "  from source: {}", d.from_source)?;
                        writeln!(out, "  from view:   {}", d.from_view)?;
                    }
                    writeln!(out, "minimal {}", report.minimal)?;
                    if let Some(w) = &report.witness {
                        writeln!(out, "  unneeded edit: {}", w.to_json())?;
                    }
                    for l in &report.lemmas {
                        writeln!(out, "{} {}", l.lemma, if l.pass { "pass" } else { "fail" })?;
                    }
                }
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY })
        }
        Command::Fuzz {
            seed,
            count,
            format,
        } => {
            let summary = fuzz(seed, count)?;
            match format {
                Format::Text => write!(out, "{summary}")?,
                Format::Json => writeln!(out, "{}", summary.to_json())?,
            }
            Ok(if summary.failures.is_empty() {
                EXIT_OK
            } else {
                EXIT_VERIFY
            })
        }
    }
}

/// Runs the command line given in `args` (including the program name) and
/// returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_PARSE,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
