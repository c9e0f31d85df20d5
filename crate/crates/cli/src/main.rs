//! `mcdforge`: check, transform, emit and diff conceptual data models.
//!
//! Exit codes: 0 success, 1 parse or conformance failure, 2 forced
//! changes blocked, 3 I/O error, 64 usage error.

use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mcdforge::conformance::check;
use mcdforge::migrate::{diff, emit_migration, MigrateError};
use mcdforge::model::{ChangeItem, ConceptualModel, Diagnostic, PhysicalModel, Severity};
use mcdforge::parser::parse_file;
use mcdforge::sql::{emit_ddl, DialectId};
use mcdforge::tapi::build_physical;
use mcdforge::text::logical_to_string;
use mcdforge::transform::{transform, TransformMode};
use serde::Serialize;

const EXIT_FAILURE: u8 = 1;
const EXIT_FORCED: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "mcdforge", version, about = "Schema compiler for enriched conceptual data models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report parse errors and conformance diagnostics.
    Check {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write the canonical logical model.
    Transform {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Identifying)]
        mode: Mode,
        /// Output file; standard output when omitted.
        #[arg(short)]
        o: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the full pipeline and write the SQL scripts.
    Emit {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Identifying)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Dialect::Oracle)]
        dialect: Dialect,
        #[arg(short)]
        o: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the migration plan between two models.
    Diff {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Identifying)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Dialect::Oracle)]
        dialect: Dialect,
        #[arg(long)]
        allow_forced: bool,
        /// Directory receiving the migration scripts.
        #[arg(short)]
        o: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Identifying,
    NonIdentifying,
}

impl From<Mode> for TransformMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Identifying => TransformMode::Identifying,
            Mode::NonIdentifying => TransformMode::NonIdentifying,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Dialect {
    Oracle,
    Embedded,
}

impl From<Dialect> for DialectId {
    fn from(d: Dialect) -> Self {
        match d {
            Dialect::Oracle => DialectId::Oracle,
            Dialect::Embedded => DialectId::Embedded,
        }
    }
}

enum Failure {
    Invalid,
    Forced,
    Io(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Console {
    color: bool,
}

impl Console {
    fn new() -> Self {
        let color = match std::env::var("MCDFORGE_COLOR").as_deref() {
            Ok("always") => true,
            Ok("never") => false,
            _ => io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none(),
        };
        Console { color }
    }

    fn paint(&self, text: &str, code: &str) -> String {
        if self.color {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }

    fn diagnostic(&self, d: &Diagnostic) -> String {
        let code = match d.severity {
            Severity::Error => "31",
            Severity::Warning => "33",
        };
        let line = d.to_string();
        match &d.span {
            Some(span) => format!("{span}: {}", self.paint(&line, code)),
            None => self.paint(&line, code),
        }
    }

    fn change(&self, item: &ChangeItem) -> String {
        let line = item.to_string();
        match item.classification {
            mcdforge::model::Classification::Forced => self.paint(&line, "31"),
            mcdforge::model::Classification::Preserved => line,
        }
    }
}

#[derive(Serialize)]
struct JsonChange<'a> {
    classification: String,
    kind: String,
    path: &'a str,
    detail: String,
}

fn json_plan(items: &[ChangeItem]) -> String {
    let items: Vec<JsonChange> = items
        .iter()
        .map(|i| JsonChange {
            classification: i.classification.to_string(),
            kind: i.kind.to_string(),
            path: &i.path,
            detail: i.detail(),
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("plan serializes")
}

fn json_diagnostics(diagnostics: &[Diagnostic]) -> String {
    serde_json::to_string_pretty(diagnostics).expect("diagnostics serialize")
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Parsed and conformant model; diagnostics go to stderr.
fn load(console: &Console, path: &Path, format: Format) -> Result<ConceptualModel, Failure> {
    let source = read(path)?;
    let report = |diagnostics: &[Diagnostic]| {
        if diagnostics.is_empty() {
            return;
        }
        if format == Format::Json {
            eprintln!("{}", json_diagnostics(diagnostics));
        } else {
            for d in diagnostics {
                eprintln!("{}", console.diagnostic(d));
            }
        }
    };
    let model = parse_file(&path.display().to_string(), &source).map_err(|d| {
        report(&d);
        Failure::Invalid
    })?;
    let diagnostics = check(&model);
    report(&diagnostics);
    if diagnostics.iter().any(Diagnostic::is_error) {
        return Err(Failure::Invalid);
    }
    Ok(model)
}

fn pipeline(model: &ConceptualModel, mode: TransformMode) -> Result<PhysicalModel, Failure> {
    let logical = transform(model, mode).map_err(|e| {
        eprintln!("{e}");
        Failure::Invalid
    })?;
    build_physical(&logical, model).map_err(|e| {
        eprintln!("{e}");
        Failure::Invalid
    })
}

fn run(command: Command) -> Outcome {
    let console = Console::new();
    let mut out = io::stdout().lock();
    match command {
        Command::Check { model, format } => {
            let source = read(&model)?;
            let diagnostics = match parse_file(&model.display().to_string(), &source) {
                Ok(m) => check(&m),
                Err(d) => d,
            };
            if format == Format::Json {
                writeln!(out, "{}", json_diagnostics(&diagnostics))?;
            } else {
                for d in &diagnostics {
                    writeln!(out, "{}", console.diagnostic(d))?;
                }
            }
            if diagnostics.iter().any(Diagnostic::is_error) {
                return Err(Failure::Invalid);
            }
        }
        Command::Transform { model, mode, o, format } => {
            let m = load(&console, &model, format)?;
            let logical = transform(&m, mode.into()).map_err(|e| {
                eprintln!("{e}");
                Failure::Invalid
            })?;
            let text = logical_to_string(&logical);
            match o {
                Some(path) => fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Emit { model, mode, dialect, o, format } => {
            let m = load(&console, &model, format)?;
            let physical = pipeline(&m, mode.into())?;
            let bundle = emit_ddl(&physical, dialect.into()).map_err(|e| {
                eprintln!("{e}");
                Failure::Invalid
            })?;
            bundle.write_to(&o)?;
        }
        Command::Diff { from, to, mode, dialect, allow_forced, o, format } => {
            let old = pipeline(&load(&console, &from, format)?, mode.into())?;
            let new = pipeline(&load(&console, &to, format)?, mode.into())?;
            let plan = diff(&old, &new).map_err(|e| {
                eprintln!("{e}");
                Failure::Invalid
            })?;
            if format == Format::Json {
                writeln!(out, "{}", json_plan(&plan.items))?;
            } else {
                for item in &plan.items {
                    writeln!(out, "{}", console.change(item))?;
                }
            }
            match emit_migration(&plan, dialect.into(), allow_forced) {
                Err(MigrateError::ForcedChangesBlocked(items)) => {
                    eprintln!("{}", MigrateError::ForcedChangesBlocked(items));
                    return Err(Failure::Forced);
                }
                Err(e) => {
                    eprintln!("{e}");
                    return Err(Failure::Invalid);
                }
                Ok(bundle) => {
                    if let Some(dir) = o {
                        bundle.write_to(&dir)?;
                    }
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(EXIT_FAILURE),
        Err(Failure::Forced) => ExitCode::from(EXIT_FORCED),
        Err(Failure::Io(msg)) => {
            eprintln!("mcdforge: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
