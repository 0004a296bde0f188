// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! `qcl`: lint, compile, and simulate programs; inspect the calibration
//! database and the standard library.
//!
//! Every path and setting can come from a flag, an environment variable, or
//! a default, in that order of precedence:
//!
//! | flag            | variable      | default                          |
//! |-----------------|---------------|----------------------------------|
//! | `--db`          | `QCL_DB`      | built-in seed store              |
//! | `--date`        | `QCL_DATE`    | now (`most-recent` for queries)  |
//! | `--stdlib`      | `QCL_STDLIB`  | built-in standard library        |
//! | `--budget`      | `QCL_BUDGET`  | 10^12 ticks                      |
//! | `--report`      | `QCL_REPORT`  | none                             |
//!
//! Exit codes: 0 success, 1 the program failed to parse or lint, 2 a pass,
//! simulation, database, I/O, or usage error, 3 an internal invariant
//! violation.

mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use qcl_core::caldb::{CalibrationRecord, CalibrationStore, DateSelector, Timestamp};
use qcl_core::compiler::{compile, CompileError, CompileOptions, ErrorKind};
use qcl_core::isa::trace::{to_binary, to_jsonl};
use qcl_core::isa::{run_shots, CompiledProgram, MeasurementPlan, TraceKind};
use qcl_core::lang::{has_errors, lint_with, parse_unchecked, serialize_definition, ExperimentAst};
use qcl_core::par::Execution;
use qcl_core::stdlib::{builtin, StandardLibrary};

use report::{exit, RunReport, ShotSummary};

#[derive(Parser)]
#[command(name = "qcl", version, about = "Compiler and simulator for timed trapped-ion control programs")]
struct Cli {
    /// Also write the report as JSON to this file.
    #[arg(long, global = true, env = "QCL_REPORT")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct LibraryArgs {
    /// Directory of definition files overriding the built-in library.
    #[arg(long, env = "QCL_STDLIB")]
    stdlib: Option<PathBuf>,
}

#[derive(clap::Args)]
struct DbArgs {
    /// Calibration store file (one JSON record per line).
    #[arg(long, env = "QCL_DB")]
    db: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a program without compiling it.
    Lint {
        path: PathBuf,
        #[command(flatten)]
        library: LibraryArgs,
    },
    /// Compile a program to an engine container.
    Compile {
        path: PathBuf,
        #[command(flatten)]
        db: DbArgs,
        /// Snapshot time: a timestamp such as 2021-05-31-08-55, or `now`.
        #[arg(long, env = "QCL_DATE")]
        date: Option<String>,
        /// Write `<stem>.pass<k>.xml` for every pass into this directory.
        #[arg(long)]
        dump_passes: Option<PathBuf>,
        /// Container path; defaults to the input with a `.qclc` extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Fail on tick quantization residuals instead of warning.
        #[arg(long)]
        strict: bool,
        /// Run every pass on the calling thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        library: LibraryArgs,
    },
    /// Simulate a compiled container.
    Run {
        container: PathBuf,
        /// Measurement plan (JSON); by default every measurement reads 0.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Stop with an error past this tick.
        #[arg(long, env = "QCL_BUDGET", default_value_t = 1_000_000_000_000)]
        budget: u64,
        /// Trace file; `.bin` selects the binary form, anything else JSON
        /// lines. With several shots, shot k goes to `<stem>.shot<k>.<ext>`.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        shots: u64,
        #[arg(long)]
        sequential: bool,
    },
    /// Query or extend the calibration database.
    Db {
        #[command(flatten)]
        db: DbArgs,
        #[command(subcommand)]
        command: DbCommand,
    },
    /// Inspect the standard library.
    Stdlib {
        #[command(flatten)]
        library: LibraryArgs,
        #[command(subcommand)]
        command: StdlibCommand,
    },
}

#[derive(Subcommand)]
enum DbCommand {
    /// Print the record a date selector designates.
    Query {
        name: String,
        /// `most-recent`, a timestamp, `exact:<timestamp>`, or
        /// `latest-before:<timestamp>`.
        #[arg(long, env = "QCL_DATE", default_value = "most-recent")]
        date: String,
    },
    /// Add a record; requires a store file.
    Append {
        name: String,
        value: f64,
        unit: String,
        /// Record time; defaults to now.
        #[arg(long)]
        date: Option<String>,
    },
    /// Print the latest value of every parameter visible at a time.
    Snapshot {
        #[arg(long, env = "QCL_DATE")]
        date: Option<String>,
        /// Also write the snapshot as a store file.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum StdlibCommand {
    /// List every definition.
    List,
    /// Print one definition as XML.
    Show { name: String },
}

/// A command failure and its exit code.
struct Fail(u8, String);

type Step<T = ()> = Result<T, Fail>;

fn failure(e: impl std::fmt::Display) -> Fail {
    Fail(exit::FAILURE, e.to_string())
}

fn read_text(path: &Path) -> Step<String> {
    fs::read_to_string(path).map_err(|e| failure(format!("{}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: impl AsRef<[u8]>, report: &mut RunReport) -> Step {
    fs::write(path, bytes).map_err(|e| failure(format!("{}: {e}", path.display())))?;
    report.artifact(path);
    Ok(())
}

fn library(args: &LibraryArgs) -> Step<StandardLibrary> {
    match &args.stdlib {
        Some(dir) => StandardLibrary::with_overrides(dir).map_err(failure),
        None => Ok(builtin().clone()),
    }
}

fn store(args: &DbArgs) -> Step<CalibrationStore> {
    match &args.db {
        Some(path) => CalibrationStore::open(path).map_err(failure),
        None => Ok(CalibrationStore::seed()),
    }
}

fn timestamp(date: Option<&str>) -> Step<Timestamp> {
    match date {
        None | Some("now" | "most-recent") => Ok(Timestamp::now()),
        Some(text) => Timestamp::parse(text).map_err(failure),
    }
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::available()
    }
}

/// Parses a program; syntax and schema errors are lint failures.
fn load_program(path: &Path) -> Step<ExperimentAst> {
    parse_unchecked(&read_text(path)?).map_err(|e| Fail(exit::LINT, format!("{}: {e}", path.display())))
}

fn cmd_lint(path: &Path, args: &LibraryArgs, report: &mut RunReport) -> Step {
    let lib = library(args)?;
    let ast = load_program(path)?;
    let diags = lint_with(&ast, &lib);
    report.diagnose(&diags);
    if has_errors(&diags) {
        let n = diags.iter().filter(|d| d.is_error()).count();
        return Err(Fail(exit::LINT, format!("{n} lint error(s)")));
    }
    Ok(())
}

fn compile_failure(e: CompileError, report: &mut RunReport) -> Fail {
    if let ErrorKind::Lint(diags) = &e.kind {
        report.diagnose(diags);
    }
    let code = if e.is_lint() {
        exit::LINT
    } else if e.is_internal() {
        exit::INTERNAL
    } else {
        exit::FAILURE
    };
    Fail(code, e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn cmd_compile(
    path: &Path,
    db: &DbArgs,
    date: Option<&str>,
    dump_passes: Option<&Path>,
    output: Option<&Path>,
    strict: bool,
    sequential: bool,
    lib: &LibraryArgs,
    report: &mut RunReport,
) -> Step {
    let ast = load_program(path)?;
    let snapshot = store(db)?.snapshot(timestamp(date)?);
    let options = CompileOptions {
        strict,
        execution: execution(sequential),
        library: Some(Arc::new(library(lib)?)),
        ..CompileOptions::default()
    };
    let c = compile(&ast, &snapshot, &options).map_err(|e| compile_failure(e, report))?;
    report.diagnose(&c.warnings);
    let out = output.map(Path::to_path_buf).unwrap_or_else(|| path.with_extension("qclc"));
    write_bytes(&out, c.program.to_bytes().map_err(|e| Fail(exit::INTERNAL, e.to_string()))?, report)?;
    if let Some(dir) = dump_passes {
        fs::create_dir_all(dir).map_err(|e| failure(format!("{}: {e}", dir.display())))?;
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "program".into());
        for p in c.write_dumps(dir, &stem).map_err(|e| failure(format!("{}: {e}", dir.display())))? {
            report.artifact(p);
        }
    }
    report.summary.instruction_counts = c.program.instruction_counts().into_iter().map(|(n, k)| (n.to_string(), k)).collect();
    Ok(())
}

fn shot_path(base: &Path, shot: u64, shots: u64) -> PathBuf {
    if shots == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.shot{shot}.{}", ext.to_string_lossy()),
        None => format!("{stem}.shot{shot}"),
    };
    base.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    container: &Path,
    plan: Option<&Path>,
    budget: u64,
    trace_out: Option<&Path>,
    shots: u64,
    sequential: bool,
    report: &mut RunReport,
) -> Step {
    let bytes = fs::read(container).map_err(|e| failure(format!("{}: {e}", container.display())))?;
    let program = CompiledProgram::from_bytes(&bytes).map_err(|e| failure(format!("{}: {e}", container.display())))?;
    let plan = match plan {
        Some(p) => MeasurementPlan::from_json(&read_text(p)?).map_err(failure)?,
        None => MeasurementPlan::constant(false),
    };
    let results = run_shots(&program, &plan, budget, shots, execution(sequential)).map_err(failure)?;
    report.summary.instruction_counts = program.instruction_counts().into_iter().map(|(n, k)| (n.to_string(), k)).collect();
    for (shot, r) in results.iter().enumerate() {
        let shot = shot as u64;
        report.summary.shots.push(ShotSummary {
            shot,
            total_ticks: r.final_tick,
            segments_visited: r.segments_visited.iter().map(|&s| program.segments[s].clone()).collect(),
            measurements: r.events(TraceKind::MeasurementPublished).count(),
        });
        if let Some(base) = trace_out {
            let path = shot_path(base, shot, shots);
            let data = match path.extension().and_then(|e| e.to_str()) {
                Some("bin") => to_binary(&r.trace),
                _ => to_jsonl(&r.trace).into_bytes(),
            };
            write_bytes(&path, data, report)?;
        }
    }
    Ok(())
}

fn cmd_db(args: &DbArgs, command: &DbCommand, report: &mut RunReport) -> Step {
    let mut store = store(args)?;
    match command {
        DbCommand::Query { name, date } => {
            let selector = DateSelector::parse(date).map_err(failure)?;
            let rec = store.query(name, &selector).map_err(failure)?;
            report.summary.lines.push(rec.display_entry());
        }
        DbCommand::Append { name, value, unit, date } => {
            let Some(path) = &args.db else {
                return Err(failure("append needs a store file (--db or QCL_DB)"));
            };
            let rec = CalibrationRecord::new(name.clone(), *value, unit, Some(timestamp(date.as_deref())?)).map_err(failure)?;
            report.summary.lines.push(rec.display_entry());
            store.append(rec).map_err(failure)?;
            report.artifact(path);
        }
        DbCommand::Snapshot { date, output } => {
            let snap = store.snapshot(timestamp(date.as_deref())?);
            let mut pinned = CalibrationStore::new();
            for (_, rec) in snap.values() {
                report.summary.lines.push(rec.display_entry());
                pinned.append(rec.clone()).map_err(failure)?;
            }
            if let Some(out) = output {
                pinned.save(out).map_err(failure)?;
                report.artifact(out);
            }
        }
    }
    Ok(())
}

fn cmd_stdlib(args: &LibraryArgs, command: &StdlibCommand, report: &mut RunReport) -> Step {
    let lib = library(args)?;
    match command {
        StdlibCommand::List => {
            for e in lib.index() {
                report.summary.lines.push(format!("{} {} ({})", e.kind, e.name, e.file));
            }
        }
        StdlibCommand::Show { name } => {
            let def = lib.get(name).ok_or_else(|| failure(format!("no definition named `{name}`")))?;
            report.summary.lines.extend(serialize_definition(def).lines().map(str::to_string));
        }
    }
    Ok(())
}

fn dispatch(command: &Command) -> RunReport {
    let (name, result) = match command {
        Command::Lint { path, library } => {
            let mut r = RunReport::new("lint");
            let out = cmd_lint(path, library, &mut r);
            (r, out)
        }
        Command::Compile { path, db, date, dump_passes, output, strict, sequential, library } => {
            let mut r = RunReport::new("compile");
            let out = cmd_compile(path, db, date.as_deref(), dump_passes.as_deref(), output.as_deref(), *strict, *sequential, library, &mut r);
            (r, out)
        }
        Command::Run { container, plan, budget, trace_out, shots, sequential } => {
            let mut r = RunReport::new("run");
            let out = cmd_run(container, plan.as_deref(), *budget, trace_out.as_deref(), *shots, *sequential, &mut r);
            (r, out)
        }
        Command::Db { db, command } => {
            let mut r = RunReport::new("db");
            let out = cmd_db(db, command, &mut r);
            (r, out)
        }
        Command::Stdlib { library, command } => {
            let mut r = RunReport::new("stdlib");
            let out = cmd_stdlib(library, command, &mut r);
            (r, out)
        }
    };
    let mut report = name;
    if let Err(Fail(code, message)) = result {
        report.fail(code, message);
    }
    report
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::FAILURE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let report = dispatch(&cli.command);
    // A closed stdout (say, piped into `head`) is not an error.
    let _ = writeln!(std::io::stdout(), "{report}");
    if let Some(path) = &cli.report {
        if let Err(e) = fs::write(path, report.to_json()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(exit::FAILURE);
        }
    }
    ExitCode::from(report.status)
}
