// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Six rewriting passes from a program to per-engine opcode streams.
//!
//! | pass | removes                               | leaves                                |
//! |------|---------------------------------------|---------------------------------------|
//! | 1    | composite gate calls                  | sequential gate blocks of native gates|
//! | 2    | native gate calls, gate blocks        | events and function calls             |
//! | 3    | function calls                        | nested events and actions             |
//! | 4    | nesting, relative start times, Measure| one absolute event per distinct time  |
//! | 5    | symbols and calculations              | tick start times, SI literals         |
//! | 6    | composite actions                     | one `SetValue` per engine parameter   |
//!
//! Every intermediate is an ordinary [`ExperimentAst`] that serializes to
//! valid, lint-clean XML. The backend then turns the pass-6 form into a
//! [`CompiledProgram`].

mod channelize;
mod emit;
mod expand;
mod flatten;
mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::caldb::registry::{ChannelRegistry, RegistryError};
use crate::caldb::CalibrationSnapshot;
use crate::isa::CompiledProgram;
use crate::lang::*;
use crate::par::Execution;
use crate::stdlib::{StandardLibrary, StdlibError};
use crate::symbolics::{EvalError, Expression, Quantity, Scope, WithCalculations};

pub use channelize::channelize;
pub use emit::emit_opcodes;
pub use expand::{expand_composite_gates, expand_functions, lower_gates};
pub use flatten::flatten;
pub use solve::{solve_symbols, to_ticks, TICK_TOLERANCE};

/// Default bound on nested gate and function expansion.
pub const MAX_EXPANSION_DEPTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pass {
    /// Linting and header inclusion, before any rewriting.
    Frontend,
    ExpandGates,
    LowerGates,
    ExpandFunctions,
    Flatten,
    Solve,
    Channelize,
    /// Opcode generation from the pass-6 form.
    Emit,
}

impl Pass {
    pub const LOWERING: [Pass; 6] =
        [Pass::ExpandGates, Pass::LowerGates, Pass::ExpandFunctions, Pass::Flatten, Pass::Solve, Pass::Channelize];

    /// 1 to 6 for the rewriting passes.
    pub fn number(self) -> Option<usize> {
        Pass::LOWERING.iter().position(|&p| p == self).map(|i| i + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Pass::Frontend => "frontend",
            Pass::ExpandGates => "expand-gates",
            Pass::LowerGates => "lower-gates",
            Pass::ExpandFunctions => "expand-functions",
            Pass::Flatten => "flatten",
            Pass::Solve => "solve",
            Pass::Channelize => "channelize",
            Pass::Emit => "emit",
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "pass {n} ({})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Error)]
pub enum ErrorKind {
    #[error("{}", lint_summary(.0))]
    Lint(Vec<Diagnostic>),
    #[error("no definition for `{0}`")]
    UnknownDefinition(String),
    #[error(transparent)]
    Binding(#[from] StdlibError),
    #[error("expansion of `{name}` exceeds depth {limit}")]
    RecursionLimit { name: String, limit: usize },
    #[error("start time {seconds} s is before the segment start")]
    NegativeTime { seconds: f64 },
    #[error("unresolved name `{0}`")]
    UnresolvedName(String),
    #[error(transparent)]
    Eval(EvalError),
    #[error("{seconds} s is {ticks} ticks; residual {residual:.3} exceeds 0.01 tick")]
    TickQuantization { seconds: f64, ticks: f64, residual: f64 },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("engine `{engine}` is written twice at tick {tick}")]
    EngineConflict { engine: String, tick: u64 },
    #[error("{0}")]
    Backend(String),
    #[error("intermediate form is invalid: {0}")]
    Invariant(String),
}

fn lint_summary(diags: &[Diagnostic]) -> String {
    let errors: Vec<_> = diags.iter().filter(|d| d.is_error()).collect();
    match errors.first() {
        Some(first) if errors.len() > 1 => format!("{first} (and {} more)", errors.len() - 1),
        Some(first) => first.to_string(),
        None => "lint failed".into(),
    }
}

impl From<EvalError> for ErrorKind {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UnresolvedName(n) => ErrorKind::UnresolvedName(n),
            other => ErrorKind::Eval(other),
        }
    }
}

/// A failure, tagged with the pass that raised it and an element path.
#[derive(Debug, Error)]
#[error("{pass}: {path}: {kind}")]
pub struct CompileError {
    pub pass: Pass,
    pub path: String,
    pub kind: ErrorKind,
}

impl CompileError {
    pub fn new(pass: Pass, path: impl Into<String>, kind: impl Into<ErrorKind>) -> Self {
        CompileError { pass, path: path.into(), kind: kind.into() }
    }

    /// Whether the input itself was rejected by the linter.
    pub fn is_lint(&self) -> bool {
        matches!(self.kind, ErrorKind::Lint(_)) && self.pass == Pass::Frontend
    }

    /// Whether an internal consistency check failed.
    pub fn is_internal(&self) -> bool {
        matches!(self.kind, ErrorKind::Invariant(_))
    }
}

#[derive(Debug, Clone)]
pub struct CompileOptions {
    /// Fail instead of warning on tick quantization residuals.
    pub strict: bool,
    pub execution: Execution,
    pub registry: ChannelRegistry,
    /// Source of headers for names the program does not define. `None`
    /// requires a self-contained program.
    pub library: Option<Arc<StandardLibrary>>,
    pub max_depth: usize,
    /// Lint every intermediate and fail on any diagnostic.
    pub check_passes: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            strict: false,
            execution: Execution::available(),
            registry: ChannelRegistry::default_machine(),
            library: Some(Arc::new(crate::stdlib::builtin().clone())),
            max_depth: MAX_EXPANSION_DEPTH,
            check_passes: true,
        }
    }
}

/// Result of [`compile`].
#[derive(Debug, Clone)]
pub struct Compilation {
    pub program: CompiledProgram,
    /// The output of each rewriting pass, in order.
    pub stages: Vec<(Pass, ExperimentAst)>,
    pub warnings: Vec<Diagnostic>,
}

impl Compilation {
    pub fn stage(&self, pass: Pass) -> Option<&ExperimentAst> {
        self.stages.iter().find(|(p, _)| *p == pass).map(|(_, a)| a)
    }

    /// Writes `<stem>.pass<k>.xml` for every stage into `dir`.
    pub fn write_dumps(&self, dir: impl AsRef<Path>, stem: &str) -> std::io::Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for (pass, ast) in &self.stages {
            let path = dir.as_ref().join(format!("{stem}.pass{}.xml", pass.number().unwrap_or(0)));
            std::fs::write(&path, serialize_xml(ast))?;
            out.push(path);
        }
        Ok(out)
    }
}

/// SHA-256 of the canonical XML form.
pub fn source_digest(ast: &ExperimentAst) -> [u8; 32] {
    Sha256::digest(serialize_xml(ast).as_bytes()).into()
}

/// Calculation definitions of `ast`, by name.
pub fn calculations(ast: &ExperimentAst) -> BTreeMap<String, Expression> {
    ast.definitions
        .iter()
        .filter_map(|d| match d {
            Definition::Calculation(c) => Some((c.name.clone(), c.expr.clone())),
            _ => None,
        })
        .collect()
}

pub fn compile(ast: &ExperimentAst, snapshot: &CalibrationSnapshot, options: &CompileOptions) -> Result<Compilation, CompileError> {
    let mut warnings = Vec::new();
    let frontend = |kind: ErrorKind| CompileError::new(Pass::Frontend, "/Experiment", kind);
    let diags = match &options.library {
        Some(lib) => lint_with(ast, lib.as_ref()),
        None => lint_with(ast, &NoLibrary),
    };
    if has_errors(&diags) {
        return Err(frontend(ErrorKind::Lint(diags)));
    }
    warnings.extend(diags);
    let full = match &options.library {
        Some(lib) => lib.include_headers(ast).map_err(|e| frontend(e.into()))?,
        None => ast.clone(),
    };

    let calcs = calculations(&full);
    let scope = WithCalculations::new(snapshot, &calcs);
    let mut stages = Vec::new();
    let check = |pass: Pass, ast: &ExperimentAst| -> Result<(), CompileError> {
        if !options.check_passes {
            return Ok(());
        }
        let diags = lint_with(ast, &NoLibrary);
        match diags.iter().find(|d| d.is_error()) {
            Some(d) => Err(CompileError::new(pass, d.path.clone(), ErrorKind::Invariant(d.to_string()))),
            None => Ok(()),
        }
    };

    let p1 = expand_composite_gates(&full, options.max_depth)?;
    check(Pass::ExpandGates, &p1)?;
    let p2 = lower_gates(&p1)?;
    check(Pass::LowerGates, &p2)?;
    let p3 = expand_functions(&p2, options.max_depth)?;
    check(Pass::ExpandFunctions, &p3)?;
    let p4 = flatten(&p3, &scope, options.execution)?;
    check(Pass::Flatten, &p4)?;
    let (p5, w) = solve_symbols(&p4, &scope, options.strict, options.execution)?;
    warnings.extend(w);
    check(Pass::Solve, &p5)?;
    let p6 = channelize(&p5, &options.registry, options.execution)?;
    check(Pass::Channelize, &p6)?;

    let (mut program, w) = emit_opcodes(&p6, &options.registry, options.execution)?;
    warnings.extend(w);
    program.source_digest = source_digest(ast);
    program.snapshot = snapshot.version().map(|t| t.to_string());
    program
        .validate()
        .map_err(|e| CompileError::new(Pass::Emit, "/Experiment", ErrorKind::Invariant(e.to_string())))?;

    for (pass, ast) in Pass::LOWERING.into_iter().zip([p1, p2, p3, p4, p5, p6]) {
        stages.push((pass, ast));
    }
    Ok(Compilation { program, stages, warnings })
}

/// Span from a gate's start to its last action, found by lowering a
/// one-gate program.
pub fn gate_duration(call: &GateCall, library: &StandardLibrary, scope: &(impl Scope + Sync + ?Sized)) -> Result<Quantity, CompileError> {
    let mut seg = Segment::new("gate");
    seg.items.push(SegmentItem::GateBlock(GateBlock { schedule: Schedule::Parallel, items: vec![GateItem::Gate(call.clone())] }));
    let ast = ExperimentAst { program: Program { segments: vec![seg] }, ..Default::default() };
    let full = library.include_headers(&ast).map_err(|e| CompileError::new(Pass::Frontend, "/Experiment", e))?;
    let p1 = expand_composite_gates(&full, MAX_EXPANSION_DEPTH)?;
    let p2 = lower_gates(&p1)?;
    let mut p3 = expand_functions(&p2, MAX_EXPANSION_DEPTH)?;
    if let Some(SegmentItem::Event(e)) = p3.program.segments[0].items.first_mut() {
        e.start = StartTime::zero(TimeMode::Absolute);
    }
    let calcs = calculations(&p3);
    let scope = WithCalculations::new(scope, &calcs);
    let times = flatten::action_times(&p3.program.segments[0], &scope, "/Experiment/Program/Segment[1]")?;
    let end = times.iter().map(|t| t.0).fold(0.0, f64::max);
    Ok(Quantity::new(end, crate::symbolics::Dims::TIME).expect("finite"))
}
