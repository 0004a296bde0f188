// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Registry of named calculations, timing functions, and gates.
//!
//! Definitions are plain XML files, one per definition, listed in an
//! `index.json`. The built-in set is compiled into the binary; a user
//! directory with the same layout overrides it by name.

mod bind;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::lint::{event_item_names, gate_item_names};
use crate::lang::*;
use crate::symbolics::{Quantity, Scope};

pub use bind::{bind, Bindings};

#[derive(Debug, Error)]
pub enum StdlibError {
    #[error("no gate named `{0}`")]
    UnknownGate(String),
    #[error("no function named `{0}`")]
    UnknownFunction(String),
    #[error("no definition named `{0}`")]
    UnknownName(String),
    #[error("`{name}` acts on {expected} qubit(s), {got} given")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("`{name}` has no port `{port}`")]
    UnknownPort { name: String, port: String },
    #[error("`{name}` has no input `{input}`")]
    UnknownArgument { name: String, input: String },
    #[error("`{name}` requires input `{input}`")]
    MissingArgument { name: String, input: String },
    #[error("argument `{input}` of `{name}` must be {expected}, not {found}")]
    DimensionError { name: String, input: String, expected: String, found: String },
    #[error("argument `{input}` of `{name}` must be a {expected}")]
    ArgumentKind { name: String, input: String, expected: String },
    #[error("`{0}` is not bound")]
    Unbound(String),
    #[error("{file}: {source}")]
    Parse { file: String, source: ParseError },
    #[error("{file}: defines `{found}`, index says `{expected}`")]
    IndexMismatch { file: String, expected: String, found: String },
    #[error("bad index: {0}")]
    Index(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One line of `index.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub name: String,
    pub kind: String,
    pub file: String,
}

const INDEX: &str = include_str!("../../stdlib/index.json");

const EMBEDDED: &[(&str, &str)] = &[
    ("CNOT.xml", include_str!("../../stdlib/CNOT.xml")),
    ("CX.xml", include_str!("../../stdlib/CX.xml")),
    ("DefaultMicrowavePiOver2Time.xml", include_str!("../../stdlib/DefaultMicrowavePiOver2Time.xml")),
    ("DefaultMicrowavePiTime.xml", include_str!("../../stdlib/DefaultMicrowavePiTime.xml")),
    ("DopplerCooling.xml", include_str!("../../stdlib/DopplerCooling.xml")),
    ("GlobalReadout.xml", include_str!("../../stdlib/GlobalReadout.xml")),
    ("H.xml", include_str!("../../stdlib/H.xml")),
    ("Measure.xml", include_str!("../../stdlib/Measure.xml")),
    ("MolmerSorensen.xml", include_str!("../../stdlib/MolmerSorensen.xml")),
    ("OpticalPumping.xml", include_str!("../../stdlib/OpticalPumping.xml")),
    ("RamanRotation.xml", include_str!("../../stdlib/RamanRotation.xml")),
    ("SidebandCooling.xml", include_str!("../../stdlib/SidebandCooling.xml")),
    ("StateDetection.xml", include_str!("../../stdlib/StateDetection.xml")),
    ("XPi.xml", include_str!("../../stdlib/XPi.xml")),
    ("XPi_2.xml", include_str!("../../stdlib/XPi_2.xml")),
    ("XX.xml", include_str!("../../stdlib/XX.xml")),
    ("XmPi_2.xml", include_str!("../../stdlib/XmPi_2.xml")),
    ("YPi_2.xml", include_str!("../../stdlib/YPi_2.xml")),
    ("YmPi_2.xml", include_str!("../../stdlib/YmPi_2.xml")),
];

/// Read-only after construction; shared freely across threads.
#[derive(Debug, Clone, Default)]
pub struct StandardLibrary {
    defs: BTreeMap<String, Definition>,
}

/// The embedded library, parsed once.
pub fn builtin() -> &'static StandardLibrary {
    static LIB: OnceLock<StandardLibrary> = OnceLock::new();
    LIB.get_or_init(|| StandardLibrary::embedded().expect("embedded standard library is valid"))
}

/// A gate bound to concrete qubits and arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub call: GateCall,
    pub body: GateBody,
}

impl GateInstance {
    /// Span from the gate start to its last action under `scope`.
    pub fn duration(&self, library: &StandardLibrary, scope: &(impl Scope + Sync + ?Sized)) -> Result<Quantity, crate::compiler::CompileError> {
        crate::compiler::gate_duration(&self.call, library, scope)
    }
}

impl StandardLibrary {
    pub fn empty() -> Self {
        StandardLibrary::default()
    }

    pub fn embedded() -> Result<Self, StdlibError> {
        let mut lib = StandardLibrary::default();
        lib.load_index(INDEX, |file| {
            EMBEDDED
                .iter()
                .find(|(f, _)| *f == file)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| StdlibError::Index(format!("`{file}` is not embedded")))
        })?;
        Ok(lib)
    }

    /// The built-in set overridden by the definitions under `dir`.
    pub fn with_overrides(dir: impl AsRef<Path>) -> Result<Self, StdlibError> {
        let mut lib = builtin().clone();
        lib.load_dir(dir)?;
        Ok(lib)
    }

    /// Adds or replaces definitions from a directory. With an `index.json`
    /// only the listed files are read; otherwise every `*.xml` file is.
    pub fn load_dir(&mut self, dir: impl AsRef<Path>) -> Result<(), StdlibError> {
        let dir = dir.as_ref();
        let read = |file: &str| {
            let path = dir.join(file);
            std::fs::read_to_string(&path).map_err(|source| StdlibError::Io { path: path.display().to_string(), source })
        };
        let index = dir.join("index.json");
        if index.exists() {
            let text = read("index.json")?;
            return self.load_index(&text, read);
        }
        let entries = std::fs::read_dir(dir).map_err(|source| StdlibError::Io { path: dir.display().to_string(), source })?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "xml"))
            .collect();
        files.sort();
        for path in files {
            let file = path.file_name().unwrap_or_default().to_string_lossy().to_string();
            let def = parse_definition(&read(&file)?).map_err(|source| StdlibError::Parse { file, source })?;
            self.insert(def);
        }
        Ok(())
    }

    fn load_index(&mut self, index: &str, read: impl Fn(&str) -> Result<String, StdlibError>) -> Result<(), StdlibError> {
        let entries: Vec<IndexEntry> = serde_json::from_str(index).map_err(|e| StdlibError::Index(e.to_string()))?;
        for e in entries {
            let def = parse_definition(&read(&e.file)?).map_err(|source| StdlibError::Parse { file: e.file.clone(), source })?;
            if def.name() != e.name || def.kind().name() != e.kind {
                return Err(StdlibError::IndexMismatch {
                    file: e.file,
                    expected: format!("{} {}", e.kind, e.name),
                    found: format!("{} {}", def.kind().name(), def.name()),
                });
            }
            self.insert(def);
        }
        Ok(())
    }

    pub fn insert(&mut self, def: Definition) {
        self.defs.insert(def.name().to_string(), def);
    }

    pub fn get(&self, name: &str) -> Option<&Definition> {
        self.defs.get(name)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn definitions(&self) -> impl Iterator<Item = &Definition> {
        self.defs.values()
    }

    /// Index lines for the current contents, with filesystem-safe file names.
    pub fn index(&self) -> Vec<IndexEntry> {
        self.defs
            .values()
            .map(|d| IndexEntry { name: d.name().to_string(), kind: d.kind().name().to_string(), file: file_name(d.name()) })
            .collect()
    }

    pub fn resolve_gate(&self, name: &str, qubits: &[QubitBinding], args: &[Argument]) -> Result<GateInstance, StdlibError> {
        let Some(Definition::Gate(g)) = self.get(name) else {
            return Err(StdlibError::UnknownGate(name.to_string()));
        };
        let b = bind(name, &g.ports, &g.inputs, qubits, args)?;
        let body = match &g.body {
            GateBody::Composite(items) => GateBody::Composite(b.gate_items(items)?),
            GateBody::Native(items) => GateBody::Native(b.event_items(items)?),
        };
        let call = GateCall { name: name.to_string(), qubits: qubits.to_vec(), args: args.to_vec() };
        Ok(GateInstance { call, body })
    }

    /// Positional shorthand for [`resolve_gate`](Self::resolve_gate).
    pub fn resolve_gate_on(&self, name: &str, qubits: &[u32]) -> Result<GateInstance, StdlibError> {
        let qubits: Vec<_> = qubits.iter().map(|&q| QubitBinding { port: None, qubit: QubitRef::Index(q) }).collect();
        self.resolve_gate(name, &qubits, &[])
    }

    /// The function body with arguments substituted, offsets relative to the
    /// call site.
    pub fn resolve_function(&self, name: &str, args: &[Argument]) -> Result<Vec<EventItem>, StdlibError> {
        let Some(Definition::Function(f)) = self.get(name) else {
            return Err(StdlibError::UnknownFunction(name.to_string()));
        };
        bind(name, &[], &f.inputs, &[], args)?.event_items(&f.body)
    }

    /// Headers and definitions missing from `ast` so that it names every
    /// gate, function, and calculation it reaches. Local definitions win over
    /// library ones.
    pub fn required_headers(&self, ast: &ExperimentAst) -> Result<(Vec<HeaderDecl>, Vec<Definition>), StdlibError> {
        let mut stack: Vec<String> = program_names(ast).into_iter().collect();
        for d in &ast.definitions {
            stack.extend(crate::lang::lint::dependencies(d));
        }
        stack.extend(ast.headers.iter().map(|h| h.name.clone()));
        let mut reached: BTreeMap<String, DefinitionKind> = BTreeMap::new();
        let mut imported: BTreeMap<String, Definition> = BTreeMap::new();
        while let Some(name) = stack.pop() {
            if reached.contains_key(&name) {
                continue;
            }
            let def = match ast.definition(&name) {
                Some(d) => d,
                None => {
                    let d = self.get(&name).ok_or_else(|| StdlibError::UnknownName(name.clone()))?;
                    imported.insert(name.clone(), d.clone());
                    d
                }
            };
            reached.insert(name, def.kind());
            stack.extend(crate::lang::lint::dependencies(def));
        }
        for d in &ast.definitions {
            reached.entry(d.name().to_string()).or_insert(d.kind());
        }
        let declared: BTreeSet<&str> = ast.headers.iter().map(|h| h.name.as_str()).collect();
        let mut headers: Vec<HeaderDecl> =
            reached.into_iter().filter(|(n, _)| !declared.contains(n.as_str())).map(|(name, kind)| HeaderDecl { kind, name }).collect();
        headers.sort_by(|a, b| (a.kind, &a.name).cmp(&(b.kind, &b.name)));
        let mut definitions: Vec<Definition> = imported.into_values().collect();
        definitions.sort_by(|a, b| (a.kind(), a.name()).cmp(&(b.kind(), b.name())));
        Ok((headers, definitions))
    }

    /// A copy of `ast` with the required headers and definitions appended.
    pub fn include_headers(&self, ast: &ExperimentAst) -> Result<ExperimentAst, StdlibError> {
        let (headers, definitions) = self.required_headers(ast)?;
        let mut out = ast.clone();
        out.headers.extend(headers);
        out.definitions.extend(definitions);
        Ok(out)
    }
}

impl Library for StandardLibrary {
    fn lookup(&self, name: &str) -> Option<&Definition> {
        self.get(name)
    }
}

/// `XPi/2` is stored as `XPi_2.xml`.
pub fn file_name(name: &str) -> String {
    let safe: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{safe}.xml")
}

/// Every definition name used directly by the program section and setup.
pub fn program_names(ast: &ExperimentAst) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in &ast.initial_setup.settings {
        out.extend(s.value.calculations());
    }
    for seg in &ast.program.segments {
        for item in &seg.items {
            match item {
                SegmentItem::Event(e) => event_item_names(std::slice::from_ref(&EventItem::Event(e.clone())), &mut out),
                SegmentItem::GateBlock(b) => gate_item_names(std::slice::from_ref(&GateItem::Block(b.clone())), &mut out),
                SegmentItem::Decision(d) => {
                    if let Some(t) = &d.threshold {
                        out.extend(t.calculations());
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolics::Expression;

    #[test]
    fn embedded_matches_index() {
        let lib = builtin();
        assert_eq!(lib.len(), EMBEDDED.len());
        for e in lib.index() {
            assert!(EMBEDDED.iter().any(|(f, _)| *f == e.file), "{}", e.file);
        }
    }

    #[test]
    fn every_body_lints_clean() {
        let lib = builtin();
        for def in lib.definitions() {
            let ast = ExperimentAst { definitions: vec![def.clone()], ..Default::default() };
            let diags = lint_with(&ast, lib);
            assert!(diags.is_empty(), "{}: {diags:?}", def.name());
        }
    }

    #[test]
    fn arity_and_ports() {
        let lib = builtin();
        assert!(matches!(lib.resolve_gate_on("CNOT", &[0]), Err(StdlibError::ArityMismatch { expected: 2, got: 1, .. })));
        assert!(matches!(lib.resolve_gate_on("Nope", &[0]), Err(StdlibError::UnknownGate(_))));
        let bad = [QubitBinding { port: Some("Q".into()), qubit: QubitRef::Index(0) }];
        assert!(matches!(lib.resolve_gate("H", &bad, &[]), Err(StdlibError::UnknownPort { .. })));
    }

    #[test]
    fn function_arguments_are_checked() {
        let lib = builtin();
        assert!(matches!(lib.resolve_function("DopplerCooling", &[]), Err(StdlibError::MissingArgument { .. })));
        let wrong = [Argument { name: "duration".into(), value: ArgValue::Expr(Expression::literal(3.0, "V")) }];
        assert!(matches!(lib.resolve_function("DopplerCooling", &wrong), Err(StdlibError::DimensionError { .. })));
        assert!(lib.resolve_function("SidebandCooling", &[]).is_ok());
    }

    #[test]
    fn file_names_are_safe() {
        assert_eq!(file_name("XPi/2"), "XPi_2.xml");
        assert_eq!(file_name("CNOT"), "CNOT.xml");
    }
}
