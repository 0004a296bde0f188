// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Structural and referential validation.
//!
//! Every rule reports through [`Diagnostic`]s with an XPath-like element path;
//! linting never fails. An empty error list means the program satisfies every
//! type invariant of the language model.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::symbolics::{simplify, Dims, Expression};

use super::ast::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Error, code, path: path.into(), message: message.into() }
    }

    pub fn warning(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Diagnostic {
        Diagnostic { severity: Severity::Warning, code, path: path.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}[{}] {}: {}", self.code, self.path, self.message)
    }
}

/// Source of definitions a program may call without declaring them itself.
pub trait Library: Sync {
    fn lookup(&self, name: &str) -> Option<&Definition>;
}

/// A library with no definitions: programs must be self-contained.
pub struct NoLibrary;

impl Library for NoLibrary {
    fn lookup(&self, _: &str) -> Option<&Definition> {
        None
    }
}

impl Library for BTreeMap<String, Definition> {
    fn lookup(&self, name: &str) -> Option<&Definition> {
        self.get(name)
    }
}

/// DDS parameters settable by a `DDSAction`.
pub const DDS_PARAMS: [&str; 5] = ["amplitude", "frequency", "phase", "interp_p0", "interp_p1"];
pub const INTERP_TYPES: [&str; 2] = ["none", "polynomial"];

/// Lints against the built-in standard library.
pub fn lint(ast: &ExperimentAst) -> Vec<Diagnostic> {
    lint_with(ast, crate::stdlib::builtin())
}

pub fn lint_with(ast: &ExperimentAst, library: &dyn Library) -> Vec<Diagnostic> {
    let mut l = Linter::new(ast, library, false);
    l.run();
    l.out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Only the dangling-reference rules (segment destinations and resources).
pub fn lint_references(ast: &ExperimentAst) -> Vec<Diagnostic> {
    let mut l = Linter::new(ast, &NoLibrary, true);
    l.run();
    l.out
}

/// Per-tag sibling counter for XPath-like indices.
#[derive(Default)]
struct Indexer(HashMap<&'static str, usize>);

impl Indexer {
    fn path(&mut self, parent: &str, tag: &'static str) -> String {
        let n = self.0.entry(tag).or_insert(0);
        *n += 1;
        format!("{parent}/{tag}[{n}]")
    }
}

/// Declared formal inputs visible inside a definition body.
#[derive(Clone, Default)]
struct Formals {
    inside_definition: bool,
    names: BTreeMap<String, InputKind>,
}

struct Linter<'a> {
    ast: &'a ExperimentAst,
    library: &'a dyn Library,
    references_only: bool,
    out: Vec<Diagnostic>,
}

impl<'a> Linter<'a> {
    fn new(ast: &'a ExperimentAst, library: &'a dyn Library, references_only: bool) -> Self {
        Linter { ast, library, references_only, out: Vec::new() }
    }

    fn err(&mut self, code: &'static str, path: &str, message: impl Into<String>) {
        if !self.references_only || matches!(code, "dangling-segment" | "unknown-resource") {
            self.out.push(Diagnostic::error(code, path, message));
        }
    }

    fn warn(&mut self, code: &'static str, path: &str, message: impl Into<String>) {
        if !self.references_only {
            self.out.push(Diagnostic::warning(code, path, message));
        }
    }

    fn resolve(&self, name: &str) -> Option<&'a Definition> {
        let local = self.ast.definitions.iter().find(|d| d.name() == name);
        local.or_else(|| self.library.lookup(name))
    }

    fn run(&mut self) {
        let ast = self.ast;
        let mut names = BTreeSet::new();
        for (i, r) in ast.resources.iter().enumerate() {
            if !names.insert(r.name.as_str()) {
                self.err("duplicate-resource", &format!("/Experiment/Resources/Resource[{}]", i + 1), format!("resource `{}` declared twice", r.name));
            }
        }
        for (i, s) in ast.initial_setup.settings.iter().enumerate() {
            let path = format!("/Experiment/InitialSetup/Setting[{}]", i + 1);
            self.expression(&s.value, &path, &Formals::default());
        }
        self.headers();
        for (i, def) in ast.definitions.iter().enumerate() {
            let path = format!("/Experiment/Definitions/{}[{}]", definition_tag(def), i + 1);
            self.definition(def, &path);
        }
        self.cycles();
        let mut seen = BTreeSet::new();
        for (i, seg) in ast.program.segments.iter().enumerate() {
            let path = format!("/Experiment/Program/Segment[{}]", i + 1);
            if !seen.insert(seg.name.as_str()) {
                self.err("duplicate-segment", &path, format!("segment name `{}` is not unique", seg.name));
            }
            self.segment(seg, &path);
        }
    }

    fn headers(&mut self) {
        let ast = self.ast;
        let mut seen = BTreeSet::new();
        for (i, h) in ast.headers.iter().enumerate() {
            let path = format!("/Experiment/Headers/Header[{}]", i + 1);
            if !seen.insert(&h.name) {
                self.err("duplicate-header", &path, format!("`{}` declared twice", h.name));
            }
            let local: Vec<_> = ast.definitions.iter().filter(|d| d.name() == h.name).collect();
            match local.as_slice() {
                [d] if d.kind() != h.kind => {
                    self.err("header-kind", &path, format!("`{}` is declared as a {} but defined as a {}", h.name, h.kind.name(), d.kind().name()))
                }
                [_] => {}
                [] => match self.library.lookup(&h.name) {
                    Some(d) if d.kind() != h.kind => {
                        self.err("header-kind", &path, format!("`{}` is declared as a {} but the library defines a {}", h.name, h.kind.name(), d.kind().name()))
                    }
                    Some(_) => {}
                    None => self.err("header-unresolved", &path, format!("no definition for header `{}`", h.name)),
                },
                _ => self.err("duplicate-definition", &path, format!("`{}` has more than one definition", h.name)),
            }
        }
        let mut defined = BTreeSet::new();
        for (i, d) in ast.definitions.iter().enumerate() {
            if !defined.insert(d.name()) {
                let path = format!("/Experiment/Definitions/{}[{}]", definition_tag(d), i + 1);
                self.err("duplicate-definition", &path, format!("`{}` is defined twice", d.name()));
            }
        }
    }

    fn definition(&mut self, def: &Definition, path: &str) {
        let mut formals = Formals { inside_definition: true, names: BTreeMap::new() };
        let inputs: &[InputDecl] = match def {
            Definition::Gate(g) => {
                for p in &g.ports {
                    if formals.names.insert(p.clone(), InputKind::Qubit).is_some() {
                        self.err("duplicate-input", path, format!("port `{p}` declared twice"));
                    }
                }
                &g.inputs
            }
            Definition::Function(f) => &f.inputs,
            Definition::Calculation(c) => {
                self.expression(&c.expr, path, &formals);
                return;
            }
        };
        for i in inputs {
            if formals.names.insert(i.name.clone(), i.kind).is_some() {
                self.err("duplicate-input", path, format!("input `{}` declared twice", i.name));
            }
            if let Some(d) = &i.default {
                match i.kind {
                    InputKind::Quantity(dims) => self.typed(d, path, &Formals::default(), dims, "default value"),
                    _ => self.err("input-default", path, format!("input `{}` of kind {} cannot have a default", i.name, i.kind.name())),
                }
            }
        }
        match def {
            Definition::Gate(GateDef { body: GateBody::Composite(items), .. }) => {
                let mut ix = Indexer::default();
                for item in items {
                    self.gate_item(item, path, &mut ix, &formals);
                }
            }
            Definition::Gate(GateDef { body: GateBody::Native(items), .. }) | Definition::Function(FunctionDef { body: items, .. }) => {
                self.event_items(items, path, &formals);
            }
            Definition::Calculation(_) => unreachable!(),
        }
    }

    fn cycles(&mut self) {
        let mut graph: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut stack: Vec<String> = self.ast.definitions.iter().map(|d| d.name().to_string()).collect();
        stack.extend(self.ast.headers.iter().map(|h| h.name.clone()));
        while let Some(name) = stack.pop() {
            if graph.contains_key(&name) {
                continue;
            }
            let deps = self.resolve(&name).map(dependencies).unwrap_or_default();
            stack.extend(deps.iter().cloned());
            graph.insert(name, deps);
        }
        let mut reported = BTreeSet::new();
        for start in graph.keys() {
            if let Some(cycle) = find_cycle(&graph, start) {
                let mut key = cycle.clone();
                key.sort();
                if reported.insert(key) {
                    self.err("recursive-definition", "/Experiment/Definitions", format!("definition cycle: {}", cycle.join(" -> ")));
                }
            }
        }
    }

    fn segment(&mut self, seg: &Segment, path: &str) {
        let mut ix = Indexer::default();
        let formals = Formals::default();
        let n = seg.items.len();
        let mut decisions = 0;
        for (i, item) in seg.items.iter().enumerate() {
            match item {
                SegmentItem::Event(e) => {
                    let p = ix.path(path, "Event");
                    self.event(e, &p, &formals, true);
                }
                SegmentItem::GateBlock(b) => {
                    let p = ix.path(path, "GateBlock");
                    self.gate_block(b, &p, &formals);
                }
                SegmentItem::Decision(d) => {
                    let p = ix.path(path, "Decision");
                    decisions += 1;
                    if i + 1 != n {
                        self.err("decision-not-last", &p, "a Decision must be the last element of its segment");
                    }
                    if decisions > 1 {
                        self.err("multiple-decisions", &p, "a segment has at most one Decision");
                    }
                    self.decision(d, &p);
                }
            }
        }
    }

    fn decision(&mut self, d: &Decision, path: &str) {
        let Some(res) = self.ast.resource(&d.resource) else {
            self.err("unknown-resource", path, format!("resource `{}` is not declared", d.resource));
            return;
        };
        for s in &d.slots {
            if *s >= res.length {
                self.err("unknown-resource", path, format!("slot {s} is outside resource `{}` of length {}", d.resource, res.length));
            }
        }
        let width = d.effective_slots(res.length).len();
        if width > 16 {
            self.err("state-width", path, format!("a decision may consult at most 16 bits, not {width}"));
        }
        if let Some(t) = &d.threshold {
            self.threshold(t, path);
        }
        let mut states = BTreeSet::new();
        for (i, c) in d.conditions.iter().enumerate() {
            let cp = format!("{path}/Condition[{}]", i + 1);
            if c.state.is_empty() || !c.state.chars().all(|ch| ch == '0' || ch == '1') {
                self.err("state-format", &cp, format!("state `{}` is not a bit string", c.state));
            } else if c.state.len() != width {
                self.err("state-width", &cp, format!("state `{}` has {} bits but the decision consults {width}", c.state, c.state.len()));
            }
            if !states.insert(c.state.as_str()) {
                self.err("duplicate-state", &cp, format!("state `{}` appears twice", c.state));
            }
            if self.ast.segment_index(&c.destination).is_none() {
                self.err("dangling-segment", &cp, format!("destination segment `{}` does not exist", c.destination));
            }
        }
    }

    fn threshold(&mut self, t: &Expression, path: &str) {
        if let Ok(Expression::Literal(l)) = simplify(t) {
            let d = l.unit.dims();
            if d != Dims::COUNT && d != Dims::NONE {
                self.err("threshold", path, format!("threshold must be a count, not {d}"));
            }
        }
        self.expression(t, path, &Formals::default());
    }

    fn event(&mut self, e: &Event, path: &str, formals: &Formals, top_level: bool) {
        let sp = format!("{path}/StartTime[1]");
        self.typed(&e.start.value, &sp, formals, Dims::TIME, "start time");
        if let Ok(Expression::Literal(l)) = simplify(&e.start.value) {
            let negative_ok = e.start.mode == TimeMode::Absolute && !top_level;
            if l.value < 0.0 && !negative_ok {
                self.err("negative-start", &sp, format!("start time {} is negative", Expression::Literal(l.clone())));
            }
        }
        self.event_items(&e.items, path, formals);
    }

    fn event_items(&mut self, items: &[EventItem], path: &str, formals: &Formals) {
        let mut ix = Indexer::default();
        for item in items {
            match item {
                EventItem::Event(e) => {
                    let p = ix.path(path, "Event");
                    self.event(e, &p, formals, false);
                }
                EventItem::Call(c) => {
                    let p = ix.path(path, "FunctionCall");
                    self.call(&c.name, &[], &c.args, DefinitionKind::Function, &p, formals);
                }
                EventItem::Action(a) => {
                    let p = ix.path(path, a.kind.tag());
                    self.action(a, &p, formals);
                }
            }
        }
    }

    fn gate_block(&mut self, b: &GateBlock, path: &str, formals: &Formals) {
        let mut ix = Indexer::default();
        for item in &b.items {
            self.gate_item(item, path, &mut ix, formals);
        }
    }

    fn gate_item(&mut self, item: &GateItem, path: &str, ix: &mut Indexer, formals: &Formals) {
        match item {
            GateItem::Block(b) => {
                let p = ix.path(path, "GateBlock");
                self.gate_block(b, &p, formals);
            }
            GateItem::Gate(g) => {
                let p = ix.path(path, "GateCall");
                self.call(&g.name, &g.qubits, &g.args, DefinitionKind::Gate, &p, formals);
            }
        }
    }

    fn call(&mut self, name: &str, qubits: &[QubitBinding], args: &[Argument], kind: DefinitionKind, path: &str, formals: &Formals) {
        for q in qubits {
            self.qubit(&q.qubit, path, formals);
        }
        for a in args {
            match &a.value {
                ArgValue::Expr(e) => self.expression(e, path, formals),
                ArgValue::Resource(r) => self.resource_target(r, path, formals),
                ArgValue::Qubit(q) => self.qubit(q, path, formals),
            }
        }
        let Some(def) = self.resolve(name) else {
            self.err("unknown-name", path, format!("no {} named `{name}`", kind.name()));
            return;
        };
        if def.kind() != kind {
            self.err("wrong-kind", path, format!("`{name}` is a {}, not a {}", def.kind().name(), kind.name()));
            return;
        }
        let (ports, inputs): (&[String], &[InputDecl]) = match def {
            Definition::Gate(g) => (&g.ports, &g.inputs),
            Definition::Function(f) => (&[], &f.inputs),
            Definition::Calculation(_) => return,
        };
        if kind == DefinitionKind::Gate {
            if qubits.len() != ports.len() {
                self.err("arity", path, format!("`{name}` acts on {} qubit(s), {} given", ports.len(), qubits.len()));
            }
            let mut bound = BTreeSet::new();
            for q in qubits {
                if let Some(p) = &q.port {
                    if !ports.contains(p) {
                        self.err("unknown-port", path, format!("`{name}` has no port `{p}`"));
                    } else if !bound.insert(p.as_str()) {
                        self.err("arity", path, format!("port `{p}` bound twice"));
                    }
                }
            }
        }
        let mut given = BTreeSet::new();
        for a in args {
            if !given.insert(a.name.as_str()) {
                self.err("duplicate-argument", path, format!("argument `{}` given twice", a.name));
            }
            let Some(decl) = inputs.iter().find(|i| i.name == a.name) else {
                self.err("unknown-argument", path, format!("`{name}` has no input `{}`", a.name));
                continue;
            };
            match (&decl.kind, &a.value) {
                (InputKind::Quantity(d), ArgValue::Expr(e)) => self.check_dims(e, path, *d, &format!("argument `{}`", a.name)),
                (InputKind::Resource, ArgValue::Resource(_)) | (InputKind::Qubit, ArgValue::Qubit(_)) => {}
                (k, _) => self.err("argument-kind", path, format!("argument `{}` must be a {}", a.name, k.name())),
            }
        }
        for decl in inputs {
            if decl.default.is_none() && !given.contains(decl.name.as_str()) {
                self.err("missing-argument", path, format!("`{name}` requires input `{}`", decl.name));
            }
        }
    }

    fn qubit(&mut self, q: &QubitRef, path: &str, formals: &Formals) {
        if let QubitRef::Input(n) = q {
            if formals.names.get(n) != Some(&InputKind::Qubit) {
                self.err("unbound-input", path, format!("`{n}` is not a qubit input in scope"));
            }
        }
    }

    fn resource_target(&mut self, r: &ResourceTarget, path: &str, formals: &Formals) {
        match r {
            ResourceTarget::Input(n) => {
                if formals.names.get(n) != Some(&InputKind::Resource) {
                    self.err("unbound-input", path, format!("`{n}` is not a resource input in scope"));
                }
            }
            ResourceTarget::Slot { resource, slot } => match self.ast.resource(resource) {
                None => self.err("unknown-resource", path, format!("resource `{resource}` is not declared")),
                Some(decl) if *slot >= decl.length => {
                    self.err("unknown-resource", path, format!("slot {slot} is outside resource `{resource}` of length {}", decl.length))
                }
                Some(_) => {}
            },
        }
    }

    fn action(&mut self, a: &Action, path: &str, formals: &Formals) {
        if let Err(m) = a.channel.validate() {
            self.err("bad-channel", path, m);
        }
        for p in a.channel.placeholders() {
            if formals.names.get(p) != Some(&InputKind::Qubit) {
                self.err("unbound-input", path, format!("channel placeholder `{{{p}}}` is not a qubit input in scope"));
            }
        }
        let mut seen = BTreeSet::new();
        for p in &a.params {
            if !seen.insert(p.name.as_str()) {
                self.err("bad-param", path, format!("parameter `{}` given twice", p.name));
            }
            self.expression(&p.value, &format!("{path}/Param[@name='{}']", p.name), formals);
        }
        let names: Vec<&str> = a.params.iter().map(|p| p.name.as_str()).collect();
        let allowed: &[&str] = match a.kind {
            ActionKind::Dds => &DDS_PARAMS,
            ActionKind::Measure => &["duration"],
            ActionKind::TtlSet => &["level"],
            ActionKind::CounterStart | ActionKind::CounterStop => &[],
            ActionKind::SetValue => &names,
        };
        for n in &names {
            if !allowed.contains(n) {
                self.err("bad-param", path, format!("{} does not take parameter `{n}`", a.kind.tag()));
            }
        }
        match a.kind {
            ActionKind::Measure => {
                if a.resource.is_none() {
                    self.err("measure-resource", path, "Measure needs a destination resource");
                }
                match a.param("duration") {
                    None => self.err("bad-param", path, "Measure needs a duration"),
                    Some(d) => self.check_dims(d, path, Dims::TIME, "measurement duration"),
                }
            }
            ActionKind::TtlSet if a.param("level").is_none() => self.err("bad-param", path, "TTLSet needs a level"),
            ActionKind::SetValue if a.params.len() != 1 => self.err("bad-param", path, "SetValue sets exactly one parameter"),
            ActionKind::Dds if a.params.is_empty() => self.warn("empty-action", path, "DDSAction sets no parameter"),
            _ => {}
        }
        if a.resource.is_some() && !matches!(a.kind, ActionKind::Measure | ActionKind::CounterStop | ActionKind::SetValue) {
            self.err("bad-param", path, format!("{} cannot store into a resource", a.kind.tag()));
        }
        if a.threshold.is_some() && a.resource.is_none() {
            self.err("bad-param", path, "a threshold needs a destination resource");
        }
        if let Some(r) = &a.resource {
            self.resource_target(r, path, formals);
        }
        if let Some(t) = &a.threshold {
            self.threshold(t, path);
        }
        if let Some(t) = &a.interp_type {
            if a.kind != ActionKind::Dds {
                self.err("bad-param", path, "only DDSAction takes interp_type");
            } else if !INTERP_TYPES.contains(&t.as_str()) {
                self.err("bad-param", path, format!("unknown interpolation type `{t}`"));
            }
        }
    }

    /// Statically checks dimensions when the expression is literal-only.
    fn check_dims(&mut self, e: &Expression, path: &str, want: Dims, what: &str) {
        if let Ok(Expression::Literal(l)) = simplify(e) {
            if l.unit.dims() != want {
                self.err("dimension", path, format!("{what} must be {}, not {}", want.name(), l.unit.dims().name()));
            }
        }
    }

    fn typed(&mut self, e: &Expression, path: &str, formals: &Formals, want: Dims, what: &str) {
        self.expression(e, path, formals);
        self.check_dims(e, path, want, what);
    }

    fn expression(&mut self, e: &Expression, path: &str, formals: &Formals) {
        for name in e.inputs() {
            match formals.names.get(&name) {
                Some(InputKind::Quantity(_)) => {}
                Some(k) => self.err("unbound-input", path, format!("`{name}` is a {} input, not a value", k.name())),
                None if formals.inside_definition => self.err("unbound-input", path, format!("`{name}` is not an input in scope")),
                None => self.err("unbound-input", path, format!("input reference `{name}` outside a definition")),
            }
        }
        for name in e.calculations() {
            match self.resolve(&name) {
                Some(Definition::Calculation(_)) => {}
                Some(d) => self.err("wrong-kind", path, format!("`{name}` is a {}, not a calculation", d.kind().name())),
                None => self.err("unknown-name", path, format!("no calculation named `{name}`")),
            }
        }
        if e.inputs().is_empty() {
            if let Err(err) = simplify(e) {
                self.err("expression", path, err.to_string());
            }
        }
    }
}

fn definition_tag(d: &Definition) -> &'static str {
    match d {
        Definition::Gate(_) => "GateDefinition",
        Definition::Function(_) => "FunctionDefinition",
        Definition::Calculation(_) => "CalculationDefinition",
    }
}

/// Names of gates, functions, and calculations a definition refers to.
pub fn dependencies(def: &Definition) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    match def {
        Definition::Calculation(c) => out.extend(c.expr.calculations()),
        Definition::Gate(g) => {
            for i in &g.inputs {
                if let Some(d) = &i.default {
                    out.extend(d.calculations());
                }
            }
            match &g.body {
                GateBody::Composite(items) => gate_item_names(items, &mut out),
                GateBody::Native(items) => event_item_names(items, &mut out),
            }
        }
        Definition::Function(f) => {
            for i in &f.inputs {
                if let Some(d) = &i.default {
                    out.extend(d.calculations());
                }
            }
            event_item_names(&f.body, &mut out);
        }
    }
    out
}

fn args_names(args: &[Argument], out: &mut BTreeSet<String>) {
    for a in args {
        if let ArgValue::Expr(e) = &a.value {
            out.extend(e.calculations());
        }
    }
}

pub(crate) fn gate_item_names(items: &[GateItem], out: &mut BTreeSet<String>) {
    for_each_gate(items, &mut |g| {
        out.insert(g.name.clone());
        args_names(&g.args, out);
    });
}

pub(crate) fn event_item_names(items: &[EventItem], out: &mut BTreeSet<String>) {
    for item in items {
        match item {
            EventItem::Call(c) => {
                out.insert(c.name.clone());
                args_names(&c.args, out);
            }
            EventItem::Event(e) => {
                out.extend(e.start.value.calculations());
                event_item_names(&e.items, out);
            }
            EventItem::Action(a) => {
                for p in &a.params {
                    out.extend(p.value.calculations());
                }
                if let Some(t) = &a.threshold {
                    out.extend(t.calculations());
                }
            }
        }
    }
}

fn find_cycle(graph: &BTreeMap<String, BTreeSet<String>>, start: &str) -> Option<Vec<String>> {
    fn visit(graph: &BTreeMap<String, BTreeSet<String>>, node: &str, start: &str, path: &mut Vec<String>, seen: &mut BTreeSet<String>) -> bool {
        for next in graph.get(node).into_iter().flatten() {
            if next == start {
                return true;
            }
            if seen.insert(next.clone()) {
                path.push(next.clone());
                if visit(graph, next, start, path, seen) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    let mut path = vec![start.to_string()];
    let mut seen = BTreeSet::new();
    if visit(graph, start, start, &mut path, &mut seen) {
        path.push(start.to_string());
        Some(path)
    } else {
        None
    }
}
