// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Passes 1 to 3: macro expansion of gates and functions.

use std::collections::BTreeSet;

use crate::lang::*;
use crate::stdlib::bind;
use crate::symbolics::Expression;

use super::{CompileError, ErrorKind, Pass};

/// Offset between consecutive members of a sequential schedule: one tick,
/// so the closing action of one gate and the opening action of the next
/// never meet on an engine at the same tick.
pub(crate) fn sequence_guard() -> Expression {
    Expression::literal(0.5, "ns")
}

fn segment_path(i: usize) -> String {
    format!("/Experiment/Program/Segment[{}]", i + 1)
}

/// Drops definitions of one layer and their headers.
fn strip(ast: &mut ExperimentAst, remove: impl Fn(&Definition) -> bool) {
    let gone: BTreeSet<String> = ast.definitions.iter().filter(|d| remove(d)).map(|d| d.name().to_string()).collect();
    ast.definitions.retain(|d| !gone.contains(d.name()));
    ast.headers.retain(|h| !gone.contains(&h.name));
}

fn gate_def<'a>(ast: &'a ExperimentAst, name: &str, pass: Pass, path: &str) -> Result<&'a GateDef, CompileError> {
    match ast.definition(name) {
        Some(Definition::Gate(g)) => Ok(g),
        _ => Err(CompileError::new(pass, path, ErrorKind::UnknownDefinition(name.to_string()))),
    }
}

/// Pass 1: each composite gate call becomes a sequential block of its body,
/// recursively, until only native gates remain.
pub fn expand_composite_gates(ast: &ExperimentAst, max_depth: usize) -> Result<ExperimentAst, CompileError> {
    let mut out = ast.clone();
    for (i, seg) in out.program.segments.iter_mut().enumerate() {
        let path = segment_path(i);
        for item in &mut seg.items {
            if let SegmentItem::GateBlock(b) = item {
                b.items = composite_items(ast, &b.items, 0, max_depth, &path)?;
            }
        }
    }
    strip(&mut out, |d| matches!(d, Definition::Gate(g) if !g.is_native()));
    Ok(out)
}

fn composite_items(ast: &ExperimentAst, items: &[GateItem], depth: usize, max_depth: usize, path: &str) -> Result<Vec<GateItem>, CompileError> {
    let err = |kind: ErrorKind| CompileError::new(Pass::ExpandGates, path, kind);
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        match item {
            GateItem::Block(b) => out.push(GateItem::Block(GateBlock {
                schedule: b.schedule,
                items: composite_items(ast, &b.items, depth, max_depth, path)?,
            })),
            GateItem::Gate(call) => {
                let def = gate_def(ast, &call.name, Pass::ExpandGates, path)?;
                let GateBody::Composite(body) = &def.body else {
                    out.push(item.clone());
                    continue;
                };
                if depth >= max_depth {
                    return Err(err(ErrorKind::RecursionLimit { name: call.name.clone(), limit: max_depth }));
                }
                let b = bind(&call.name, &def.ports, &def.inputs, &call.qubits, &call.args).map_err(|e| err(e.into()))?;
                let body = b.gate_items(body).map_err(|e| err(e.into()))?;
                out.push(GateItem::Block(GateBlock {
                    schedule: Schedule::Sequential,
                    items: composite_items(ast, &body, depth + 1, max_depth, path)?,
                }));
            }
        }
    }
    Ok(out)
}

/// Pass 2: native gates become events holding their timing-layer bodies;
/// blocks become events whose members start together (parallel) or one
/// after another (sequential).
pub fn lower_gates(ast: &ExperimentAst) -> Result<ExperimentAst, CompileError> {
    let mut out = ast.clone();
    for (i, seg) in out.program.segments.iter_mut().enumerate() {
        let path = segment_path(i);
        for item in &mut seg.items {
            if let SegmentItem::GateBlock(b) = item {
                let start = StartTime::new(TimeMode::SinceLastAction, sequence_guard());
                *item = SegmentItem::Event(Event::new(start, block_events(ast, b, &path)?));
            }
        }
    }
    strip(&mut out, |d| matches!(d, Definition::Gate(_)));
    Ok(out)
}

fn block_events(ast: &ExperimentAst, block: &GateBlock, path: &str) -> Result<Vec<EventItem>, CompileError> {
    let mut out = Vec::with_capacity(block.items.len());
    for (k, item) in block.items.iter().enumerate() {
        let start = match block.schedule {
            Schedule::Sequential if k > 0 => StartTime::new(TimeMode::SinceLastAction, sequence_guard()),
            _ => StartTime::zero(TimeMode::SincePreviousEvent),
        };
        let items = match item {
            GateItem::Block(b) => block_events(ast, b, path)?,
            GateItem::Gate(call) => {
                let def = gate_def(ast, &call.name, Pass::LowerGates, path)?;
                let GateBody::Native(body) = &def.body else {
                    return Err(CompileError::new(Pass::LowerGates, path, ErrorKind::Invariant(format!("`{}` is not native", call.name))));
                };
                let err = |e: crate::stdlib::StdlibError| CompileError::new(Pass::LowerGates, path, e);
                bind(&call.name, &def.ports, &def.inputs, &call.qubits, &call.args).map_err(err)?.event_items(body).map_err(err)?
            }
        };
        out.push(EventItem::Event(Event::new(start, items)));
    }
    Ok(out)
}

/// Pass 3: every function call becomes an event at the call site holding the
/// function body.
pub fn expand_functions(ast: &ExperimentAst, max_depth: usize) -> Result<ExperimentAst, CompileError> {
    let mut out = ast.clone();
    for (i, seg) in out.program.segments.iter_mut().enumerate() {
        let path = segment_path(i);
        for item in &mut seg.items {
            if let SegmentItem::Event(e) = item {
                e.items = inline_calls(ast, &e.items, 0, max_depth, &path)?;
            }
        }
    }
    strip(&mut out, |d| matches!(d, Definition::Function(_)));
    Ok(out)
}

fn inline_calls(ast: &ExperimentAst, items: &[EventItem], depth: usize, max_depth: usize, path: &str) -> Result<Vec<EventItem>, CompileError> {
    let err = |kind: ErrorKind| CompileError::new(Pass::ExpandFunctions, path, kind);
    let mut out = Vec::with_capacity(items.len());
    for (k, item) in items.iter().enumerate() {
        match item {
            EventItem::Action(_) => out.push(item.clone()),
            EventItem::Event(e) => out.push(EventItem::Event(Event::new(e.start.clone(), inline_calls(ast, &e.items, depth, max_depth, path)?))),
            EventItem::Call(call) => {
                let Some(Definition::Function(f)) = ast.definition(&call.name) else {
                    return Err(err(ErrorKind::UnknownDefinition(call.name.clone())));
                };
                if depth >= max_depth {
                    return Err(err(ErrorKind::RecursionLimit { name: call.name.clone(), limit: max_depth }));
                }
                let b = bind(&call.name, &[], &f.inputs, &[], &call.args).map_err(|e| err(e.into()))?;
                let body = b.event_items(&f.body).map_err(|e| err(e.into()))?;
                let body = inline_calls(ast, &body, depth + 1, max_depth, path)?;
                if body.is_empty() && !anchors_next(&items[k + 1..]) {
                    continue;
                }
                out.push(EventItem::Event(Event::new(StartTime::zero(TimeMode::Absolute), body)));
            }
        }
    }
    Ok(out)
}

/// Whether the next event-like sibling measures its start from this one.
fn anchors_next(rest: &[EventItem]) -> bool {
    for item in rest {
        match item {
            EventItem::Event(e) => return e.start.mode == TimeMode::SincePreviousEvent,
            EventItem::Call(_) => return false,
            EventItem::Action(_) => {}
        }
    }
    false
}
