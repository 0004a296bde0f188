// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Backend: per-engine opcode streams from the channelized form.
//!
//! Every engine stream has the same shape so that all engines cross segment
//! boundaries at the same tick:
//!
//! ```text
//! segment s:  [SETLOOP n; JZ end]          only when the segment repeats
//!             SETVALUE ... (delay = gap)
//!             [DECLOOP tail; JNZ body]     only when the segment repeats
//!             BRANCHLUT m,t | GOTO s+1     absent for the last segment
//! end:        NOP                          terminal
//! ```
//!
//! A segment lasts one tick past its latest action on any engine. Loop
//! instructions are omitted for a segment with no actions.

use std::collections::{BTreeMap, BTreeSet};

use crate::caldb::registry::ChannelRegistry;
use crate::isa::{CompiledProgram, DecisionTable, EngineStream, MeasurementBinding, Opcode, ResourceInfo, HALT, MAX_DELAY, MAX_OPERAND};
use crate::lang::*;
use crate::par::{self, Execution};
use crate::symbolics::Expression;

use super::channelize::{engine_name, event_tick};
use super::{CompileError, ErrorKind, Pass};

/// One value change on one engine within a segment.
#[derive(Debug, Clone, Copy)]
struct Change {
    tick: u64,
    code: u32,
    /// (resource index, slot, threshold) when this change closes a measurement.
    binding: Option<(u32, u32, u32)>,
}

struct SegmentPlan {
    span: u64,
    repeat: u32,
    table: Option<u16>,
    resource: u8,
    changes: BTreeMap<String, Vec<Change>>,
}

fn backend(path: &str, msg: impl Into<String>) -> CompileError {
    CompileError::new(Pass::Emit, path, ErrorKind::Backend(msg.into()))
}

fn count_value(e: &Expression, path: &str) -> Result<u32, CompileError> {
    let l = e.as_literal().ok_or_else(|| CompileError::new(Pass::Emit, path, ErrorKind::Invariant(format!("threshold `{e}` is not solved"))))?;
    let v = (l.value * l.unit.scale()).round();
    if !(0.0..=u32::MAX as f64).contains(&v) {
        return Err(backend(path, format!("threshold {v} is not a count")));
    }
    Ok(v as u32)
}

pub fn emit_opcodes(ast: &ExperimentAst, registry: &ChannelRegistry, exec: Execution) -> Result<(CompiledProgram, Vec<Diagnostic>), CompileError> {
    let mut warnings = Vec::new();
    let mut program = CompiledProgram {
        segments: ast.program.segments.iter().map(|s| s.name.clone()).collect(),
        resources: ast.resources.iter().map(|r| ResourceInfo { name: r.name.clone(), length: r.length }).collect(),
        ..Default::default()
    };
    if program.resources.len() > 256 {
        return Err(backend("/Experiment/Resources", "at most 256 resources can be addressed by BRANCHLUT"));
    }
    let resource_index = |name: &str| ast.resources.iter().position(|r| r.name == name);

    // Thresholds given on a Decision apply to measurements feeding its slots.
    let mut decision_thresholds: BTreeMap<(usize, u32), u32> = BTreeMap::new();
    for (i, seg) in ast.program.segments.iter().enumerate() {
        if let Some(d) = seg.decision() {
            let path = format!("/Experiment/Program/Segment[{}]/Decision", i + 1);
            let (Some(r), Some(t)) = (resource_index(&d.resource), &d.threshold) else { continue };
            let thr = count_value(t, &path)?;
            for s in d.effective_slots(ast.resources[r].length) {
                decision_thresholds.entry((r, s)).or_insert(thr);
            }
        }
    }

    let mut plans = Vec::with_capacity(ast.program.segments.len());
    let mut engines = BTreeSet::new();
    for (i, seg) in ast.program.segments.iter().enumerate() {
        let path = format!("/Experiment/Program/Segment[{}]", i + 1);
        let mut changes: BTreeMap<String, Vec<Change>> = BTreeMap::new();
        let mut last = None;
        for item in &seg.items {
            let SegmentItem::Event(e) = item else { continue };
            let tick = event_tick(e).ok_or_else(|| CompileError::new(Pass::Emit, &path, ErrorKind::Invariant("start time is not a whole tick".into())))?;
            last = Some(last.map_or(tick, |l: u64| l.max(tick)));
            for a in &e.items {
                let EventItem::Action(a) = a else { continue };
                let engine = engine_name(a).ok_or_else(|| CompileError::new(Pass::Emit, &path, ErrorKind::Invariant(format!("{} survived channelization", a.kind.tag()))))?;
                let (_, _, spec) = registry.resolve_engine(&engine).map_err(|e| CompileError::new(Pass::Emit, &path, e))?;
                let lit = a.params[0].value.as_literal().ok_or_else(|| CompileError::new(Pass::Emit, &path, ErrorKind::Invariant(format!("`{engine}` value is not solved"))))?;
                let code = spec.encode(&engine, lit.value * lit.unit.scale()).map_err(|e| CompileError::new(Pass::Emit, &path, e))?;
                let binding = match &a.resource {
                    Some(ResourceTarget::Slot { resource, slot }) => {
                        let r = resource_index(resource).ok_or_else(|| backend(&path, format!("resource `{resource}` is not declared")))?;
                        let thr = match &a.threshold {
                            Some(t) => count_value(t, &path)?,
                            None => decision_thresholds.get(&(r, *slot)).copied().unwrap_or(1),
                        };
                        Some((r as u32, *slot, thr))
                    }
                    Some(ResourceTarget::Input(n)) => return Err(CompileError::new(Pass::Emit, &path, ErrorKind::Invariant(format!("resource input `{n}` is unbound")))),
                    None => None,
                };
                engines.insert(engine.clone());
                changes.entry(engine).or_default().push(Change { tick, code, binding });
            }
        }
        let (table, resource) = match seg.decision() {
            Some(d) => {
                let dpath = format!("{path}/Decision");
                let r = resource_index(&d.resource).ok_or_else(|| backend(&dpath, format!("resource `{}` is not declared", d.resource)))?;
                let slots = d.effective_slots(ast.resources[r].length);
                if slots.len() > 16 {
                    return Err(backend(&dpath, "a decision may consult at most 16 bits"));
                }
                let mut entries = vec![HALT; 1 << slots.len()];
                let mut covered = vec![false; entries.len()];
                for c in &d.conditions {
                    let key = usize::from_str_radix(&c.state, 2).map_err(|_| backend(&dpath, format!("state `{}` is not a bit string", c.state)))?;
                    let dest = program.segment_index(&c.destination).ok_or_else(|| backend(&dpath, format!("unknown segment `{}`", c.destination)))?;
                    let Some(entry) = entries.get_mut(key) else {
                        return Err(backend(&dpath, format!("state `{}` is wider than the decision", c.state)));
                    };
                    *entry = dest as u32;
                    covered[key] = true;
                }
                let missing: Vec<String> = covered
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !**c)
                    .map(|(k, _)| format!("{k:0w$b}", w = slots.len().max(1)))
                    .collect();
                if !missing.is_empty() {
                    warnings.push(Diagnostic::warning("table-incomplete", &dpath, format!("outcomes {} halt the program", missing.join(", "))));
                }
                let t = program.tables.len();
                if t > u16::MAX as usize {
                    return Err(backend(&dpath, "too many decision tables"));
                }
                program.tables.push(DecisionTable { resource: r as u32, slots, entries });
                (Some(t as u16), r as u8)
            }
            None => (None, 0),
        };
        if seg.repeat > MAX_OPERAND {
            return Err(backend(&path, format!("repeat count {} does not fit in an operand", seg.repeat)));
        }
        plans.push(SegmentPlan { span: last.map_or(0, |l| l + 1), repeat: seg.repeat, table, resource, changes });
    }

    let names: Vec<String> = engines.into_iter().collect();
    let streams = par::try_map(exec, &names, |name| emit_engine(name, &plans, registry))?;
    for (e, (stream, bindings)) in streams.into_iter().enumerate() {
        for (instruction, (resource, slot, threshold)) in bindings {
            program.bindings.push(MeasurementBinding { engine: e as u32, instruction, resource, slot, threshold });
        }
        program.engines.push(stream);
    }
    Ok((program, warnings))
}

type Bound = Vec<(u32, (u32, u32, u32))>;

/// Appends `op` after `delay` ticks, padding with NOPs when the delay does
/// not fit in one instruction. Returns the index of `op`.
fn push_after(words: &mut Vec<Opcode>, mut delay: u64, op: impl FnOnce(u32) -> Opcode) -> u32 {
    while delay > MAX_DELAY as u64 {
        words.push(Opcode::Nop { delay: MAX_DELAY });
        delay -= MAX_DELAY as u64;
    }
    words.push(op(delay as u32));
    (words.len() - 1) as u32
}

fn emit_engine(name: &str, plans: &[SegmentPlan], registry: &ChannelRegistry) -> Result<(EngineStream, Bound), CompileError> {
    let (_, kind, spec) = registry.resolve_engine(name).map_err(|e| CompileError::new(Pass::Emit, "/Experiment", e))?;
    let mut words = Vec::new();
    let mut offsets = Vec::with_capacity(plans.len());
    let mut bound = Vec::new();
    // (word index, segment whose start it jumps to)
    let mut gotos = Vec::new();
    let n = plans.len();
    for (s, plan) in plans.iter().enumerate() {
        offsets.push(words.len() as u32);
        // An empty segment takes no time however often it repeats.
        let looped = plan.repeat != 1 && plan.span > 0;
        let jz = if looped {
            words.push(Opcode::SetLoop { delay: 0, count: plan.repeat });
            words.push(Opcode::Jz { delay: 0, target: 0 });
            Some(words.len() - 1)
        } else {
            None
        };
        let body = words.len() as u32;
        let mut at = 0;
        for c in plan.changes.get(name).into_iter().flatten() {
            let i = push_after(&mut words, c.tick - at, |delay| Opcode::SetValue { delay, value: c.code });
            if let Some(b) = c.binding {
                bound.push((i, b));
            }
            at = c.tick;
        }
        let mut tail = plan.span - at;
        if looped {
            push_after(&mut words, tail, |delay| Opcode::DecLoop { delay });
            words.push(Opcode::Jnz { delay: 0, target: body });
            tail = 0;
        }
        let end = words.len() as u32;
        if let Some(j) = jz {
            words[j] = Opcode::Jz { delay: 0, target: end };
        }
        match plan.table {
            Some(table) => {
                push_after(&mut words, tail, |delay| Opcode::BranchLut { delay, resource: plan.resource, table });
            }
            None if s + 1 < n => {
                let i = push_after(&mut words, tail, |delay| Opcode::Goto { delay, target: 0 });
                gotos.push((i as usize, s + 1));
            }
            None => {
                push_after(&mut words, tail, |delay| Opcode::Nop { delay });
            }
        }
    }
    if !matches!(plans.last(), Some(p) if p.table.is_none()) {
        words.push(Opcode::Nop { delay: 0 });
    }
    for (i, s) in gotos {
        let delay = words[i].delay();
        words[i] = Opcode::Goto { delay, target: offsets[s] };
    }
    if words.len() > MAX_OPERAND as usize {
        return Err(backend("/Experiment", format!("engine `{name}` needs {} instructions", words.len())));
    }
    let stream = EngineStream { name: name.to_string(), kind, min: spec.min, lsb: spec.lsb, segment_offsets: offsets, words };
    Ok((stream, bound))
}
