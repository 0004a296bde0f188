// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Tick-accurate simulator of the execution engines.
//!
//! Each engine waits the embedded delay of its next instruction, then
//! executes it. Instructions with zero delay run in the same tick. An engine
//! reaching BRANCHLUT stalls; once every running engine is stalled and the
//! consulted results have been published, the table is read once and every
//! engine jumps to the chosen segment in the same tick.

use thiserror::Error;

use super::container::{CompiledProgram, ContainerError, HALT};
use super::opcode::Opcode;
use super::plan::{MeasurementPlan, PlanError};
use super::trace::{Payload, TraceEvent, TraceKind};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VmError {
    #[error("tick budget {budget} exhausted at tick {tick}")]
    BudgetExceeded { budget: u64, tick: u64 },
    #[error(transparent)]
    PlanExhausted(#[from] PlanError),
    #[error("malformed decision table: {0}")]
    MalformedTable(String),
    #[error(transparent)]
    Malformed(#[from] ContainerError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Events in tick order; within a tick, in execution order.
    pub trace: Vec<TraceEvent>,
    /// Tick at which the last engine halted.
    pub final_tick: u64,
    /// Segment indices in the order engine 0 entered them.
    pub segments_visited: Vec<usize>,
    /// Last operand written by each engine.
    pub final_values: Vec<Option<u32>>,
    /// Published bits per resource slot.
    pub resources: Vec<Vec<bool>>,
}

impl RunResult {
    pub fn events(&self, kind: TraceKind) -> impl Iterator<Item = &TraceEvent> {
        self.trace.iter().filter(move |e| e.kind == kind)
    }
}

#[derive(Debug, Clone)]
struct Engine {
    pc: u32,
    counter: u32,
    value: Option<u32>,
    /// Tick at which the instruction at `pc` runs.
    due: u64,
    stalled: bool,
    halted: bool,
}

struct Publication {
    tick: u64,
    resource: usize,
    slot: usize,
    bit: bool,
}

/// Bound on instructions one engine may execute within a single tick.
fn chain_limit(words: usize) -> usize {
    2 * words + 16
}

pub fn run(program: &CompiledProgram, plan: &MeasurementPlan, budget: u64) -> Result<RunResult, VmError> {
    run_shot(program, plan, budget, 0)
}

/// Runs `shots` independent shots; shot `k` draws random outcomes from
/// stream `k` of the plan's seed.
pub fn run_shots(program: &CompiledProgram, plan: &MeasurementPlan, budget: u64, shots: u64, exec: Execution) -> Result<Vec<RunResult>, VmError> {
    let ids: Vec<u64> = (0..shots).collect();
    par::try_map(exec, &ids, |&k| run_shot(program, plan, budget, k))
}

pub fn run_shot(program: &CompiledProgram, plan: &MeasurementPlan, budget: u64, shot: u64) -> Result<RunResult, VmError> {
    if budget == 0 {
        return Err(VmError::BudgetExceeded { budget, tick: 0 });
    }
    program.validate()?;
    Machine::new(program, plan, budget, shot).run()
}

struct Machine<'a> {
    program: &'a CompiledProgram,
    plan: &'a MeasurementPlan,
    state: super::plan::PlanState<'a>,
    budget: u64,
    engines: Vec<Engine>,
    bits: Vec<Vec<bool>>,
    pending: Vec<Publication>,
    trace: Vec<TraceEvent>,
    visited: Vec<usize>,
    now: u64,
}

impl<'a> Machine<'a> {
    fn new(program: &'a CompiledProgram, plan: &'a MeasurementPlan, budget: u64, shot: u64) -> Self {
        let engines = program
            .engines
            .iter()
            .map(|e| Engine { pc: 0, counter: 0, value: None, due: e.words[0].delay() as u64, stalled: false, halted: false })
            .collect();
        Machine {
            program,
            plan,
            state: plan.start(shot),
            budget,
            engines,
            bits: program.resources.iter().map(|r| vec![false; r.length as usize]).collect(),
            pending: Vec::new(),
            trace: Vec::new(),
            visited: if program.engines.is_empty() || program.segments.is_empty() { vec![] } else { vec![0] },
            now: 0,
        }
    }

    fn emit(&mut self, tick: u64, engine: usize, kind: TraceKind, payload: Payload) {
        self.trace.push(TraceEvent { tick, engine: engine as u32, kind, payload });
    }

    fn deliver(&mut self, upto: u64) {
        let bits = &mut self.bits;
        self.pending.retain(|p| {
            if p.tick <= upto {
                bits[p.resource][p.slot] = p.bit;
                false
            } else {
                true
            }
        });
    }

    fn run(mut self) -> Result<RunResult, VmError> {
        loop {
            let running: Vec<usize> = (0..self.engines.len()).filter(|&i| !self.engines[i].halted && !self.engines[i].stalled).collect();
            if running.is_empty() {
                if self.engines.iter().all(|e| e.halted) {
                    break;
                }
                self.resolve_branch()?;
                continue;
            }
            let next = running.iter().map(|&i| self.engines[i].due).min().expect("nonempty");
            if next > self.budget {
                return Err(VmError::BudgetExceeded { budget: self.budget, tick: next });
            }
            self.now = next;
            self.deliver(next);
            for i in running {
                if self.engines[i].due == next {
                    self.step_chain(i)?;
                }
            }
        }
        self.deliver(u64::MAX);
        let mut trace = self.trace;
        trace.sort_by_key(|e| e.tick);
        Ok(RunResult {
            trace,
            final_tick: self.now,
            segments_visited: self.visited,
            final_values: self.engines.iter().map(|e| e.value).collect(),
            resources: self.bits,
        })
    }

    /// Executes engine `i` until it waits, stalls, or halts.
    fn step_chain(&mut self, i: usize) -> Result<(), VmError> {
        let program = self.program;
        let stream = &program.engines[i];
        let now = self.now;
        let limit = chain_limit(stream.words.len());
        for _ in 0..limit {
            let pc = self.engines[i].pc;
            let op = stream.words[pc as usize];
            let mut next = pc + 1;
            match op {
                Opcode::Nop { .. } if pc == stream.halt_index() => {
                    self.halt(i, pc);
                    return Ok(());
                }
                Opcode::Nop { .. } => {}
                Opcode::SetValue { value, .. } => {
                    self.engines[i].value = Some(value);
                    self.emit(now, i, TraceKind::ValueSet, Payload::ValueSet { code: value, value: stream.decode_value(value) });
                    self.measure(i, pc)?;
                }
                Opcode::SetLoop { count, .. } => self.engines[i].counter = count,
                Opcode::DecLoop { .. } => self.engines[i].counter = self.engines[i].counter.saturating_sub(1),
                Opcode::Jnz { target, .. } => {
                    let remaining = self.engines[i].counter;
                    if remaining != 0 {
                        next = target;
                        self.emit(now, i, TraceKind::LoopIteration, Payload::Loop { remaining });
                    }
                }
                Opcode::Jz { target, .. } => {
                    if self.engines[i].counter == 0 {
                        next = target;
                    }
                }
                Opcode::Goto { target, .. } => {
                    let segment = stream.segment_offsets.iter().position(|&o| o == target);
                    self.emit(now, i, TraceKind::BranchTaken, Payload::Branch { from: pc, to: target, segment: segment.map(|s| s as u32) });
                    if i == 0 {
                        if let Some(s) = segment {
                            self.visited.push(s);
                        }
                    }
                    next = target;
                }
                Opcode::BranchLut { .. } => {
                    self.engines[i].stalled = true;
                    return Ok(());
                }
            }
            let e = &mut self.engines[i];
            e.pc = next;
            let delay = stream.words[next as usize].delay() as u64;
            e.due = now + delay;
            if delay > 0 {
                return Ok(());
            }
        }
        Err(VmError::BudgetExceeded { budget: self.budget, tick: now })
    }

    fn halt(&mut self, i: usize, pc: u32) {
        self.engines[i].halted = true;
        self.engines[i].pc = pc;
        self.emit(self.now, i, TraceKind::Halt, Payload::Halt { pc });
    }

    fn measure(&mut self, engine: usize, pc: u32) -> Result<(), VmError> {
        let found = self.program.bindings.iter().enumerate().find(|(_, b)| b.engine as usize == engine && b.instruction == pc);
        let Some((id, b)) = found else { return Ok(()) };
        let resource = &self.program.resources[b.resource as usize];
        let key = format!("{}[{}]", resource.name, b.slot);
        let outcome = self.state.draw(&key)?;
        let bit = outcome.bit(b.threshold);
        let tick = self.now + self.plan.latency_ticks;
        self.pending.push(Publication { tick, resource: b.resource as usize, slot: b.slot as usize, bit });
        let payload = Payload::Measurement { id: id as u32, resource: b.resource, slot: b.slot, count: outcome.count(), bit };
        self.emit(tick, engine, TraceKind::MeasurementPublished, payload);
        Ok(())
    }

    /// Every running engine is stalled on BRANCHLUT: read the table once
    /// the consulted results are in, and jump all engines.
    fn resolve_branch(&mut self) -> Result<(), VmError> {
        let mut op = None;
        for (i, e) in self.engines.iter().enumerate() {
            if e.halted {
                continue;
            }
            let here = self.program.engines[i].words[e.pc as usize];
            match (op, here) {
                (None, Opcode::BranchLut { resource, table, .. }) => op = Some((resource, table)),
                (Some(o), Opcode::BranchLut { resource, table, .. }) if o == (resource, table) => {}
                _ => return Err(VmError::MalformedTable(format!("engines stalled on different branches at tick {}", self.now))),
            }
        }
        let (m, t) = op.expect("some engine is stalled");
        let program = self.program;
        let table = program.tables.get(t as usize).ok_or_else(|| VmError::MalformedTable(format!("no table {t}")))?;
        if table.resource != m as u32 {
            return Err(VmError::MalformedTable(format!("table {t} reads resource {} but BRANCHLUT names {m}", table.resource)));
        }
        let res = m as usize;
        let waiting = self
            .pending
            .iter()
            .filter(|p| p.resource == res && table.slots.contains(&(p.slot as u32)))
            .map(|p| p.tick)
            .max();
        let at = waiting.map_or(self.now, |w| w.max(self.now));
        if at > self.budget {
            return Err(VmError::BudgetExceeded { budget: self.budget, tick: at });
        }
        self.now = at;
        self.deliver(at);
        let key = table.key(&self.bits[res]);
        let dest = *table.entries.get(key).ok_or_else(|| VmError::MalformedTable(format!("table {t} has no entry {key}")))?;
        if dest != HALT && dest as usize >= self.program.segments.len() {
            return Err(VmError::MalformedTable(format!("table {t} targets segment {dest}")));
        }
        if dest != HALT {
            self.visited.push(dest as usize);
        }
        for i in 0..self.engines.len() {
            if self.engines[i].halted {
                continue;
            }
            let stream = &program.engines[i];
            let from = self.engines[i].pc;
            if dest == HALT {
                self.emit(at, i, TraceKind::BranchTaken, Payload::Branch { from, to: stream.halt_index(), segment: None });
                self.halt(i, stream.halt_index());
                continue;
            }
            let to = stream.segment_offsets[dest as usize];
            self.emit(at, i, TraceKind::BranchTaken, Payload::Branch { from, to, segment: Some(dest) });
            let e = &mut self.engines[i];
            e.pc = to;
            e.stalled = false;
            e.due = at + stream.words[to as usize].delay() as u64;
        }
        Ok(())
    }
}
