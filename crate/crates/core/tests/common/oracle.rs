// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Direct interpreter for decision-free timing-layer programs. It walks the
//! source tree in integer ticks and never touches the compiler, so its output
//! is an independent prediction of what the engines must write.
//!
//! Supported: events in all three start modes, nested events, calls to
//! functions defined in the program, every action kind, segment repeats.
//! Start times and durations must be literals, input references, or sums
//! and differences of those.

use std::collections::BTreeMap;

use qcl_core::caldb::registry::ChannelRegistry;
use qcl_core::lang::*;
use qcl_core::symbolics::{BinaryOp, Expression, TICK_SECONDS};

use super::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// Two writes to one engine in the same tick.
    Conflict { engine: String, tick: u64 },
    Unsupported(String),
}

type Inputs = BTreeMap<String, Expression>;

struct Frame {
    origin: i64,
    last: Option<i64>,
    prev_start: Option<i64>,
}

impl Frame {
    fn saw(&mut self, t: i64) {
        self.last = Some(self.last.map_or(t, |l| l.max(t)));
    }
}

struct Interp<'a> {
    ast: &'a ExperimentAst,
    registry: &'a ChannelRegistry,
    /// (tick within the segment, engine, SI value)
    out: Vec<(i64, String, f64)>,
}

fn unsupported<T>(what: impl Into<String>) -> Result<T, Rejection> {
    Err(Rejection::Unsupported(what.into()))
}

/// Value of a literal-only expression in SI units.
fn si(e: &Expression, inputs: &Inputs) -> Result<f64, Rejection> {
    match e {
        Expression::Literal(l) => Ok(l.value * l.unit.scale()),
        Expression::Input(n) => match inputs.get(n) {
            Some(v) => si(v, &Inputs::new()),
            None => unsupported(format!("unbound input {n}")),
        },
        Expression::Binary { op: BinaryOp::Add, lhs, rhs } => Ok(si(lhs, inputs)? + si(rhs, inputs)?),
        Expression::Binary { op: BinaryOp::Sub, lhs, rhs } => Ok(si(lhs, inputs)? - si(rhs, inputs)?),
        Expression::Neg(x) => Ok(-si(x, inputs)?),
        other => unsupported(format!("expression {other}")),
    }
}

fn ticks(e: &Expression, inputs: &Inputs) -> Result<i64, Rejection> {
    let t = si(e, inputs)? / TICK_SECONDS;
    let r = t.round();
    if (t - r).abs() > 1e-6 {
        return unsupported(format!("{e} is not a whole tick"));
    }
    Ok(r as i64)
}

impl Interp<'_> {
    fn event(&mut self, e: &Event, parent: &mut Frame, inputs: &Inputs) -> Result<(), Rejection> {
        let offset = ticks(&e.start.value, inputs)?;
        let base = match e.start.mode {
            TimeMode::Absolute => parent.origin,
            TimeMode::SincePreviousEvent => parent.prev_start.unwrap_or(parent.origin),
            TimeMode::SinceLastAction => parent.last.unwrap_or(parent.origin),
        };
        let start = base + offset;
        if start < 0 {
            return unsupported("negative start");
        }
        let mut frame = Frame { origin: start, last: None, prev_start: None };
        self.items(&e.items, &mut frame, inputs)?;
        if let Some(l) = frame.last {
            parent.saw(l);
        }
        parent.prev_start = Some(start);
        Ok(())
    }

    fn items(&mut self, items: &[EventItem], frame: &mut Frame, inputs: &Inputs) -> Result<(), Rejection> {
        for item in items {
            match item {
                EventItem::Event(e) => self.event(e, frame, inputs)?,
                EventItem::Action(a) => self.action(a, frame, inputs)?,
                EventItem::Call(c) => {
                    // A call behaves as an event at the caller's origin
                    // holding the function body.
                    let Some(Definition::Function(f)) = self.ast.definition(&c.name) else {
                        return unsupported(format!("call to {}", c.name));
                    };
                    let mut bound = Inputs::new();
                    for input in &f.inputs {
                        let given = c.args.iter().find(|a| a.name == input.name);
                        let value = match (given, &input.default) {
                            (Some(Argument { value: ArgValue::Expr(x), .. }), _) => x.clone(),
                            (None, Some(d)) => d.clone(),
                            _ => return unsupported(format!("argument {}", input.name)),
                        };
                        bound.insert(input.name.clone(), value);
                    }
                    let body = Event::new(StartTime::zero(TimeMode::Absolute), f.body.clone());
                    self.event(&body, frame, &bound)?;
                }
            }
        }
        Ok(())
    }

    fn write(&mut self, t: i64, channel: &ChannelName, param: &str, value: f64) {
        self.out.push((t, format!("{channel}.{param}"), value));
    }

    fn action(&mut self, a: &Action, frame: &mut Frame, inputs: &Inputs) -> Result<(), Rejection> {
        let t = frame.origin;
        frame.saw(t);
        match a.kind {
            ActionKind::Dds | ActionKind::SetValue => {
                for p in &a.params {
                    let v = match &p.value {
                        Expression::Literal(_) | Expression::Input(_) | Expression::Binary { .. } => si(&p.value, inputs)?,
                        other => return unsupported(format!("param {other}")),
                    };
                    self.write(t, &a.channel, &p.name, v);
                }
            }
            ActionKind::TtlSet => {
                let level = a.param("level").ok_or(Rejection::Unsupported("TTLSet without level".into()))?;
                self.write(t, &a.channel, "level", si(level, inputs)?);
            }
            ActionKind::CounterStart => self.write(t, &a.channel, "gate", 1.0),
            ActionKind::CounterStop => self.write(t, &a.channel, "gate", 0.0),
            ActionKind::Measure => {
                let d = a.param("duration").ok_or(Rejection::Unsupported("Measure without duration".into()))?;
                let end = t + ticks(d, inputs)?;
                self.write(t, &a.channel, "gate", 1.0);
                self.write(end, &a.channel, "gate", 0.0);
                frame.saw(end);
            }
        }
        Ok(())
    }
}

/// Predicted engine writes of a decision-free program, in absolute ticks.
pub fn interpret(ast: &ExperimentAst, registry: &ChannelRegistry) -> Result<Vec<Write>, Rejection> {
    let mut out = Vec::new();
    let mut offset = 0u64;
    for seg in &ast.program.segments {
        let mut interp = Interp { ast, registry, out: Vec::new() };
        let mut frame = Frame { origin: 0, last: None, prev_start: None };
        for item in &seg.items {
            match item {
                SegmentItem::Event(e) => interp.event(e, &mut frame, &Inputs::new())?,
                SegmentItem::GateBlock(_) => return unsupported("gate block"),
                SegmentItem::Decision(_) => return unsupported("decision"),
            }
        }
        let mut writes = Vec::with_capacity(interp.out.len());
        let mut seen = std::collections::BTreeSet::new();
        for (t, engine, v) in interp.out {
            let (_, _, spec) = registry.resolve_engine(&engine).map_err(|e| Rejection::Unsupported(e.to_string()))?;
            let code = ((v - spec.min) / spec.lsb).round();
            if !(0.0..(1u64 << 24) as f64).contains(&code) {
                return unsupported(format!("{engine} = {v} out of range"));
            }
            if !seen.insert((t, engine.clone())) {
                return Err(Rejection::Conflict { engine, tick: t as u64 });
            }
            writes.push((t as u64, engine, code as u32));
        }
        // A segment lasts one tick past its last write.
        let span = writes.iter().map(|w| w.0 + 1).max().unwrap_or(0);
        for k in 0..seg.repeat as u64 {
            out.extend(writes.iter().map(|(t, e, c)| (offset + k * span + t, e.clone(), *c)));
        }
        offset += span * seg.repeat as u64;
    }
    out.sort();
    Ok(out)
}
