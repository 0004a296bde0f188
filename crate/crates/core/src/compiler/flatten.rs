// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Pass 4: resolve relative start times and flatten nesting into one
//! absolute event per distinct time.

use std::cmp::Ordering;

use crate::lang::*;
use crate::par::{self, Execution};
use crate::symbolics::{evaluate_quantity, Dims, Expression, Scope};

use super::{CompileError, ErrorKind, Pass};

/// An action at an absolute time in seconds, with its position in source
/// order as a tie breaker.
pub type TimedAction = (f64, usize, Action);

pub fn flatten(ast: &ExperimentAst, scope: &(impl Scope + Sync + ?Sized), exec: Execution) -> Result<ExperimentAst, CompileError> {
    let indexed: Vec<(usize, &Segment)> = ast.program.segments.iter().enumerate().collect();
    let segments = par::try_map(exec, &indexed, |&(i, seg)| flatten_segment(seg, scope, &format!("/Experiment/Program/Segment[{}]", i + 1)))?;
    let mut out = ast.clone();
    out.program.segments = segments;
    Ok(out)
}

fn flatten_segment(seg: &Segment, scope: &(impl Scope + ?Sized), path: &str) -> Result<Segment, CompileError> {
    let mut timed = action_times(seg, scope, path)?;
    timed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.2.channel.cmp(&b.2.channel)).then(a.1.cmp(&b.1)));
    let mut items: Vec<SegmentItem> = Vec::new();
    let mut current: Option<(f64, Vec<EventItem>)> = None;
    for (t, _, action) in timed {
        match &mut current {
            Some((ct, acts)) if ct.total_cmp(&t) == Ordering::Equal => acts.push(EventItem::Action(action)),
            _ => {
                if let Some((ct, acts)) = current.take() {
                    items.push(SegmentItem::Event(absolute_event(ct, acts)));
                }
                current = Some((t, vec![EventItem::Action(action)]));
            }
        }
    }
    if let Some((ct, acts)) = current {
        items.push(SegmentItem::Event(absolute_event(ct, acts)));
    }
    if let Some(d) = seg.decision() {
        items.push(SegmentItem::Decision(d.clone()));
    }
    Ok(Segment { name: seg.name.clone(), repeat: seg.repeat, items })
}

fn absolute_event(seconds: f64, actions: Vec<EventItem>) -> Event {
    Event::new(StartTime::new(TimeMode::Absolute, Expression::literal(seconds, "s")), actions)
}

/// Every action of a lowered segment with its absolute time. Measure
/// actions come out as their counter start and stop.
pub fn action_times(seg: &Segment, scope: &(impl Scope + ?Sized), path: &str) -> Result<Vec<TimedAction>, CompileError> {
    let mut w = Walker { scope, path, out: Vec::new() };
    let mut frame = Frame { origin: 0.0, last: None, prev_start: None };
    for item in &seg.items {
        match item {
            SegmentItem::Event(e) => w.event(e, &mut frame)?,
            SegmentItem::Decision(_) => {}
            SegmentItem::GateBlock(_) => {
                return Err(CompileError::new(Pass::Flatten, path, ErrorKind::Invariant("gate block survived lowering".into())));
            }
        }
    }
    Ok(w.out)
}

struct Frame {
    origin: f64,
    last: Option<f64>,
    prev_start: Option<f64>,
}

impl Frame {
    fn saw(&mut self, t: f64) {
        self.last = Some(self.last.map_or(t, |l| l.max(t)));
    }
}

struct Walker<'a, S: ?Sized> {
    scope: &'a S,
    path: &'a str,
    out: Vec<TimedAction>,
}

impl<S: Scope + ?Sized> Walker<'_, S> {
    fn err(&self, kind: impl Into<ErrorKind>) -> CompileError {
        CompileError::new(Pass::Flatten, self.path, kind)
    }

    fn seconds(&self, e: &Expression) -> Result<f64, CompileError> {
        let q = evaluate_quantity(e, self.scope).map_err(|x| self.err(x))?;
        if q.dims() != Dims::TIME {
            return Err(self.err(ErrorKind::Eval(crate::symbolics::EvalError::TypeError(format!("`{e}` is not a time")))));
        }
        Ok(q.si())
    }

    fn event(&mut self, e: &Event, parent: &mut Frame) -> Result<(), CompileError> {
        let offset = self.seconds(&e.start.value)?;
        let base = match e.start.mode {
            TimeMode::Absolute => parent.origin,
            TimeMode::SincePreviousEvent => parent.prev_start.unwrap_or(parent.origin),
            TimeMode::SinceLastAction => parent.last.unwrap_or(parent.origin),
        };
        let start = base + offset;
        if start < 0.0 {
            return Err(self.err(ErrorKind::NegativeTime { seconds: start }));
        }
        let mut frame = Frame { origin: start, last: None, prev_start: None };
        self.items(&e.items, &mut frame)?;
        if let Some(l) = frame.last {
            parent.saw(l);
        }
        parent.prev_start = Some(start);
        Ok(())
    }

    fn items(&mut self, items: &[EventItem], frame: &mut Frame) -> Result<(), CompileError> {
        for item in items {
            match item {
                EventItem::Event(e) => self.event(e, frame)?,
                EventItem::Action(a) => self.action(a, frame)?,
                EventItem::Call(c) => {
                    return Err(self.err(ErrorKind::Invariant(format!("function call `{}` survived expansion", c.name))));
                }
            }
        }
        Ok(())
    }

    fn push(&mut self, t: f64, a: Action) {
        let n = self.out.len();
        self.out.push((t, n, a));
    }

    fn action(&mut self, a: &Action, frame: &mut Frame) -> Result<(), CompileError> {
        let t = frame.origin;
        if a.kind != ActionKind::Measure {
            self.push(t, a.clone());
            frame.saw(t);
            return Ok(());
        }
        let d = a.param("duration").ok_or_else(|| self.err(ErrorKind::Invariant("Measure without duration".into())))?;
        let end = t + self.seconds(d)?;
        if end < t {
            return Err(self.err(ErrorKind::NegativeTime { seconds: end - t }));
        }
        self.push(t, Action::new(ActionKind::CounterStart, a.channel.clone()));
        let mut stop = Action::new(ActionKind::CounterStop, a.channel.clone());
        stop.resource = a.resource.clone();
        stop.threshold = a.threshold.clone();
        self.push(end, stop);
        frame.saw(t);
        frame.saw(end);
        Ok(())
    }
}
