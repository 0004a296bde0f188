// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Pass 5: evaluate every expression against the calibration snapshot and
//! quantize start times to ticks.

use crate::lang::*;
use crate::par::{self, Execution};
use crate::symbolics::{evaluate_quantity, Expression, Scope, Unit, TICK_SECONDS};

use super::{CompileError, ErrorKind, Pass};

/// Largest tolerated distance, in ticks, between a start time and its tick.
pub const TICK_TOLERANCE: f64 = 0.01;

pub fn solve_symbols(
    ast: &ExperimentAst,
    scope: &(impl Scope + Sync + ?Sized),
    strict: bool,
    exec: Execution,
) -> Result<(ExperimentAst, Vec<Diagnostic>), CompileError> {
    let mut out = ast.clone();
    let mut warnings = Vec::new();
    for (i, s) in out.initial_setup.settings.iter_mut().enumerate() {
        s.value = literal(&s.value, scope, &format!("/Experiment/InitialSetup/Setting[{}]", i + 1))?;
    }
    let indexed: Vec<(usize, &Segment)> = ast.program.segments.iter().enumerate().collect();
    let solved = par::try_map(exec, &indexed, |&(i, seg)| solve_segment(seg, scope, strict, &format!("/Experiment/Program/Segment[{}]", i + 1)))?;
    out.program.segments = Vec::with_capacity(solved.len());
    for (seg, w) in solved {
        out.program.segments.push(seg);
        warnings.extend(w);
    }
    out.definitions.retain(|d| !matches!(d, Definition::Calculation(_)));
    out.headers.retain(|h| h.kind != DefinitionKind::Calculation);
    Ok((out, warnings))
}

fn literal(e: &Expression, scope: &(impl Scope + ?Sized), path: &str) -> Result<Expression, CompileError> {
    let q = evaluate_quantity(e, scope).map_err(|x| CompileError::new(Pass::Solve, path, x))?;
    Ok(Expression::literal_in(q.si(), Unit::si(q.dims())))
}

/// Tick index of a time and its distance from the exact value, in ticks.
pub fn to_ticks(seconds: f64) -> (u64, f64) {
    let exact = seconds / TICK_SECONDS;
    let tick = exact.round();
    (tick as u64, (exact - tick).abs())
}

fn solve_segment(seg: &Segment, scope: &(impl Scope + ?Sized), strict: bool, path: &str) -> Result<(Segment, Vec<Diagnostic>), CompileError> {
    let mut warnings = Vec::new();
    let mut items: Vec<SegmentItem> = Vec::new();
    let mut last_tick = None;
    for (k, item) in seg.items.iter().enumerate() {
        let ipath = format!("{path}/Event[{}]", k + 1);
        match item {
            SegmentItem::Event(e) => {
                let seconds = evaluate_quantity(&e.start.value, scope).map_err(|x| CompileError::new(Pass::Solve, &ipath, x))?.si();
                let (tick, residual) = to_ticks(seconds);
                if residual > TICK_TOLERANCE {
                    if strict {
                        return Err(CompileError::new(Pass::Solve, &ipath, ErrorKind::TickQuantization { seconds, ticks: seconds / TICK_SECONDS, residual }));
                    }
                    warnings.push(Diagnostic::warning(
                        "tick-residual",
                        &ipath,
                        format!("start {seconds} s rounds to tick {tick} with residual {residual:.3} tick"),
                    ));
                }
                let mut actions = Vec::with_capacity(e.items.len());
                for a in &e.items {
                    let EventItem::Action(a) = a else {
                        return Err(CompileError::new(Pass::Solve, &ipath, ErrorKind::Invariant("nested item survived flattening".into())));
                    };
                    actions.push(EventItem::Action(solve_action(a, scope, &ipath)?));
                }
                match items.last_mut() {
                    Some(SegmentItem::Event(prev)) if last_tick == Some(tick) => prev.items.extend(actions),
                    _ => items.push(SegmentItem::Event(Event::new(
                        StartTime::new(TimeMode::Absolute, Expression::literal_in(tick as f64, Unit::tick())),
                        actions,
                    ))),
                }
                last_tick = Some(tick);
            }
            SegmentItem::Decision(d) => {
                let mut d = d.clone();
                d.threshold = d.threshold.map(|t| literal(&t, scope, path)).transpose()?;
                items.push(SegmentItem::Decision(d));
            }
            SegmentItem::GateBlock(_) => {
                return Err(CompileError::new(Pass::Solve, path, ErrorKind::Invariant("gate block survived lowering".into())));
            }
        }
    }
    Ok((Segment { name: seg.name.clone(), repeat: seg.repeat, items }, warnings))
}

fn solve_action(a: &Action, scope: &(impl Scope + ?Sized), path: &str) -> Result<Action, CompileError> {
    let mut out = a.clone();
    for p in &mut out.params {
        p.value = literal(&p.value, scope, &format!("{path}/{}/Param[@name='{}']", a.kind.tag(), p.name))?;
    }
    out.threshold = a.threshold.as_ref().map(|t| literal(t, scope, path)).transpose()?;
    Ok(out)
}
