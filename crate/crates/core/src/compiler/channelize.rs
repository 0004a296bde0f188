// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Pass 6: split composite actions into one `SetValue` per engine parameter
//! and quantize each value to what the engine can represent.

use std::collections::BTreeSet;

use crate::caldb::registry::{ChannelRegistry, RegistryError};
use crate::lang::*;
use crate::par::{self, Execution};
use crate::symbolics::{Expression, Unit};

use super::{CompileError, ErrorKind, Pass};

/// Engine name of a channelized action: `<channel>.<param>`.
pub fn engine_name(a: &Action) -> Option<String> {
    match (a.kind, a.params.as_slice()) {
        (ActionKind::SetValue, [p]) => Some(format!("{}.{}", a.channel, p.name)),
        _ => None,
    }
}

/// Tick of a solved event start.
pub(crate) fn event_tick(e: &Event) -> Option<u64> {
    match e.start.value.as_literal() {
        Some(l) if l.unit == Unit::tick() && l.value >= 0.0 && l.value.fract() == 0.0 => Some(l.value as u64),
        _ => None,
    }
}

pub fn channelize(ast: &ExperimentAst, registry: &ChannelRegistry, exec: Execution) -> Result<ExperimentAst, CompileError> {
    let indexed: Vec<(usize, &Segment)> = ast.program.segments.iter().enumerate().collect();
    let segments = par::try_map(exec, &indexed, |&(i, seg)| channelize_segment(seg, registry, &format!("/Experiment/Program/Segment[{}]", i + 1)))?;
    let mut out = ast.clone();
    out.program.segments = segments;
    Ok(out)
}

fn channelize_segment(seg: &Segment, registry: &ChannelRegistry, path: &str) -> Result<Segment, CompileError> {
    let mut items = Vec::with_capacity(seg.items.len());
    let mut n_events = 0;
    for item in &seg.items {
        let SegmentItem::Event(e) = item else {
            items.push(item.clone());
            continue;
        };
        n_events += 1;
        let epath = format!("{path}/Event[{n_events}]");
        let err = |kind: ErrorKind| CompileError::new(Pass::Channelize, &epath, kind);
        let tick = event_tick(e).ok_or_else(|| err(ErrorKind::Invariant("start time is not a whole tick".into())))?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for a in &e.items {
            let EventItem::Action(a) = a else {
                return Err(err(ErrorKind::Invariant("nested item survived flattening".into())));
            };
            for sv in split(a).map_err(err)? {
                let engine = engine_name(&sv).expect("split yields SetValue");
                let (_, _, spec) = registry.resolve_engine(&engine).map_err(|e| err(e.into()))?;
                let p = &sv.params[0];
                let lit = p.value.as_literal().ok_or_else(|| err(ErrorKind::Invariant(format!("`{engine}` value is not solved"))))?;
                let got = lit.unit.dims();
                if got != spec.dims {
                    return Err(err(RegistryError::WrongDimension { param: engine, expected: spec.dims, got }.into()));
                }
                let si = lit.value * lit.unit.scale();
                let q = spec.quantize(&engine, si).map_err(|e| err(e.into()))?;
                if !seen.insert(engine.clone()) {
                    return Err(err(ErrorKind::EngineConflict { engine, tick }));
                }
                let mut sv = sv.clone();
                sv.params[0].value = Expression::literal_in(q, Unit::si(spec.dims));
                out.push(EventItem::Action(sv));
            }
        }
        items.push(SegmentItem::Event(Event::new(e.start.clone(), out)));
    }
    Ok(Segment { name: seg.name.clone(), repeat: seg.repeat, items })
}

fn set_value(a: &Action, param: &str, value: Expression) -> Action {
    let mut sv = Action::new(ActionKind::SetValue, a.channel.clone());
    sv.params.push(Param { name: param.to_string(), value });
    sv
}

fn split(a: &Action) -> Result<Vec<Action>, ErrorKind> {
    Ok(match a.kind {
        ActionKind::Dds => a.params.iter().map(|p| set_value(a, &p.name, p.value.clone())).collect(),
        ActionKind::CounterStart => vec![set_value(a, "gate", Expression::number(1.0))],
        ActionKind::CounterStop => {
            let mut sv = set_value(a, "gate", Expression::number(0.0));
            sv.resource = a.resource.clone();
            sv.threshold = a.threshold.clone();
            vec![sv]
        }
        ActionKind::TtlSet => {
            let level = a.param("level").ok_or_else(|| ErrorKind::Invariant("TTLSet without level".into()))?;
            vec![set_value(a, "level", level.clone())]
        }
        ActionKind::SetValue if a.params.len() == 1 => vec![a.clone()],
        ActionKind::SetValue => return Err(ErrorKind::Invariant("SetValue must set one parameter".into())),
        ActionKind::Measure => return Err(ErrorKind::Invariant("Measure survived flattening".into())),
    })
}
