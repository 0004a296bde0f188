// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Binding call-site qubits and arguments to a definition's formals, and
//! substituting them through a body.

use std::collections::BTreeMap;

use crate::lang::*;
use crate::symbolics::{simplify, Expression};

use super::StdlibError;

#[derive(Debug, Clone, Default)]
pub struct Bindings {
    pub values: BTreeMap<String, Expression>,
    pub qubits: BTreeMap<String, QubitRef>,
    pub resources: BTreeMap<String, ResourceTarget>,
}

/// Matches a call against the callee's ports and inputs. Unsupplied inputs
/// take their declared defaults.
pub fn bind(name: &str, ports: &[String], inputs: &[InputDecl], qubits: &[QubitBinding], args: &[Argument]) -> Result<Bindings, StdlibError> {
    let mut b = Bindings::default();
    if qubits.len() != ports.len() {
        return Err(StdlibError::ArityMismatch { name: name.into(), expected: ports.len(), got: qubits.len() });
    }
    for q in qubits {
        if let Some(p) = &q.port {
            if !ports.contains(p) {
                return Err(StdlibError::UnknownPort { name: name.into(), port: p.clone() });
            }
            if b.qubits.insert(p.clone(), q.qubit.clone()).is_some() {
                return Err(StdlibError::ArityMismatch { name: name.into(), expected: ports.len(), got: qubits.len() + 1 });
            }
        }
    }
    let mut free = ports.iter().filter(|p| !b.qubits.contains_key(*p)).cloned().collect::<Vec<_>>().into_iter();
    for q in qubits.iter().filter(|q| q.port.is_none()) {
        let port = free.next().expect("arity checked");
        b.qubits.insert(port, q.qubit.clone());
    }

    for a in args {
        let Some(decl) = inputs.iter().find(|i| i.name == a.name) else {
            return Err(StdlibError::UnknownArgument { name: name.into(), input: a.name.clone() });
        };
        match (&decl.kind, &a.value) {
            (InputKind::Quantity(want), ArgValue::Expr(e)) => {
                if let Ok(Expression::Literal(l)) = simplify(e) {
                    if l.unit.dims() != *want {
                        return Err(StdlibError::DimensionError {
                            name: name.into(),
                            input: a.name.clone(),
                            expected: want.name(),
                            found: l.unit.dims().name(),
                        });
                    }
                }
                b.values.insert(a.name.clone(), e.clone());
            }
            (InputKind::Resource, ArgValue::Resource(r)) => {
                b.resources.insert(a.name.clone(), r.clone());
            }
            (InputKind::Qubit, ArgValue::Qubit(q)) => {
                b.qubits.insert(a.name.clone(), q.clone());
            }
            (kind, _) => {
                return Err(StdlibError::ArgumentKind { name: name.into(), input: a.name.clone(), expected: kind.name() });
            }
        }
    }
    for decl in inputs {
        if args.iter().any(|a| a.name == decl.name) {
            continue;
        }
        match &decl.default {
            Some(d) => {
                b.values.insert(decl.name.clone(), d.clone());
            }
            None => return Err(StdlibError::MissingArgument { name: name.into(), input: decl.name.clone() }),
        }
    }
    Ok(b)
}

impl Bindings {
    pub fn expression(&self, e: &Expression) -> Expression {
        e.substitute(&|n| self.values.get(n).cloned())
    }

    pub fn qubit(&self, q: &QubitRef) -> Result<QubitRef, StdlibError> {
        match q {
            QubitRef::Index(_) => Ok(q.clone()),
            QubitRef::Input(n) => self.qubits.get(n).cloned().ok_or_else(|| StdlibError::Unbound(n.clone())),
        }
    }

    pub fn resource(&self, r: &ResourceTarget) -> Result<ResourceTarget, StdlibError> {
        match r {
            ResourceTarget::Slot { .. } => Ok(r.clone()),
            ResourceTarget::Input(n) => self.resources.get(n).cloned().ok_or_else(|| StdlibError::Unbound(n.clone())),
        }
    }

    pub fn channel(&self, c: &ChannelName) -> Result<ChannelName, StdlibError> {
        c.substitute(&|n| self.qubits.get(n).map(|q| q.to_string())).map_err(StdlibError::Unbound)
    }

    pub fn arguments(&self, args: &[Argument]) -> Result<Vec<Argument>, StdlibError> {
        args.iter()
            .map(|a| {
                let value = match &a.value {
                    ArgValue::Expr(e) => ArgValue::Expr(self.expression(e)),
                    ArgValue::Resource(r) => ArgValue::Resource(self.resource(r)?),
                    ArgValue::Qubit(q) => ArgValue::Qubit(self.qubit(q)?),
                };
                Ok(Argument { name: a.name.clone(), value })
            })
            .collect()
    }

    pub fn action(&self, a: &Action) -> Result<Action, StdlibError> {
        Ok(Action {
            kind: a.kind,
            channel: self.channel(&a.channel)?,
            params: a.params.iter().map(|p| Param { name: p.name.clone(), value: self.expression(&p.value) }).collect(),
            interp_type: a.interp_type.clone(),
            resource: a.resource.as_ref().map(|r| self.resource(r)).transpose()?,
            threshold: a.threshold.as_ref().map(|t| self.expression(t)),
        })
    }

    pub fn event(&self, e: &Event) -> Result<Event, StdlibError> {
        Ok(Event {
            start: StartTime { mode: e.start.mode, value: self.expression(&e.start.value) },
            items: self.event_items(&e.items)?,
        })
    }

    pub fn event_items(&self, items: &[EventItem]) -> Result<Vec<EventItem>, StdlibError> {
        items
            .iter()
            .map(|item| {
                Ok(match item {
                    EventItem::Action(a) => EventItem::Action(self.action(a)?),
                    EventItem::Event(e) => EventItem::Event(self.event(e)?),
                    EventItem::Call(c) => EventItem::Call(FunctionCall { name: c.name.clone(), args: self.arguments(&c.args)? }),
                })
            })
            .collect()
    }

    pub fn gate_call(&self, g: &GateCall) -> Result<GateCall, StdlibError> {
        Ok(GateCall {
            name: g.name.clone(),
            qubits: g
                .qubits
                .iter()
                .map(|q| Ok(QubitBinding { port: q.port.clone(), qubit: self.qubit(&q.qubit)? }))
                .collect::<Result<_, StdlibError>>()?,
            args: self.arguments(&g.args)?,
        })
    }

    pub fn gate_items(&self, items: &[GateItem]) -> Result<Vec<GateItem>, StdlibError> {
        items
            .iter()
            .map(|item| {
                Ok(match item {
                    GateItem::Gate(g) => GateItem::Gate(self.gate_call(g)?),
                    GateItem::Block(b) => GateItem::Block(GateBlock { schedule: b.schedule, items: self.gate_items(&b.items)? }),
                })
            })
            .collect()
    }
}
