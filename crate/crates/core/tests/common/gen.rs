// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Random decision-free timing-layer programs of bounded size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcl_core::lang::*;
use qcl_core::symbolics::{BinaryOp, Dims, Expression};

const TTL: [&str; 2] = ["channels.ttl.shutter0", "channels.ttl.shutter1"];
const APD: [&str; 3] = ["channels.detection.apd0", "channels.detection.apd1", "channels.detection.apd2"];
pub const RESOURCE: &str = "m";

pub struct Limits {
    pub segments: usize,
    pub events: usize,
    pub depth: usize,
    pub items: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { segments: 3, events: 4, depth: 3, items: 3 }
    }
}

struct Gen {
    rng: ChaCha8Rng,
    limits: Limits,
    functions: usize,
}

impl Gen {
    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.rng.random_range(0..xs.len())]
    }

    /// A whole number of ticks, written in ns or (rarely) us.
    fn time(&mut self, max_ticks: u32) -> Expression {
        let t = self.rng.random_range(0..=max_ticks);
        if t % 2000 == 0 && t > 0 {
            Expression::literal((t / 2000) as f64, "us")
        } else {
            Expression::literal(t as f64 * 0.5, "ns")
        }
    }

    fn start(&mut self, allow_input: bool) -> StartTime {
        let mode = self.pick(&[TimeMode::Absolute, TimeMode::SincePreviousEvent, TimeMode::SinceLastAction]);
        let value = match self.rng.random_range(0..6) {
            0 if allow_input => Expression::input("d"),
            1 if allow_input => Expression::binary(BinaryOp::Add, Expression::input("d"), self.time(8)),
            2 => Expression::binary(BinaryOp::Add, self.time(10), self.time(10)),
            3 => Expression::literal(1.0, "us"),
            _ => self.time(24),
        };
        StartTime::new(mode, value)
    }

    fn action(&mut self) -> Action {
        match self.rng.random_range(0..10) {
            0..=5 => {
                let channel = format!("channels.aom.raman.individual{}.dds{}", self.rng.random_range(0..6), self.rng.random_range(0..3));
                let mut a = Action::new(ActionKind::Dds, ChannelName::new(channel));
                let n = self.rng.random_range(1..=3);
                let params = ["amplitude", "frequency", "phase"];
                let first = self.rng.random_range(0..3);
                for k in 0..n {
                    let name = params[(first + k) % 3];
                    let value = match name {
                        "amplitude" => Expression::literal(self.rng.random_range(0..=900) as f64, "mV"),
                        "frequency" => Expression::literal(self.rng.random_range(1..=250) as f64, "MHz"),
                        _ => Expression::literal(self.rng.random_range(-12..=12) as f64 * 0.25, "rad"),
                    };
                    a = a.with_param(name, value);
                }
                a
            }
            6 => Action::new(ActionKind::TtlSet, ChannelName::new(self.pick(&TTL))).with_param("level", Expression::number(self.rng.random_range(0..=1) as f64)),
            7 | 8 => {
                let mut a = Action::new(ActionKind::Measure, ChannelName::new(self.pick(&APD[..2])));
                let d = self.rng.random_range(1..=20);
                a = a.with_param("duration", Expression::literal(d as f64 * 0.5, "ns"));
                a.resource = Some(ResourceTarget::Slot { resource: RESOURCE.into(), slot: self.rng.random_range(0..4) });
                a
            }
            _ => {
                let kind = self.pick(&[ActionKind::CounterStart, ActionKind::CounterStop]);
                Action::new(kind, ChannelName::new(APD[2]))
            }
        }
    }

    fn event(&mut self, depth: usize, in_function: bool) -> Event {
        let start = self.start(in_function);
        let n = self.rng.random_range(1..=self.limits.items);
        let mut items = Vec::with_capacity(n);
        for _ in 0..n {
            let roll = self.rng.random_range(0..20);
            let item = if roll < 4 && depth < self.limits.depth {
                EventItem::Event(self.event(depth + 1, in_function))
            } else if roll < 6 && self.functions > 0 && !in_function {
                let f = self.rng.random_range(0..self.functions);
                let args = if self.rng.random_bool(0.7) {
                    vec![Argument { name: "d".into(), value: ArgValue::Expr(self.time(30)) }]
                } else {
                    Vec::new()
                };
                EventItem::Call(FunctionCall { name: format!("f{f}"), args })
            } else {
                EventItem::Action(self.action())
            };
            items.push(item);
        }
        Event::new(start, items)
    }

    fn function(&mut self, k: usize) -> Definition {
        let body = (0..self.rng.random_range(1..=2)).map(|_| EventItem::Event(self.event(2, true))).collect();
        let input = InputDecl { name: "d".into(), kind: InputKind::Quantity(Dims::TIME), default: Some(self.time(6)) };
        Definition::Function(FunctionDef { name: format!("f{k}"), inputs: vec![input], body })
    }
}

/// Program number `id` of the random family.
pub fn program(id: u64, limits: Limits) -> ExperimentAst {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(0x5eed_0000 + id), limits, functions: 0 };
    let mut ast = ExperimentAst::default();
    ast.resources.push(ResourceDecl { name: RESOURCE.into(), kind: ResourceKind::Counter, length: 4 });
    let nf = g.rng.random_range(0..=2);
    for k in 0..nf {
        let def = g.function(k);
        ast.headers.push(def.header());
        ast.definitions.push(def);
    }
    g.functions = nf;
    for s in 0..g.rng.random_range(1..=g.limits.segments) {
        let mut seg = Segment::new(format!("s{s}"));
        seg.repeat = g.pick(&[1, 1, 1, 0, 2, 3]);
        for _ in 0..g.rng.random_range(1..=g.limits.events) {
            seg.items.push(SegmentItem::Event(g.event(1, false)));
        }
        ast.program.segments.push(seg);
    }
    ast
}
