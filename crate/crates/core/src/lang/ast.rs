// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Typed element tree of a program.

use std::fmt;

use crate::symbolics::{Dims, Expression};

use super::channel::ChannelName;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentAst {
    pub resources: Vec<ResourceDecl>,
    pub initial_setup: InitialSetup,
    pub headers: Vec<HeaderDecl>,
    pub definitions: Vec<Definition>,
    pub program: Program,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResourceKind {
    Counter,
    Generic,
}

impl ResourceKind {
    pub fn name(self) -> &'static str {
        match self {
            ResourceKind::Counter => "counter",
            ResourceKind::Generic => "generic",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "counter" => Some(ResourceKind::Counter),
            "generic" => Some(ResourceKind::Generic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceDecl {
    pub name: String,
    pub kind: ResourceKind,
    /// Number of one-bit slots.
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialSetup {
    pub use_predefined: Option<String>,
    pub settings: Vec<Setting>,
}

impl InitialSetup {
    pub fn is_empty(&self) -> bool {
        self.use_predefined.is_none() && self.settings.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub name: String,
    pub value: Expression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DefinitionKind {
    Gate,
    Function,
    Calculation,
}

impl DefinitionKind {
    pub fn name(self) -> &'static str {
        match self {
            DefinitionKind::Gate => "gate",
            DefinitionKind::Function => "function",
            DefinitionKind::Calculation => "calculation",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "gate" => Some(DefinitionKind::Gate),
            "function" => Some(DefinitionKind::Function),
            "calculation" => Some(DefinitionKind::Calculation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HeaderDecl {
    pub kind: DefinitionKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Definition {
    Gate(GateDef),
    Function(FunctionDef),
    Calculation(CalculationDef),
}

impl Definition {
    pub fn name(&self) -> &str {
        match self {
            Definition::Gate(g) => &g.name,
            Definition::Function(f) => &f.name,
            Definition::Calculation(c) => &c.name,
        }
    }

    pub fn kind(&self) -> DefinitionKind {
        match self {
            Definition::Gate(_) => DefinitionKind::Gate,
            Definition::Function(_) => DefinitionKind::Function,
            Definition::Calculation(_) => DefinitionKind::Calculation,
        }
    }

    pub fn header(&self) -> HeaderDecl {
        HeaderDecl { kind: self.kind(), name: self.name().to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub ports: Vec<String>,
    pub inputs: Vec<InputDecl>,
    pub body: GateBody,
}

impl GateDef {
    pub fn is_native(&self) -> bool {
        matches!(self.body, GateBody::Native(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateBody {
    /// Sequence of other gates, run one after another.
    Composite(Vec<GateItem>),
    /// Timing-layer body, offsets relative to the gate start.
    Native(Vec<EventItem>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub inputs: Vec<InputDecl>,
    pub body: Vec<EventItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalculationDef {
    pub name: String,
    pub expr: Expression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputDecl {
    pub name: String,
    pub kind: InputKind,
    pub default: Option<Expression>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Quantity(Dims),
    Resource,
    Qubit,
}

impl InputKind {
    pub fn name(self) -> String {
        match self {
            InputKind::Quantity(d) => d.name(),
            InputKind::Resource => "resource".into(),
            InputKind::Qubit => "qubit".into(),
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "resource" => Some(InputKind::Resource),
            "qubit" => Some(InputKind::Qubit),
            other => Dims::from_name(other).map(InputKind::Quantity),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub name: String,
    /// Number of consecutive executions; 1 for a plain segment.
    pub repeat: u32,
    pub items: Vec<SegmentItem>,
}

impl Segment {
    pub fn new(name: impl Into<String>) -> Segment {
        Segment { name: name.into(), repeat: 1, items: Vec::new() }
    }

    pub fn decision(&self) -> Option<&Decision> {
        self.items.iter().rev().find_map(|i| match i {
            SegmentItem::Decision(d) => Some(d),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentItem {
    Event(Event),
    GateBlock(GateBlock),
    Decision(Decision),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TimeMode {
    /// Offset from the start of the enclosing segment or event.
    Absolute,
    /// Offset from the start of the previous sibling event.
    #[default]
    SincePreviousEvent,
    /// Offset from the latest action issued so far in the enclosing container.
    SinceLastAction,
}

impl TimeMode {
    pub fn name(self) -> &'static str {
        match self {
            TimeMode::Absolute => "absolute",
            TimeMode::SincePreviousEvent => "since-previous-event",
            TimeMode::SinceLastAction => "since-last-action",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "absolute" => Some(TimeMode::Absolute),
            "since-previous-event" => Some(TimeMode::SincePreviousEvent),
            "since-last-action" => Some(TimeMode::SinceLastAction),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartTime {
    pub mode: TimeMode,
    pub value: Expression,
}

impl StartTime {
    pub fn new(mode: TimeMode, value: Expression) -> StartTime {
        StartTime { mode, value }
    }

    pub fn zero(mode: TimeMode) -> StartTime {
        StartTime { mode, value: Expression::literal(0.0, "ns") }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub start: StartTime,
    pub items: Vec<EventItem>,
}

impl Event {
    pub fn new(start: StartTime, items: Vec<EventItem>) -> Event {
        Event { start, items }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventItem {
    Action(Action),
    Call(FunctionCall),
    Event(Event),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Schedule {
    /// Members start together.
    #[default]
    Parallel,
    /// Each member starts after the previous one's last action.
    Sequential,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Parallel => "parallel",
            Schedule::Sequential => "sequential",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "parallel" => Some(Schedule::Parallel),
            "sequential" => Some(Schedule::Sequential),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateBlock {
    pub schedule: Schedule,
    pub items: Vec<GateItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateItem {
    Gate(GateCall),
    Block(GateBlock),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCall {
    pub name: String,
    pub qubits: Vec<QubitBinding>,
    pub args: Vec<Argument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitBinding {
    /// Port name; `None` binds positionally.
    pub port: Option<String>,
    pub qubit: QubitRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QubitRef {
    Index(u32),
    /// A port or qubit input of the enclosing definition.
    Input(String),
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitRef::Index(i) => write!(f, "{i}"),
            QubitRef::Input(n) => write!(f, "{{{n}}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionCall {
    pub name: String,
    pub args: Vec<Argument>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Argument {
    pub name: String,
    pub value: ArgValue,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Expr(Expression),
    Resource(ResourceTarget),
    Qubit(QubitRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ResourceTarget {
    Slot { resource: String, slot: u32 },
    /// A resource input of the enclosing definition.
    Input(String),
}

impl fmt::Display for ResourceTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceTarget::Slot { resource, slot } => write!(f, "{resource}[{slot}]"),
            ResourceTarget::Input(n) => write!(f, "{{{n}}}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Dds,
    CounterStart,
    CounterStop,
    Measure,
    TtlSet,
    /// One fully qualified engine parameter; the only action kind left after
    /// channelization.
    SetValue,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::Dds,
        ActionKind::CounterStart,
        ActionKind::CounterStop,
        ActionKind::Measure,
        ActionKind::TtlSet,
        ActionKind::SetValue,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ActionKind::Dds => "DDSAction",
            ActionKind::CounterStart => "CounterStart",
            ActionKind::CounterStop => "CounterStop",
            ActionKind::Measure => "Measure",
            ActionKind::TtlSet => "TTLSet",
            ActionKind::SetValue => "SetValue",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        ActionKind::ALL.into_iter().find(|k| k.tag() == tag)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Expression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub kind: ActionKind,
    pub channel: ChannelName,
    pub params: Vec<Param>,
    pub interp_type: Option<String>,
    /// Destination slot of a measurement result.
    pub resource: Option<ResourceTarget>,
    /// Count threshold turning a measurement into a bit.
    pub threshold: Option<Expression>,
}

impl Action {
    pub fn new(kind: ActionKind, channel: impl Into<ChannelName>) -> Action {
        Action { kind, channel: channel.into(), params: Vec::new(), interp_type: None, resource: None, threshold: None }
    }

    pub fn dds(channel: impl Into<ChannelName>, params: Vec<(&str, Expression)>) -> Action {
        let mut a = Action::new(ActionKind::Dds, channel);
        a.params = params.into_iter().map(|(n, v)| Param { name: n.to_string(), value: v }).collect();
        a
    }

    pub fn with_param(mut self, name: &str, value: Expression) -> Action {
        self.params.push(Param { name: name.to_string(), value });
        self
    }

    pub fn param(&self, name: &str) -> Option<&Expression> {
        self.params.iter().find(|p| p.name == name).map(|p| &p.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub resource: String,
    /// Consulted slots, most significant first; empty means every slot.
    pub slots: Vec<u32>,
    pub threshold: Option<Expression>,
    pub conditions: Vec<Condition>,
}

impl Decision {
    /// Slots consulted given the resource length.
    pub fn effective_slots(&self, length: u32) -> Vec<u32> {
        if self.slots.is_empty() {
            (0..length).collect()
        } else {
            self.slots.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    /// Bit string, first character for the first consulted slot.
    pub state: String,
    pub destination: String,
}

impl ExperimentAst {
    pub fn resource(&self, name: &str) -> Option<&ResourceDecl> {
        self.resources.iter().find(|r| r.name == name)
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.definitions.iter().find(|d| d.name() == name)
    }

    pub fn segment_index(&self, name: &str) -> Option<usize> {
        self.program.segments.iter().position(|s| s.name == name)
    }
}

/// Visits every action in a list of event items, depth first.
pub fn for_each_action<'a>(items: &'a [EventItem], f: &mut impl FnMut(&'a Action)) {
    for item in items {
        match item {
            EventItem::Action(a) => f(a),
            EventItem::Event(e) => for_each_action(&e.items, f),
            EventItem::Call(_) => {}
        }
    }
}

/// Visits every function call in a list of event items, depth first.
pub fn for_each_call<'a>(items: &'a [EventItem], f: &mut impl FnMut(&'a FunctionCall)) {
    for item in items {
        match item {
            EventItem::Call(c) => f(c),
            EventItem::Event(e) => for_each_call(&e.items, f),
            EventItem::Action(_) => {}
        }
    }
}

pub fn for_each_gate<'a>(items: &'a [GateItem], f: &mut impl FnMut(&'a GateCall)) {
    for item in items {
        match item {
            GateItem::Gate(g) => f(g),
            GateItem::Block(b) => for_each_gate(&b.items, f),
        }
    }
}
