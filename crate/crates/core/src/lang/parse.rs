// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! XML reader. Maps each element of the `qi` namespace onto its AST type and
//! rejects anything the schema does not allow.

use roxmltree::{Document, Node, NodeType};
use thiserror::Error;

use crate::symbolics::{BinaryOp, CompareOp, DateSelector, Expression, Literal, Unit};

use super::ast::*;
use super::channel::ChannelName;
use super::lint::Diagnostic;
use super::QI_NS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    WellFormedness { line: u32, column: u32, message: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Reference(Vec<Diagnostic>),
}

type Result<T> = std::result::Result<T, ParseError>;

fn schema<T>(path: &str, message: impl Into<String>) -> Result<T> {
    Err(ParseError::Schema { path: path.to_string(), message: message.into() })
}

/// One element with its diagnostic path.
#[derive(Clone)]
struct El<'a, 'i> {
    node: Node<'a, 'i>,
    path: String,
}

impl<'a, 'i> El<'a, 'i> {
    fn root(node: Node<'a, 'i>) -> Result<Self> {
        let el = El { node, path: format!("/{}", node.tag_name().name()) };
        el.check_ns()?;
        Ok(el)
    }

    fn name(&self) -> &'a str {
        self.node.tag_name().name()
    }

    fn check_ns(&self) -> Result<()> {
        match self.node.tag_name().namespace() {
            None => Ok(()),
            Some(ns) if ns == QI_NS => Ok(()),
            Some(ns) => schema(&self.path, format!("element in foreign namespace `{ns}`")),
        }
    }

    /// Element children; stray text is a schema error.
    fn children(&self) -> Result<Vec<El<'a, 'i>>> {
        let mut counts: Vec<(&str, usize)> = Vec::new();
        let mut out = Vec::new();
        for child in self.node.children() {
            match child.node_type() {
                NodeType::Element => {
                    let name = child.tag_name().name();
                    let n = match counts.iter_mut().find(|(k, _)| *k == name) {
                        Some((_, n)) => {
                            *n += 1;
                            *n
                        }
                        None => {
                            counts.push((name, 1));
                            1
                        }
                    };
                    let el = El { node: child, path: format!("{}/{}[{}]", self.path, name, n) };
                    el.check_ns()?;
                    out.push(el);
                }
                NodeType::Text if !child.text().unwrap_or("").trim().is_empty() => {
                    return schema(&self.path, "unexpected text content");
                }
                _ => {}
            }
        }
        Ok(out)
    }

    fn text(&self) -> Result<&'a str> {
        let mut text = None;
        for child in self.node.children() {
            match child.node_type() {
                NodeType::Element => return schema(&self.path, "expected text content only"),
                NodeType::Text => text = Some(child.text().unwrap_or("").trim()),
                _ => {}
            }
        }
        text.ok_or_else(|| ParseError::Schema { path: self.path.clone(), message: "missing text content".into() })
    }

    fn allow(&self, allowed: &[&str]) -> Result<()> {
        for a in self.node.attributes() {
            if a.namespace().is_some() || !allowed.contains(&a.name()) {
                return schema(&self.path, format!("unknown attribute `{}`", a.name()));
            }
        }
        Ok(())
    }

    fn attr(&self, name: &str) -> Option<&'a str> {
        self.node.attribute(name)
    }

    fn req(&self, name: &str) -> Result<&'a str> {
        self.attr(name)
            .ok_or_else(|| ParseError::Schema { path: self.path.clone(), message: format!("missing attribute `{name}`") })
    }

    fn uint(&self, name: &str) -> Result<Option<u32>> {
        match self.attr(name) {
            None => Ok(None),
            Some(v) => v.trim().parse().map(Some).or_else(|_| schema(&self.path, format!("`{name}` must be a non-negative integer"))),
        }
    }

    fn unexpected<T>(&self) -> Result<T> {
        schema(&self.path, format!("unexpected element `{}`", self.name()))
    }
}

/// Parses a program and rejects dangling segment or resource references.
pub fn parse_xml(document: &str) -> Result<ExperimentAst> {
    let ast = parse_unchecked(document)?;
    let dangling: Vec<Diagnostic> =
        super::lint::lint_references(&ast).into_iter().filter(|d| d.is_error()).collect();
    if dangling.is_empty() {
        Ok(ast)
    } else {
        Err(ParseError::Reference(dangling))
    }
}

/// Structural parse only; semantic checks are left to [`lint`](super::lint).
pub fn parse_unchecked(document: &str) -> Result<ExperimentAst> {
    let doc = parse_document(document)?;
    let root = El::root(doc.root_element())?;
    if root.name() != "Experiment" {
        return root.unexpected();
    }
    experiment(&root)
}

/// Parses a single definition document (one stdlib file).
pub fn parse_definition(document: &str) -> Result<Definition> {
    let doc = parse_document(document)?;
    definition(&El::root(doc.root_element())?)
}

/// Parses a standalone expression element.
pub fn parse_expression(document: &str) -> Result<Expression> {
    let doc = parse_document(document)?;
    expression(&El::root(doc.root_element())?)
}

fn parse_document(text: &str) -> Result<Document<'_>> {
    Document::parse(text).map_err(|e| {
        let pos = e.pos();
        ParseError::WellFormedness { line: pos.row, column: pos.col, message: e.to_string() }
    })
}

fn experiment(el: &El) -> Result<ExperimentAst> {
    el.allow(&[])?;
    let mut ast = ExperimentAst::default();
    let mut seen: Vec<&str> = Vec::new();
    for c in el.children()? {
        if seen.contains(&c.name()) {
            return schema(&c.path, format!("`{}` may appear only once", c.name()));
        }
        seen.push(c.name());
        match c.name() {
            "Resources" => {
                c.allow(&[])?;
                for r in c.children()? {
                    ast.resources.push(resource(&r)?);
                }
            }
            "InitialSetup" => ast.initial_setup = initial_setup(&c)?,
            "Headers" => {
                c.allow(&[])?;
                for h in c.children()? {
                    if h.name() != "Header" {
                        return h.unexpected();
                    }
                    h.allow(&["kind", "name"])?;
                    let kind = DefinitionKind::from_name(h.req("kind")?)
                        .ok_or_else(|| ParseError::Schema { path: h.path.clone(), message: "unknown header kind".into() })?;
                    ast.headers.push(HeaderDecl { kind, name: h.req("name")?.to_string() });
                }
            }
            "Definitions" => {
                c.allow(&[])?;
                for d in c.children()? {
                    ast.definitions.push(definition(&d)?);
                }
            }
            "Program" => {
                c.allow(&[])?;
                for (i, s) in c.children()?.iter().enumerate() {
                    if s.name() != "Segment" {
                        return s.unexpected();
                    }
                    ast.program.segments.push(segment(s, i)?);
                }
            }
            _ => return c.unexpected(),
        }
    }
    Ok(ast)
}

fn resource(el: &El) -> Result<ResourceDecl> {
    if el.name() != "Resource" {
        return el.unexpected();
    }
    el.allow(&["name", "kind", "length"])?;
    let kind = match el.attr("kind") {
        None => ResourceKind::Generic,
        Some(k) => ResourceKind::from_name(k)
            .ok_or_else(|| ParseError::Schema { path: el.path.clone(), message: format!("unknown resource kind `{k}`") })?,
    };
    let length = el.uint("length")?.unwrap_or(1);
    if length == 0 {
        return schema(&el.path, "resource length must be positive");
    }
    Ok(ResourceDecl { name: el.req("name")?.to_string(), kind, length })
}

fn initial_setup(el: &El) -> Result<InitialSetup> {
    el.allow(&["use_predefined"])?;
    let mut setup = InitialSetup { use_predefined: el.attr("use_predefined").map(str::to_string), settings: Vec::new() };
    for s in el.children()? {
        if s.name() != "Setting" {
            return s.unexpected();
        }
        s.allow(&["name"])?;
        setup.settings.push(Setting { name: s.req("name")?.to_string(), value: single_expression(&s)? });
    }
    Ok(setup)
}

fn definition(el: &El) -> Result<Definition> {
    match el.name() {
        "GateDefinition" => {
            el.allow(&["name", "ports", "layer"])?;
            let ports = el.attr("ports").map(|p| p.split_whitespace().map(str::to_string).collect()).unwrap_or_default();
            let composite = match el.attr("layer") {
                None | Some("native") => false,
                Some("composite") => true,
                Some(other) => return schema(&el.path, format!("unknown gate layer `{other}`")),
            };
            let mut inputs = Vec::new();
            let mut gates = Vec::new();
            let mut events = Vec::new();
            for c in el.children()? {
                if c.name() == "Input" {
                    inputs.push(input_decl(&c)?);
                } else if composite {
                    gates.push(gate_item(&c)?);
                } else {
                    events.push(event_item(&c)?);
                }
            }
            let body = if composite { GateBody::Composite(gates) } else { GateBody::Native(events) };
            Ok(Definition::Gate(GateDef { name: el.req("name")?.to_string(), ports, inputs, body }))
        }
        "FunctionDefinition" => {
            el.allow(&["name"])?;
            let mut inputs = Vec::new();
            let mut body = Vec::new();
            for c in el.children()? {
                if c.name() == "Input" {
                    inputs.push(input_decl(&c)?);
                } else {
                    body.push(event_item(&c)?);
                }
            }
            Ok(Definition::Function(FunctionDef { name: el.req("name")?.to_string(), inputs, body }))
        }
        "CalculationDefinition" => {
            el.allow(&["name"])?;
            Ok(Definition::Calculation(CalculationDef { name: el.req("name")?.to_string(), expr: single_expression(el)? }))
        }
        _ => el.unexpected(),
    }
}

fn input_decl(el: &El) -> Result<InputDecl> {
    el.allow(&["name", "kind"])?;
    let kind_name = el.req("kind")?;
    let kind = InputKind::from_name(kind_name)
        .ok_or_else(|| ParseError::Schema { path: el.path.clone(), message: format!("unknown input kind `{kind_name}`") })?;
    let children = el.children()?;
    let default = match children.as_slice() {
        [] => None,
        [c] => Some(expression(c)?),
        _ => return schema(&el.path, "an input has at most one default expression"),
    };
    Ok(InputDecl { name: el.req("name")?.to_string(), kind, default })
}

fn segment(el: &El, index: usize) -> Result<Segment> {
    el.allow(&["name", "repeat"])?;
    let mut seg = Segment::new(el.attr("name").map(str::to_string).unwrap_or_else(|| format!("segment-{}", index + 1)));
    seg.repeat = el.uint("repeat")?.unwrap_or(1);
    for c in el.children()? {
        seg.items.push(match c.name() {
            "Event" => SegmentItem::Event(event(&c)?),
            "GateBlock" => SegmentItem::GateBlock(gate_block(&c)?),
            "Decision" => SegmentItem::Decision(decision(&c)?),
            _ => return c.unexpected(),
        });
    }
    Ok(seg)
}

fn event(el: &El) -> Result<Event> {
    el.allow(&[])?;
    let mut start = None;
    let mut items = Vec::new();
    for c in el.children()? {
        if c.name() == "StartTime" {
            if start.is_some() {
                return schema(&c.path, "an event has exactly one StartTime");
            }
            c.allow(&["stype"])?;
            let mode = match c.attr("stype") {
                None => TimeMode::default(),
                Some(s) => TimeMode::from_name(s)
                    .ok_or_else(|| ParseError::Schema { path: c.path.clone(), message: format!("unknown stype `{s}`") })?,
            };
            start = Some(StartTime { mode, value: single_expression(&c)? });
        } else {
            items.push(event_item(&c)?);
        }
    }
    let start = start.ok_or_else(|| ParseError::Schema { path: el.path.clone(), message: "events must specify a StartTime".into() })?;
    Ok(Event { start, items })
}

fn event_item(el: &El) -> Result<EventItem> {
    Ok(match el.name() {
        "Event" => EventItem::Event(event(el)?),
        "FunctionCall" => {
            el.allow(&["name"])?;
            EventItem::Call(FunctionCall { name: el.req("name")?.to_string(), args: arguments(el)? })
        }
        tag => match ActionKind::from_tag(tag) {
            Some(kind) => EventItem::Action(action(el, kind)?),
            None => return el.unexpected(),
        },
    })
}

fn action(el: &El, kind: ActionKind) -> Result<Action> {
    el.allow(&["channel", "interp_type", "resource", "slot", "resource_input"])?;
    let mut a = Action::new(kind, ChannelName::new(el.req("channel")?));
    a.interp_type = el.attr("interp_type").map(str::to_string);
    a.resource = resource_target(el)?;
    for c in el.children()? {
        match c.name() {
            "Param" => {
                c.allow(&["name"])?;
                a.params.push(Param { name: c.req("name")?.to_string(), value: single_expression(&c)? });
            }
            "Threshold" if a.threshold.is_none() => {
                c.allow(&[])?;
                a.threshold = Some(single_expression(&c)?);
            }
            _ => return c.unexpected(),
        }
    }
    Ok(a)
}

fn resource_target(el: &El) -> Result<Option<ResourceTarget>> {
    match (el.attr("resource"), el.attr("resource_input")) {
        (Some(_), Some(_)) => schema(&el.path, "`resource` and `resource_input` are exclusive"),
        (Some(r), None) => Ok(Some(ResourceTarget::Slot { resource: r.to_string(), slot: el.uint("slot")?.unwrap_or(0) })),
        (None, Some(i)) => {
            if el.attr("slot").is_some() {
                return schema(&el.path, "`slot` requires `resource`");
            }
            Ok(Some(ResourceTarget::Input(i.to_string())))
        }
        (None, None) => {
            if el.attr("slot").is_some() {
                return schema(&el.path, "`slot` requires `resource`");
            }
            Ok(None)
        }
    }
}

fn qubit_ref(el: &El) -> Result<Option<QubitRef>> {
    match (el.uint("qubit")?, el.attr("qubit_input")) {
        (Some(_), Some(_)) => schema(&el.path, "`qubit` and `qubit_input` are exclusive"),
        (Some(i), None) => Ok(Some(QubitRef::Index(i))),
        (None, Some(n)) => Ok(Some(QubitRef::Input(n.to_string()))),
        (None, None) => Ok(None),
    }
}

fn arguments(el: &El) -> Result<Vec<Argument>> {
    el.children()?
        .iter()
        .map(|c| {
            if c.name() != "Argument" {
                return c.unexpected();
            }
            argument(c)
        })
        .collect()
}

fn argument(el: &El) -> Result<Argument> {
    el.allow(&["name", "resource", "slot", "resource_input", "qubit", "qubit_input"])?;
    let name = el.req("name")?.to_string();
    let res = resource_target(el)?;
    let qubit = qubit_ref(el)?;
    let children = el.children()?;
    let value = match (res, qubit, children.as_slice()) {
        (Some(r), None, []) => ArgValue::Resource(r),
        (None, Some(q), []) => ArgValue::Qubit(q),
        (None, None, [c]) => ArgValue::Expr(expression(c)?),
        _ => return schema(&el.path, "an argument carries exactly one of: expression, resource, qubit"),
    };
    Ok(Argument { name, value })
}

fn gate_block(el: &El) -> Result<GateBlock> {
    el.allow(&["schedule"])?;
    let schedule = match el.attr("schedule") {
        None => Schedule::default(),
        Some(s) => Schedule::from_name(s)
            .ok_or_else(|| ParseError::Schema { path: el.path.clone(), message: format!("unknown schedule `{s}`") })?,
    };
    let items = el.children()?.iter().map(gate_item).collect::<Result<_>>()?;
    Ok(GateBlock { schedule, items })
}

fn gate_item(el: &El) -> Result<GateItem> {
    match el.name() {
        "GateBlock" => Ok(GateItem::Block(gate_block(el)?)),
        "GateCall" => {
            el.allow(&["name"])?;
            let mut call = GateCall { name: el.req("name")?.to_string(), qubits: Vec::new(), args: Vec::new() };
            for c in el.children()? {
                match c.name() {
                    "Qubit" => {
                        c.allow(&["port", "qubit", "qubit_input"])?;
                        let qubit = qubit_ref(&c)?.ok_or_else(|| ParseError::Schema {
                            path: c.path.clone(),
                            message: "a qubit binding needs `qubit` or `qubit_input`".into(),
                        })?;
                        call.qubits.push(QubitBinding { port: c.attr("port").map(str::to_string), qubit });
                    }
                    "Argument" => call.args.push(argument(&c)?),
                    _ => return c.unexpected(),
                }
            }
            Ok(GateItem::Gate(call))
        }
        _ => el.unexpected(),
    }
}

fn decision(el: &El) -> Result<Decision> {
    el.allow(&["resource", "slots"])?;
    let slots = match el.attr("slots") {
        None => Vec::new(),
        Some(s) => s
            .split_whitespace()
            .map(|v| v.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .or_else(|_| schema(&el.path, "`slots` must list non-negative integers"))?,
    };
    let mut d = Decision { resource: el.req("resource")?.to_string(), slots, threshold: None, conditions: Vec::new() };
    for c in el.children()? {
        match c.name() {
            "Threshold" if d.threshold.is_none() => {
                c.allow(&[])?;
                d.threshold = Some(single_expression(&c)?);
            }
            "Condition" => {
                c.allow(&["state", "destination_segment"])?;
                d.conditions.push(Condition {
                    state: c.req("state")?.to_string(),
                    destination: c.req("destination_segment")?.to_string(),
                });
            }
            _ => return c.unexpected(),
        }
    }
    Ok(d)
}

fn single_expression(el: &El) -> Result<Expression> {
    match el.children()?.as_slice() {
        [c] => expression(c),
        _ => schema(&el.path, "expected exactly one expression"),
    }
}

pub(super) fn binary_tag(op: BinaryOp) -> &'static str {
    match op {
        BinaryOp::Add => "AdditionOperator",
        BinaryOp::Sub => "SubtractionOperator",
        BinaryOp::Mul => "MultiplicationOperator",
        BinaryOp::Div => "DivisionOperator",
        BinaryOp::Pow => "PowerOperator",
    }
}

pub(super) fn compare_tag(op: CompareOp) -> &'static str {
    match op {
        CompareOp::Eq => "EqualOperator",
        CompareOp::Ne => "NotEqualOperator",
        CompareOp::Lt => "LessThanOperator",
        CompareOp::Le => "LessEqualOperator",
        CompareOp::Gt => "GreaterThanOperator",
        CompareOp::Ge => "GreaterEqualOperator",
    }
}

const BINARY: [BinaryOp; 5] = [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow];
const COMPARE: [CompareOp; 6] = [CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge];

fn expression(el: &El) -> Result<Expression> {
    let name = el.name();
    let operands = |n: Option<usize>| -> Result<Vec<Expression>> {
        el.allow(&[])?;
        let cs = el.children()?;
        match n {
            Some(n) if cs.len() != n => schema(&el.path, format!("`{name}` takes {n} operand(s)")),
            None if cs.is_empty() => schema(&el.path, format!("`{name}` needs at least one operand")),
            _ => cs.iter().map(expression).collect(),
        }
    };
    if let Some(op) = BINARY.into_iter().find(|op| binary_tag(*op) == name) {
        let mut v = operands(Some(2))?;
        let rhs = v.pop().expect("two operands");
        return Ok(Expression::binary(op, v.pop().expect("two operands"), rhs));
    }
    if let Some(op) = COMPARE.into_iter().find(|op| compare_tag(*op) == name) {
        let mut v = operands(Some(2))?;
        let rhs = v.pop().expect("two operands");
        return Ok(Expression::compare(op, v.pop().expect("two operands"), rhs));
    }
    Ok(match name {
        "NumericLiteral" => {
            el.allow(&["units"])?;
            let unit = Unit::parse(el.attr("units").unwrap_or(""))
                .or_else(|e| schema(&el.path, e.to_string()))?;
            let text = el.text()?;
            let value: f64 = text.parse().or_else(|_| schema(&el.path, format!("`{text}` is not a number")))?;
            if !value.is_finite() {
                return schema(&el.path, "literal must be finite");
            }
            Expression::Literal(Literal { value, unit })
        }
        "BooleanLiteral" => {
            el.allow(&[])?;
            match el.text()? {
                "true" => Expression::Bool(true),
                "false" => Expression::Bool(false),
                other => return schema(&el.path, format!("`{other}` is not a boolean")),
            }
        }
        "NamedConstant" => {
            el.allow(&["name", "date"])?;
            let date = match el.attr("date") {
                None => DateSelector::MostRecent,
                Some(d) => DateSelector::parse(d).or_else(|e| schema(&el.path, e.to_string()))?,
            };
            no_children(el)?;
            Expression::Constant { name: el.req("name")?.to_string(), date }
        }
        "NamedCalculation" => {
            el.allow(&["name"])?;
            no_children(el)?;
            Expression::Calculation(el.req("name")?.to_string())
        }
        "InputRef" => {
            el.allow(&["name"])?;
            no_children(el)?;
            Expression::Input(el.req("name")?.to_string())
        }
        "NegationOperator" => Expression::Neg(Box::new(operands(Some(1))?.remove(0))),
        "NotOperator" => Expression::Not(Box::new(operands(Some(1))?.remove(0))),
        "AndOperator" => Expression::And(operands(None)?),
        "OrOperator" => Expression::Or(operands(None)?),
        _ => return el.unexpected(),
    })
}

fn no_children(el: &El) -> Result<()> {
    if el.children()?.is_empty() {
        Ok(())
    } else {
        schema(&el.path, "expected an empty element")
    }
}
