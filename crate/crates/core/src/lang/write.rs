// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Canonical XML writer: two-space indent, attributes sorted by name, every
//! element in the `qi` namespace.

use crate::symbolics::{DateSelector, Expression};

use super::ast::*;
use super::parse::{binary_tag, compare_tag};
use super::QI_NS;

struct Node {
    tag: &'static str,
    attrs: Vec<(&'static str, String)>,
    text: Option<String>,
    children: Vec<Node>,
}

impl Node {
    fn new(tag: &'static str) -> Node {
        Node { tag, attrs: Vec::new(), text: None, children: Vec::new() }
    }

    fn attr(mut self, name: &'static str, value: impl ToString) -> Node {
        self.attrs.push((name, value.to_string()));
        self
    }

    fn opt_attr(self, name: &'static str, value: Option<impl ToString>) -> Node {
        match value {
            Some(v) => self.attr(name, v),
            None => self,
        }
    }

    fn text(mut self, text: String) -> Node {
        self.text = Some(text);
        self
    }

    fn child(mut self, c: Node) -> Node {
        self.children.push(c);
        self
    }

    fn children(mut self, cs: impl IntoIterator<Item = Node>) -> Node {
        self.children.extend(cs);
        self
    }

    fn render(&self, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        out.push_str(&indent);
        out.push_str("<qi:");
        out.push_str(self.tag);
        let mut attrs: Vec<_> = self.attrs.iter().collect();
        attrs.sort_by_key(|(k, _)| *k);
        for (k, v) in attrs {
            out.push_str(&format!(" {k}=\"{}\"", escape(v, true)));
        }
        match (&self.text, self.children.is_empty()) {
            (Some(t), _) => {
                out.push_str(&format!(">{}</qi:{}>\n", escape(t, false), self.tag));
            }
            (None, true) => out.push_str("/>\n"),
            (None, false) => {
                out.push_str(">\n");
                for c in &self.children {
                    c.render(depth + 1, out);
                }
                out.push_str(&format!("{indent}</qi:{}>\n", self.tag));
            }
        }
    }
}

fn escape(s: &str, attr: bool) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attr => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn document(mut root: Node) -> String {
    root.attrs.push(("xmlns:qi", QI_NS.to_string()));
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    root.render(0, &mut out);
    out
}

pub fn serialize_xml(ast: &ExperimentAst) -> String {
    document(experiment(ast))
}

pub fn serialize_definition(def: &Definition) -> String {
    document(definition(def))
}

pub fn serialize_expression(expr: &Expression) -> String {
    document(expression(expr))
}

fn experiment(ast: &ExperimentAst) -> Node {
    let mut root = Node::new("Experiment");
    if !ast.resources.is_empty() {
        root = root.child(Node::new("Resources").children(ast.resources.iter().map(|r| {
            Node::new("Resource").attr("name", &r.name).attr("kind", r.kind.name()).attr("length", r.length)
        })));
    }
    if !ast.initial_setup.is_empty() {
        let s = &ast.initial_setup;
        root = root.child(
            Node::new("InitialSetup")
                .opt_attr("use_predefined", s.use_predefined.as_ref())
                .children(s.settings.iter().map(|st| Node::new("Setting").attr("name", &st.name).child(expression(&st.value)))),
        );
    }
    if !ast.headers.is_empty() {
        root = root.child(
            Node::new("Headers")
                .children(ast.headers.iter().map(|h| Node::new("Header").attr("kind", h.kind.name()).attr("name", &h.name))),
        );
    }
    if !ast.definitions.is_empty() {
        root = root.child(Node::new("Definitions").children(ast.definitions.iter().map(definition)));
    }
    root.child(Node::new("Program").children(ast.program.segments.iter().map(segment)))
}

fn definition(def: &Definition) -> Node {
    match def {
        Definition::Gate(g) => {
            let mut n = Node::new("GateDefinition").attr("name", &g.name);
            if !g.ports.is_empty() {
                n = n.attr("ports", g.ports.join(" "));
            }
            n = n.children(g.inputs.iter().map(input_decl));
            match &g.body {
                GateBody::Composite(items) => n.attr("layer", "composite").children(items.iter().map(gate_item)),
                GateBody::Native(items) => n.children(items.iter().map(event_item)),
            }
        }
        Definition::Function(f) => Node::new("FunctionDefinition")
            .attr("name", &f.name)
            .children(f.inputs.iter().map(input_decl))
            .children(f.body.iter().map(event_item)),
        Definition::Calculation(c) => Node::new("CalculationDefinition").attr("name", &c.name).child(expression(&c.expr)),
    }
}

fn input_decl(i: &InputDecl) -> Node {
    Node::new("Input")
        .attr("name", &i.name)
        .attr("kind", i.kind.name())
        .children(i.default.as_ref().map(expression))
}

fn segment(s: &Segment) -> Node {
    let mut n = Node::new("Segment").attr("name", &s.name);
    if s.repeat != 1 {
        n = n.attr("repeat", s.repeat);
    }
    n.children(s.items.iter().map(|item| match item {
        SegmentItem::Event(e) => event(e),
        SegmentItem::GateBlock(b) => gate_block(b),
        SegmentItem::Decision(d) => decision(d),
    }))
}

fn event(e: &Event) -> Node {
    Node::new("Event")
        .child(Node::new("StartTime").attr("stype", e.start.mode.name()).child(expression(&e.start.value)))
        .children(e.items.iter().map(event_item))
}

fn event_item(item: &EventItem) -> Node {
    match item {
        EventItem::Event(e) => event(e),
        EventItem::Call(c) => Node::new("FunctionCall").attr("name", &c.name).children(c.args.iter().map(argument)),
        EventItem::Action(a) => action(a),
    }
}

fn with_resource(n: Node, r: Option<&ResourceTarget>) -> Node {
    match r {
        None => n,
        Some(ResourceTarget::Slot { resource, slot }) => n.attr("resource", resource).attr("slot", slot),
        Some(ResourceTarget::Input(name)) => n.attr("resource_input", name),
    }
}

fn with_qubit(n: Node, q: &QubitRef) -> Node {
    match q {
        QubitRef::Index(i) => n.attr("qubit", i),
        QubitRef::Input(name) => n.attr("qubit_input", name),
    }
}

fn action(a: &Action) -> Node {
    let n = Node::new(a.kind.tag()).attr("channel", &a.channel).opt_attr("interp_type", a.interp_type.as_ref());
    with_resource(n, a.resource.as_ref())
        .children(a.params.iter().map(|p| Node::new("Param").attr("name", &p.name).child(expression(&p.value))))
        .children(a.threshold.as_ref().map(|t| Node::new("Threshold").child(expression(t))))
}

fn argument(arg: &Argument) -> Node {
    let n = Node::new("Argument").attr("name", &arg.name);
    match &arg.value {
        ArgValue::Expr(e) => n.child(expression(e)),
        ArgValue::Resource(r) => with_resource(n, Some(r)),
        ArgValue::Qubit(q) => with_qubit(n, q),
    }
}

fn gate_block(b: &GateBlock) -> Node {
    let mut n = Node::new("GateBlock");
    if b.schedule != Schedule::default() {
        n = n.attr("schedule", b.schedule.name());
    }
    n.children(b.items.iter().map(gate_item))
}

fn gate_item(item: &GateItem) -> Node {
    match item {
        GateItem::Block(b) => gate_block(b),
        GateItem::Gate(g) => Node::new("GateCall")
            .attr("name", &g.name)
            .children(g.qubits.iter().map(|q| with_qubit(Node::new("Qubit").opt_attr("port", q.port.as_ref()), &q.qubit)))
            .children(g.args.iter().map(argument)),
    }
}

fn decision(d: &Decision) -> Node {
    let mut n = Node::new("Decision").attr("resource", &d.resource);
    if !d.slots.is_empty() {
        n = n.attr("slots", d.slots.iter().map(u32::to_string).collect::<Vec<_>>().join(" "));
    }
    n.children(d.threshold.as_ref().map(|t| Node::new("Threshold").child(expression(t))))
        .children(d.conditions.iter().map(|c| {
            Node::new("Condition").attr("state", &c.state).attr("destination_segment", &c.destination)
        }))
}

fn expression(e: &Expression) -> Node {
    match e {
        Expression::Literal(l) => {
            let n = Node::new("NumericLiteral");
            let n = if l.unit.symbol().is_empty() { n } else { n.attr("units", l.unit.symbol()) };
            n.text(format!("{}", l.value))
        }
        Expression::Bool(b) => Node::new("BooleanLiteral").text(b.to_string()),
        Expression::Constant { name, date } => {
            let n = Node::new("NamedConstant").attr("name", name);
            match date {
                DateSelector::MostRecent => n,
                d => n.attr("date", d),
            }
        }
        Expression::Calculation(name) => Node::new("NamedCalculation").attr("name", name),
        Expression::Input(name) => Node::new("InputRef").attr("name", name),
        Expression::Neg(c) => Node::new("NegationOperator").child(expression(c)),
        Expression::Not(c) => Node::new("NotOperator").child(expression(c)),
        Expression::Binary { op, lhs, rhs } => Node::new(binary_tag(*op)).child(expression(lhs)).child(expression(rhs)),
        Expression::Compare { op, lhs, rhs } => Node::new(compare_tag(*op)).child(expression(lhs)).child(expression(rhs)),
        Expression::And(cs) => Node::new("AndOperator").children(cs.iter().map(expression)),
        Expression::Or(cs) => Node::new("OrOperator").children(cs.iter().map(expression)),
    }
}
