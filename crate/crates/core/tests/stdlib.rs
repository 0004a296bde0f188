// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use common::*;
use qcl_core::lang::*;
use qcl_core::stdlib::{builtin, file_name, StandardLibrary, StdlibError};
use qcl_core::symbolics::{evaluate_quantity, Dims, Expression};

fn time_arg(name: &str, value: f64, unit: &str) -> Argument {
    Argument { name: name.into(), value: ArgValue::Expr(Expression::literal(value, unit)) }
}

/// Start offsets of the top-level events of a resolved function body.
fn offsets(items: &[EventItem]) -> Vec<f64> {
    items
        .iter()
        .map(|i| match i {
            EventItem::Event(e) => evaluate_quantity(&e.start.value, &snapshot()).unwrap().si(),
            other => panic!("expected an event, got {other:?}"),
        })
        .collect()
}

#[test]
fn cnot_resolves_on_two_qubits() {
    let g = builtin().resolve_gate_on("CNOT", &[0, 1]).unwrap();
    let GateBody::Composite(items) = &g.body else { panic!("CNOT is composite") };
    let mut calls = Vec::new();
    for_each_gate(items, &mut |c| calls.push(c.name.clone()));
    assert_eq!(calls, ["YPi/2", "XX", "XmPi/2", "XmPi/2", "YmPi/2"]);
    // Port bindings are resolved to concrete qubits.
    let mut qubits = Vec::new();
    for_each_gate(items, &mut |c| qubits.extend(c.qubits.iter().map(|q| q.qubit.clone())));
    assert!(qubits.iter().all(|q| matches!(q, QubitRef::Index(0 | 1))), "{qubits:?}");
}

#[test]
fn cnot_arity_is_checked() {
    match builtin().resolve_gate_on("CNOT", &[0]) {
        Err(StdlibError::ArityMismatch { expected: 2, got: 1, .. }) => {}
        other => panic!("{other:?}"),
    }
    assert!(matches!(builtin().resolve_gate_on("NoSuchGate", &[0]), Err(StdlibError::UnknownGate(_))));
}

#[test]
fn half_pi_rotation_lasts_the_half_pi_time() {
    let g = builtin().resolve_gate_on("XPi/2", &[0]).unwrap();
    let d = g.duration(builtin(), &snapshot()).unwrap();
    assert_eq!(d.dims(), Dims::TIME);
    // pi/2 divided by a 1 MHz Rabi rate, quantized to the half-nanosecond tick.
    assert!((d.si() - 1.5708e-6).abs() < 1e-9, "{d}");
}

#[test]
fn doppler_cooling_spans_its_duration() {
    let body = builtin().resolve_function("DopplerCooling", &[time_arg("duration", 3.0, "ms")]).unwrap();
    assert_eq!(offsets(&body), [0.0, 3e-3]);
}

#[test]
fn global_readout_gates_the_counter() {
    let args = vec![
        time_arg("duration", 0.5, "ms"),
        Argument { name: "resource".into(), value: ArgValue::Resource(ResourceTarget::Slot { resource: "r0".into(), slot: 0 }) },
    ];
    let body = builtin().resolve_function("GlobalReadout", &args).unwrap();
    assert_eq!(offsets(&body), [0.0, 5e-4]);
    let mut counter = Vec::new();
    for_each_action(&body, &mut |a| {
        if matches!(a.kind, ActionKind::CounterStart | ActionKind::CounterStop) {
            counter.push((a.kind, a.resource.clone()));
        }
    });
    assert_eq!(
        counter,
        [(ActionKind::CounterStart, None), (ActionKind::CounterStop, Some(ResourceTarget::Slot { resource: "r0".into(), slot: 0 }))]
    );
}

#[test]
fn function_arguments_are_checked() {
    assert!(matches!(builtin().resolve_function("DopplerCooling", &[]), Err(StdlibError::MissingArgument { .. })));
    assert!(matches!(
        builtin().resolve_function("DopplerCooling", &[time_arg("duration", 1.0, "MHz")]),
        Err(StdlibError::DimensionError { .. })
    ));
    assert!(matches!(
        builtin().resolve_function("DopplerCooling", &[time_arg("duration", 1.0, "ms"), time_arg("speed", 1.0, "ms")]),
        Err(StdlibError::UnknownArgument { .. })
    ));
}

fn gate_program(name: &str, qubits: &[u32]) -> ExperimentAst {
    let call = GateCall {
        name: name.into(),
        qubits: qubits.iter().map(|&q| QubitBinding { port: None, qubit: QubitRef::Index(q) }).collect(),
        args: Vec::new(),
    };
    let mut seg = Segment::new("s");
    seg.items.push(SegmentItem::GateBlock(GateBlock { schedule: Schedule::Parallel, items: vec![GateItem::Gate(call)] }));
    ExperimentAst { program: Program { segments: vec![seg] }, ..Default::default() }
}

fn header_names(ast: &ExperimentAst) -> Vec<String> {
    let (headers, defs) = builtin().required_headers(ast).unwrap();
    assert_eq!(headers.len(), defs.len() + ast.definitions.len());
    let mut names: Vec<String> = headers.into_iter().map(|h| h.name).collect();
    names.sort();
    names
}

#[test]
fn required_headers_close_over_dependencies() {
    let names = header_names(&gate_program("CNOT", &[0, 1]));
    for n in ["CNOT", "XX", "YPi/2", "XmPi/2", "YmPi/2", "DefaultMicrowavePiOver2Time"] {
        assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
    }
    assert!(header_names(&ExperimentAst::default()).is_empty());
    let ising = header_names(&corpus(ISING));
    for n in ["DopplerCooling", "OpticalPumping", "SidebandCooling", "GlobalReadout", "XPi/2"] {
        assert!(ising.iter().any(|x| x == n), "{n} missing from {ising:?}");
    }
}

#[test]
fn included_program_is_self_contained() {
    for name in CORPUS {
        let full = builtin().include_headers(&corpus(name)).unwrap();
        assert_eq!(lint_with(&full, &NoLibrary), Vec::new(), "{name}");
        // Including twice adds nothing.
        assert_eq!(builtin().include_headers(&full).unwrap(), full, "{name}");
    }
}

#[test]
fn index_matches_files() {
    let index = builtin().index();
    assert_eq!(index.len(), builtin().len());
    let dir = format!("{}/stdlib", env!("CARGO_MANIFEST_DIR"));
    for e in &index {
        assert_eq!(e.file, file_name(&e.name));
        assert!(std::path::Path::new(&dir).join(&e.file).exists(), "{}", e.file);
    }
    assert_eq!(file_name("XPi/2"), "XPi_2.xml");
}

#[test]
fn overrides_replace_builtin_definitions() {
    let dir = tempfile::tempdir().unwrap();
    let def = Definition::Calculation(CalculationDef { name: "DefaultMicrowavePiTime".into(), expr: Expression::literal(2.0, "us") });
    std::fs::write(dir.path().join(file_name(def.name())), serialize_definition(&def)).unwrap();
    let lib = StandardLibrary::with_overrides(dir.path()).unwrap();
    assert_eq!(lib.get("DefaultMicrowavePiTime"), Some(&def));
    assert_eq!(lib.len(), builtin().len());
}
