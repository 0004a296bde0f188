// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for the integration tests: corpus loading, a reference
//! interpreter for timing-layer programs, and a random program generator.

#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use qcl_core::caldb::{CalibrationSnapshot, CalibrationStore, Timestamp};
use qcl_core::compiler::{compile, Compilation, CompileOptions};
use qcl_core::isa::{CompiledProgram, EngineStream, MeasurementPlan, Opcode, RunResult, Source, TraceKind, Payload};
use qcl_core::lang::{parse_xml, ExperimentAst};
use qcl_core::par::Execution;

pub const FIVE_QUBIT: &str = "five_qubit_code.xml";
pub const ISING: &str = "ising.xml";
pub const CORPUS: [&str; 2] = [FIVE_QUBIT, ISING];

pub fn corpus_path(name: &str) -> String {
    format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus(name: &str) -> ExperimentAst {
    parse_xml(&corpus_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The seeded store frozen after its last record.
pub fn snapshot() -> CalibrationSnapshot {
    CalibrationStore::seed().snapshot(Timestamp::parse("2026-01-01-00-00").unwrap())
}

pub fn options(exec: Execution) -> CompileOptions {
    CompileOptions { execution: exec, ..CompileOptions::default() }
}

pub fn compile_corpus(name: &str) -> Compilation {
    compile(&corpus(name), &snapshot(), &CompileOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Plan for the five-qubit program: every flag reads 0 except the one
/// measured in `flag_round`, which reads 1.
pub fn flag_plan(flag_round: Option<usize>) -> MeasurementPlan {
    let mut plan = MeasurementPlan::constant(false);
    for round in 0..4 {
        let bit = u8::from(flag_round == Some(round));
        plan = plan.with_slot(format!("syndromes[{}]", 2 * round + 1), Source::Bits { bits: vec![bit], cyclic: false });
    }
    plan
}

/// Segment path the five-qubit program must take for a flag scenario.
pub fn expected_path(program: &CompiledProgram, flag_round: Option<usize>) -> Vec<usize> {
    let idx = |n: &str| program.segment_index(n).unwrap_or_else(|| panic!("no segment {n}"));
    match flag_round {
        None => (0..4).map(|i| idx(&format!("FT-SMC-{i}"))).chain([idx("Correction")]).collect(),
        Some(k) => (0..=k).map(|i| idx(&format!("FT-SMC-{i}"))).chain([idx("NFT-SMC"), idx("Correction")]).collect(),
    }
}

/// One engine write: (tick, engine name, code).
pub type Write = (u64, String, u32);

/// Value-set events of a run, named by engine, sorted.
pub fn vm_writes(program: &CompiledProgram, result: &RunResult) -> Vec<Write> {
    let mut out: Vec<Write> = result
        .events(TraceKind::ValueSet)
        .map(|e| match e.payload {
            Payload::ValueSet { code, .. } => (e.tick, program.engines[e.engine as usize].name.clone(), code),
            _ => unreachable!("value-set payload"),
        })
        .collect();
    out.sort();
    out
}

/// Replays one engine's control flow along `visited` and returns the tick of
/// every SETVALUE as the running sum of the embedded delays.
pub fn prefix_sum_ticks(stream: &EngineStream, visited: &[usize]) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut clock = 0u64;
    let mut pc = 0usize;
    let mut counter = 0u32;
    let mut next_segment = visited.iter().skip(1);
    let halt = stream.halt_index() as usize;
    for _ in 0..10_000_000 {
        let op = stream.words[pc];
        clock += op.delay() as u64;
        pc = match op {
            Opcode::Nop { .. } if pc == halt => return out,
            Opcode::Nop { .. } => pc + 1,
            Opcode::SetValue { value, .. } => {
                out.push((clock, value));
                pc + 1
            }
            Opcode::SetLoop { count, .. } => {
                counter = count;
                pc + 1
            }
            Opcode::DecLoop { .. } => {
                counter = counter.saturating_sub(1);
                pc + 1
            }
            Opcode::Jnz { target, .. } if counter != 0 => target as usize,
            Opcode::Jz { target, .. } if counter == 0 => target as usize,
            Opcode::Jnz { .. } | Opcode::Jz { .. } => pc + 1,
            Opcode::Goto { target, .. } => {
                next_segment.next();
                target as usize
            }
            Opcode::BranchLut { .. } => match next_segment.next() {
                Some(&s) => stream.segment_offsets[s] as usize,
                None => return out,
            },
        };
    }
    panic!("replay of {} did not halt", stream.name);
}

/// A legal opcode with every field drawn uniformly from its range.
pub fn random_opcode(rng: &mut impl rand::Rng) -> Opcode {
    use qcl_core::isa::{MAX_DELAY, MAX_OPERAND};
    let delay = rng.random_range(0..=MAX_DELAY);
    let operand = rng.random_range(0..=MAX_OPERAND);
    match rng.random_range(0..8) {
        0 => Opcode::Nop { delay },
        1 => Opcode::SetValue { delay, value: operand },
        2 => Opcode::SetLoop { delay, count: operand },
        3 => Opcode::Jnz { delay, target: operand },
        4 => Opcode::Jz { delay, target: operand },
        5 => Opcode::DecLoop { delay },
        6 => Opcode::Goto { delay, target: operand },
        _ => Opcode::BranchLut { delay, resource: rng.random(), table: rng.random() },
    }
}

/// One engine running the canonical counted loop around a single
/// SETVALUE that lasts one tick:
///
/// ```text
/// 0 SETLOOP n
/// 1 JZ 5
/// 2 SETVALUE 1   (delay 1)
/// 3 DECLOOP
/// 4 JNZ 2
/// 5 NOP
/// ```
pub fn loop_program(n: u32) -> CompiledProgram {
    use qcl_core::caldb::ChannelKind;
    let words = vec![
        Opcode::SetLoop { delay: 0, count: n },
        Opcode::Jz { delay: 0, target: 5 },
        Opcode::SetValue { delay: 1, value: 1 },
        Opcode::DecLoop { delay: 0 },
        Opcode::Jnz { delay: 0, target: 2 },
        Opcode::Nop { delay: 0 },
    ];
    let stream = EngineStream {
        name: "channels.ttl.shutter0.level".into(),
        kind: ChannelKind::Ttl,
        min: 0.0,
        lsb: 1.0,
        segment_offsets: vec![0],
        words,
    };
    CompiledProgram { segments: vec!["loop".into()], engines: vec![stream], ..Default::default() }
}
