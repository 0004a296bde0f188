// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Parallel against sequential execution of the compiler and the
//! multi-shot simulator.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qcl_core::caldb::{CalibrationStore, Timestamp};
use qcl_core::compiler::{compile, CompileOptions};
use qcl_core::isa::{run_shots, BernoulliSpec, MeasurementPlan, Source};
use qcl_core::lang::parse_xml;
use qcl_core::par::Execution;

const PROGRAMS: [(&str, &str); 2] = [
    ("five_qubit_code", include_str!("../corpus/five_qubit_code.xml")),
    ("ising", include_str!("../corpus/ising.xml")),
];

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn compile_bench(c: &mut Criterion) {
    let snapshot = CalibrationStore::seed().snapshot(Timestamp::parse("2026-01-01-00-00").unwrap());
    let mut group = c.benchmark_group("compile");
    for (name, text) in PROGRAMS {
        let ast = parse_xml(text).unwrap();
        for (mode, execution) in MODES {
            let options = CompileOptions { execution, ..CompileOptions::default() };
            group.bench_with_input(BenchmarkId::new(mode, name), &ast, |b, ast| {
                b.iter(|| compile(black_box(ast), &snapshot, &options).unwrap())
            });
        }
    }
    group.finish();
}

fn shots_bench(c: &mut Criterion) {
    let snapshot = CalibrationStore::seed().snapshot(Timestamp::parse("2026-01-01-00-00").unwrap());
    let ast = parse_xml(PROGRAMS[0].1).unwrap();
    let program = compile(&ast, &snapshot, &CompileOptions::default()).unwrap().program;
    let plan = MeasurementPlan { seed: 1, default: Some(Source::Bernoulli { bernoulli: BernoulliSpec { p: 0.2 } }), ..Default::default() };
    let mut group = c.benchmark_group("run_shots");
    for (mode, execution) in MODES {
        group.bench_function(BenchmarkId::new(mode, 256), |b| {
            b.iter(|| run_shots(black_box(&program), &plan, u64::MAX, 256, execution).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, compile_bench, shots_bench);
criterion_main!(benches);
