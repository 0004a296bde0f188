// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Execution-engine instruction set, compiled container, and simulator.

pub mod container;
pub mod dds;
pub mod opcode;
pub mod plan;
pub mod trace;
pub mod vm;

pub use container::{CompiledProgram, ContainerError, DecisionTable, EngineStream, MeasurementBinding, ResourceInfo, HALT};
pub use dds::{dds_waveform, Interpolator, Waveform};
pub use opcode::{decode_stream, encode_stream, IsaError, Mnemonic, Opcode, MAX_DELAY, MAX_OPERAND};
pub use plan::{BernoulliSpec, MeasurementPlan, Outcome, PlanError, PoissonSpec, Source};
pub use trace::{Payload, TraceEvent, TraceKind};
pub use vm::{run, run_shot, run_shots, RunResult, VmError};
