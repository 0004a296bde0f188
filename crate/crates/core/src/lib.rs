// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Toolchain for an XML quantum control language: symbolic expressions with
//! units, a versioned calibration store, the language model, a standard
//! library, a six-pass lowering compiler, and a simulator for the per-channel
//! opcode engines it targets.

// Compile errors carry diagnostics and paths; they are off the hot path.
#![allow(clippy::result_large_err)]

pub mod caldb;
pub mod compiler;
pub mod isa;
pub mod lang;
pub mod par;
pub mod stdlib;
pub mod symbolics;
