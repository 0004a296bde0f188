// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Language model: typed AST, XML wire form, and linting.

pub mod ast;
pub mod channel;
pub mod lint;
mod parse;
mod write;

pub use ast::*;
pub use channel::ChannelName;
pub use lint::{has_errors, lint, lint_references, lint_with, Diagnostic, Library, NoLibrary, Severity};
pub use parse::{parse_definition, parse_expression, parse_unchecked, parse_xml, ParseError};
pub use write::{serialize_definition, serialize_expression, serialize_xml};

/// Namespace URI bound to the `qi` prefix.
pub const QI_NS: &str = "https://iqc.uwaterloo.ca/quantumion";
