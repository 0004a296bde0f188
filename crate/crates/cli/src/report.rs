// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! The outcome of one command, in a form that renders identically as text
//! and as JSON.

use std::fmt;

use serde::Serialize;

use qcl_core::lang::{Diagnostic, Severity};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// The input program failed to parse or lint.
    pub const LINT: u8 = 1;
    /// A compiler pass, the simulator, the database, or I/O failed, or the
    /// command line was invalid.
    pub const FAILURE: u8 = 2;
    /// An internal consistency check failed.
    pub const INTERNAL: u8 = 3;
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDiagnostic {
    pub severity: &'static str,
    pub code: String,
    pub path: String,
    pub message: String,
}

impl From<&Diagnostic> for ReportDiagnostic {
    fn from(d: &Diagnostic) -> Self {
        let severity = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        ReportDiagnostic { severity, code: d.code.to_string(), path: d.path.clone(), message: d.message.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ShotSummary {
    pub shot: u64,
    pub total_ticks: u64,
    pub segments_visited: Vec<String>,
    pub measurements: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    /// Instructions per engine, in engine order.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub instruction_counts: Vec<(String, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub shots: Vec<ShotSummary>,
    /// Free-form result lines, such as database records.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub diagnostics: Vec<ReportDiagnostic>,
    pub artifacts: Vec<String>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport { command: command.into(), status: exit::OK, error: None, diagnostics: Vec::new(), artifacts: Vec::new(), summary: Summary::default() }
    }

    pub fn fail(&mut self, status: u8, error: impl fmt::Display) {
        self.status = status;
        self.error = Some(error.to_string());
    }

    pub fn diagnose(&mut self, diags: &[Diagnostic]) {
        self.diagnostics.extend(diags.iter().map(ReportDiagnostic::from));
    }

    pub fn artifact(&mut self, path: impl AsRef<std::path::Path>) {
        self.artifacts.push(path.as_ref().display().to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.summary.lines {
            writeln!(f, "{line}")?;
        }
        for d in &self.diagnostics {
            writeln!(f, "{}[{}] {}: {}", d.severity, d.code, d.path, d.message)?;
        }
        for (engine, n) in &self.summary.instruction_counts {
            writeln!(f, "engine {engine}: {n} instructions")?;
        }
        for s in &self.summary.shots {
            writeln!(f, "shot {}: {} ticks, {} measurements, segments {}", s.shot, s.total_ticks, s.measurements, s.segments_visited.join(" -> "))?;
        }
        for a in &self.artifacts {
            writeln!(f, "wrote {a}")?;
        }
        if let Some(e) = &self.error {
            writeln!(f, "error: {e}")?;
        }
        write!(f, "{}: exit {}", self.command, self.status)
    }
}
