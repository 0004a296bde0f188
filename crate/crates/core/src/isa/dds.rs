// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Parameter-level model of a DDS core's linear interpolator.

use crate::caldb::registry::ParamSpec;

use super::container::CompiledProgram;
use super::vm::RunResult;

/// Sampled interpolator output.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// `samples[n]` is the output `n` sample periods after loading.
    pub samples: Vec<f64>,
    /// Indices where the ramp left the channel range and was clamped.
    pub clamped: Vec<usize>,
}

impl Waveform {
    pub fn last(&self) -> Option<f64> {
        self.samples.last().copied()
    }
}

/// Samples of `p0 + p1 * n` for `n` in `0..=samples`, clamped to `range`.
pub fn dds_waveform(p0: f64, p1: f64, samples: usize, range: (f64, f64)) -> Waveform {
    let mut clamped = Vec::new();
    let samples = (0..=samples)
        .map(|n| {
            let v = p0 + p1 * n as f64;
            let c = v.clamp(range.0, range.1);
            if c != v {
                clamped.push(n);
            }
            c
        })
        .collect();
    Waveform { samples, clamped }
}

/// Sample periods in a window, rounded to the nearest whole sample.
pub fn sample_count(window_seconds: f64, clock_hz: f64) -> usize {
    (window_seconds * clock_hz).round().max(0.0) as usize
}

/// Output range of an amplitude-like parameter.
pub fn range_of(spec: &ParamSpec) -> (f64, f64) {
    (spec.min, spec.decode((1 << crate::caldb::registry::VALUE_BITS) - 1))
}

/// Interpolator settings of one DDS channel at the end of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interpolator {
    pub p0: f64,
    pub p1: f64,
}

impl Interpolator {
    /// Reads `<channel>.interp_p0` and `<channel>.interp_p1` from the final
    /// engine values; unset parameters read as zero.
    pub fn from_run(program: &CompiledProgram, result: &RunResult, channel: &str) -> Interpolator {
        let read = |param: &str| {
            program
                .engine(&format!("{channel}.{param}"))
                .and_then(|(i, e)| result.final_values.get(i).copied().flatten().map(|code| e.decode_value(code)))
                .unwrap_or(0.0)
        };
        Interpolator { p0: read("interp_p0"), p1: read("interp_p1") }
    }

    pub fn waveform(&self, samples: usize, range: (f64, f64)) -> Waveform {
        dds_waveform(self.p0, self.p1, samples, range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::caldb::registry::AMPLITUDE;

    #[test]
    fn linear_ramp_reaches_target() {
        let n = sample_count(10e-6, 250e6);
        assert_eq!(n, 2500);
        let w = dds_waveform(0.3, -0.05 / n as f64, n, range_of(&AMPLITUDE));
        assert!((w.last().unwrap() - 0.25).abs() < 1e-12);
        assert!((w.samples[n / 2] - 0.275).abs() < 0.05 / n as f64);
        assert!(w.clamped.is_empty());
    }

    #[test]
    fn flat_and_clamped() {
        let w = dds_waveform(0.2, 0.0, 10, (0.0, 1.0));
        assert!(w.samples.iter().all(|&v| v == 0.2));
        let w = dds_waveform(0.01, -0.01, 3, (0.0, 1.0));
        assert_eq!(w.samples, [0.01, 0.0, 0.0, 0.0]);
        assert_eq!(w.clamped, [2, 3]);
    }
}
