// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Measurement plans: where the simulator gets photon counts from.
//!
//! ```json
//! {
//!   "latency_ticks": 0,
//!   "seed": 7,
//!   "default": {"bits": [0], "cyclic": true},
//!   "slots": {
//!     "results[3]": {"counts": [0, 12], "cyclic": false},
//!     "results[4]": {"poisson": {"mean": 6.5}},
//!     "results[5]": {"bernoulli": {"p": 0.1}}
//!   }
//! }
//! ```
//!
//! Slots are keyed `resource[slot]`. Scripted sources yield one entry per
//! measurement and then fail unless cyclic; random sources draw from a
//! ChaCha stream derived from the seed and the slot key.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Poisson};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonSpec {
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliSpec {
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source {
    Counts {
        counts: Vec<u32>,
        #[serde(default)]
        cyclic: bool,
    },
    /// Already thresholded outcomes; the threshold is not applied.
    Bits {
        bits: Vec<u8>,
        #[serde(default)]
        cyclic: bool,
    },
    Poisson {
        poisson: PoissonSpec,
    },
    Bernoulli {
        bernoulli: BernoulliSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementPlan {
    /// Ticks between the end of a measurement window and the result being
    /// visible to BRANCHLUT.
    #[serde(default)]
    pub latency_ticks: u64,
    #[serde(default)]
    pub seed: u64,
    /// Used for slots not listed in `slots`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Source>,
    #[serde(default)]
    pub slots: BTreeMap<String, Source>,
}

/// One draw: a raw count, or a bit that bypasses thresholding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Count(u32),
    Bit(bool),
}

impl Outcome {
    pub fn bit(self, threshold: u32) -> bool {
        match self {
            Outcome::Count(c) => c >= threshold,
            Outcome::Bit(b) => b,
        }
    }

    pub fn count(self) -> Option<u32> {
        match self {
            Outcome::Count(c) => Some(c),
            Outcome::Bit(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("measurement plan has no outcomes left for `{0}`")]
    Exhausted(String),
    #[error("measurement plan entry `{slot}`: {message}")]
    Invalid { slot: String, message: String },
    #[error("measurement plan: {0}")]
    Parse(String),
}

impl MeasurementPlan {
    pub fn from_json(text: &str) -> Result<Self, PlanError> {
        let plan: MeasurementPlan = serde_json::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
        plan.check()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Every measurement reads `bit`.
    pub fn constant(bit: bool) -> Self {
        MeasurementPlan { default: Some(Source::Bits { bits: vec![bit as u8], cyclic: true }), ..Default::default() }
    }

    pub fn with_slot(mut self, key: impl Into<String>, source: Source) -> Self {
        self.slots.insert(key.into(), source);
        self
    }

    fn check(&self) -> Result<(), PlanError> {
        let entries = self.slots.iter().map(|(k, s)| (k.as_str(), s)).chain(self.default.iter().map(|s| ("default", s)));
        for (slot, s) in entries {
            let bad = |message: &str| Err(PlanError::Invalid { slot: slot.to_string(), message: message.into() });
            match s {
                Source::Poisson { poisson } if !(poisson.mean.is_finite() && poisson.mean > 0.0) => return bad("poisson mean must be positive"),
                Source::Bernoulli { bernoulli } if !(0.0..=1.0).contains(&bernoulli.p) => return bad("bernoulli p must lie in [0, 1]"),
                Source::Bits { bits, .. } if bits.iter().any(|&b| b > 1) => return bad("bits must be 0 or 1"),
                Source::Counts { counts, cyclic: true } if counts.is_empty() => return bad("a cyclic script cannot be empty"),
                Source::Bits { bits, cyclic: true } if bits.is_empty() => return bad("a cyclic script cannot be empty"),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn source(&self, key: &str) -> Option<&Source> {
        self.slots.get(key).or(self.default.as_ref())
    }

    /// Fresh draw state for one shot.
    pub fn start(&self, shot: u64) -> PlanState<'_> {
        PlanState { plan: self, shot, cursors: BTreeMap::new() }
    }
}

fn fnv1a(key: &str) -> u64 {
    key.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

struct Cursor {
    next: usize,
    rng: ChaCha8Rng,
}

pub struct PlanState<'a> {
    plan: &'a MeasurementPlan,
    shot: u64,
    cursors: BTreeMap<String, Cursor>,
}

impl PlanState<'_> {
    pub fn draw(&mut self, key: &str) -> Result<Outcome, PlanError> {
        let source = self.plan.source(key).ok_or_else(|| PlanError::Exhausted(key.to_string()))?;
        let (seed, shot) = (self.plan.seed, self.shot);
        let cursor = self.cursors.entry(key.to_string()).or_insert_with(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(key));
            rng.set_stream(shot);
            Cursor { next: 0, rng }
        });
        let scripted = |len: usize, cyclic: bool, next: &mut usize| -> Result<usize, PlanError> {
            if *next >= len && !cyclic || len == 0 {
                return Err(PlanError::Exhausted(key.to_string()));
            }
            let i = *next % len;
            *next += 1;
            Ok(i)
        };
        Ok(match source {
            Source::Counts { counts, cyclic } => Outcome::Count(counts[scripted(counts.len(), *cyclic, &mut cursor.next)?]),
            Source::Bits { bits, cyclic } => Outcome::Bit(bits[scripted(bits.len(), *cyclic, &mut cursor.next)?] != 0),
            Source::Poisson { poisson } => {
                let d = Poisson::new(poisson.mean).map_err(|e| PlanError::Invalid { slot: key.into(), message: e.to_string() })?;
                Outcome::Count(d.sample(&mut cursor.rng).min(u32::MAX as f64) as u32)
            }
            Source::Bernoulli { bernoulli } => {
                let d = Bernoulli::new(bernoulli.p).map_err(|e| PlanError::Invalid { slot: key.into(), message: e.to_string() })?;
                Outcome::Bit(d.sample(&mut cursor.rng))
            }
        })
    }
}
