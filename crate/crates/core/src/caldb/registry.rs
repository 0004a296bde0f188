// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Target machine description: which channels exist, which parameters each
//! exposes, and how parameter values map onto 24-bit engine operands.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbolics::Dims;

/// Width of a SETVALUE operand.
pub const VALUE_BITS: u32 = 24;
const CODE_LIMIT: u64 = 1 << VALUE_BITS;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("channel `{channel}` has no parameter `{param}`")]
    ParameterNotOnChannel { channel: String, param: String },
    #[error("value {value} for `{param}` is outside [{min}, {max})")]
    OutOfRange { param: String, value: f64, min: f64, max: f64 },
    #[error("`{param}` expects {expected}, got {got}")]
    WrongDimension { param: String, expected: Dims, got: Dims },
    #[error("registry file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Dds,
    Counter,
    Ttl,
}

/// Fixed-point encoding of one engine parameter: `value = min + code * lsb`
/// with a 24-bit unsigned code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub dims: Dims,
    pub min: f64,
    pub lsb: f64,
}

impl ParamSpec {
    pub const fn new(dims: Dims, min: f64, lsb: f64) -> Self {
        ParamSpec { dims, min, lsb }
    }

    pub fn max(&self) -> f64 {
        self.min + CODE_LIMIT as f64 * self.lsb
    }

    /// Encodes an SI value, rounding to the nearest code.
    pub fn encode(&self, name: &str, value: f64) -> Result<u32, RegistryError> {
        let code = ((value - self.min) / self.lsb).round();
        if !(0.0..CODE_LIMIT as f64).contains(&code) {
            return Err(RegistryError::OutOfRange { param: name.to_string(), value, min: self.min, max: self.max() });
        }
        Ok(code as u32)
    }

    pub fn decode(&self, code: u32) -> f64 {
        self.min + code as f64 * self.lsb
    }

    /// The value the engine will actually output for `value`.
    pub fn quantize(&self, name: &str, value: f64) -> Result<f64, RegistryError> {
        self.encode(name, value).map(|c| self.decode(c))
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min, self.decode((CODE_LIMIT - 1) as u32))
    }
}

const TWO_POW_M10: f64 = 1.0 / 1024.0;

pub const AMPLITUDE: ParamSpec = ParamSpec::new(Dims::VOLTAGE, 0.0, 1.0 / (1u64 << 24) as f64);
pub const FREQUENCY: ParamSpec = ParamSpec::new(Dims::FREQUENCY, 0.0, 32.0);
pub const PHASE: ParamSpec = ParamSpec::new(Dims::NONE, -8.0, 1.0 / (1u64 << 20) as f64);
/// Interpolation slope in volts per DDS sample.
pub const SLOPE: ParamSpec = ParamSpec::new(Dims::VOLTAGE, -TWO_POW_M10, 1.0 / (1u64 << 33) as f64);
pub const SWITCH: ParamSpec = ParamSpec::new(Dims::NONE, 0.0, 1.0);

impl ChannelKind {
    pub fn params(self) -> &'static [(&'static str, ParamSpec)] {
        match self {
            ChannelKind::Dds => &[
                ("amplitude", AMPLITUDE),
                ("frequency", FREQUENCY),
                ("phase", PHASE),
                ("interp_p0", AMPLITUDE),
                ("interp_p1", SLOPE),
            ],
            ChannelKind::Counter => &[("gate", SWITCH)],
            ChannelKind::Ttl => &[("level", SWITCH)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDescriptor {
    pub kind: ChannelKind,
}

impl ChannelDescriptor {
    pub fn param(&self, name: &str) -> Option<ParamSpec> {
        self.kind.params().iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelRegistry {
    channels: BTreeMap<String, ChannelDescriptor>,
}

/// Ion addressing channels generated per index in the default machine.
pub const DEFAULT_ION_COUNT: u32 = 16;

impl ChannelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The reference machine used by the standard library and examples.
    pub fn default_machine() -> Self {
        let mut r = ChannelRegistry::new();
        for i in 0..DEFAULT_ION_COUNT {
            for d in 0..3 {
                r.add(format!("channels.aom.raman.individual{i}.dds{d}"), ChannelKind::Dds);
            }
            r.add(format!("channels.aom.detection.individual{i}.dds0"), ChannelKind::Dds);
            r.add(format!("channels.detection.apd{i}"), ChannelKind::Counter);
        }
        for name in [
            "channels.aom.raman.global.dds0",
            "channels.aom.doppler.dds0",
            "channels.aom.pump.dds0",
            "channels.aom.detection.global.dds0",
            "channels.microwave.dds0",
        ] {
            r.add(name, ChannelKind::Dds);
        }
        r.add("channels.detection.pmt0", ChannelKind::Counter);
        for i in 0..4 {
            r.add(format!("channels.ttl.shutter{i}"), ChannelKind::Ttl);
        }
        r
    }

    pub fn add(&mut self, name: impl Into<String>, kind: ChannelKind) {
        self.channels.insert(name.into(), ChannelDescriptor { kind });
    }

    pub fn channel(&self, name: &str) -> Option<&ChannelDescriptor> {
        self.channels.get(name)
    }

    pub fn channels(&self) -> impl Iterator<Item = (&str, &ChannelDescriptor)> {
        self.channels.iter().map(|(n, d)| (n.as_str(), d))
    }

    pub fn require(&self, name: &str) -> Result<&ChannelDescriptor, RegistryError> {
        self.channel(name).ok_or_else(|| RegistryError::UnknownChannel(name.to_string()))
    }

    /// Splits `channels.x.y.param` into its channel and parameter spec.
    pub fn resolve_engine(&self, qualified: &str) -> Result<(&str, ChannelKind, ParamSpec), RegistryError> {
        let (channel, param) = qualified
            .rsplit_once('.')
            .ok_or_else(|| RegistryError::UnknownChannel(qualified.to_string()))?;
        let (name, desc) = self
            .channels
            .get_key_value(channel)
            .ok_or_else(|| RegistryError::UnknownChannel(channel.to_string()))?;
        let spec = desc.param(param).ok_or_else(|| RegistryError::ParameterNotOnChannel {
            channel: channel.to_string(),
            param: param.to_string(),
        })?;
        Ok((name.as_str(), desc.kind, spec))
    }

    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        serde_json::from_str(text).map_err(|e| RegistryError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("registry serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_machine_has_listed_channels() {
        let r = ChannelRegistry::default_machine();
        let d = r.channel("channels.aom.raman.individual1.dds0").unwrap();
        assert_eq!(d.kind, ChannelKind::Dds);
        let names: Vec<_> = d.kind.params().iter().map(|(n, _)| *n).collect();
        assert_eq!(names, ["amplitude", "frequency", "phase", "interp_p0", "interp_p1"]);
        assert!(r.resolve_engine("channels.aom.raman.individual1.dds0.amplitude").is_ok());
        assert!(matches!(
            r.resolve_engine("channels.aom.raman.individual1.dds0.gate"),
            Err(RegistryError::ParameterNotOnChannel { .. })
        ));
        assert!(matches!(r.resolve_engine("channels.nope.amplitude"), Err(RegistryError::UnknownChannel(_))));
    }

    #[test]
    fn encoding_is_exact_for_representable_values() {
        assert_eq!(AMPLITUDE.quantize("a", 0.5).unwrap(), 0.5);
        assert_eq!(AMPLITUDE.quantize("a", 0.0).unwrap(), 0.0);
        assert_eq!(FREQUENCY.quantize("f", 202e6).unwrap(), 202e6);
        assert_eq!(SLOPE.quantize("p1", 0.0).unwrap(), 0.0);
        assert!(AMPLITUDE.encode("a", 1.5).is_err());
        assert!(AMPLITUDE.encode("a", -0.1).is_err());
    }

    #[test]
    fn slope_resolution_is_fine_enough_for_sweeps() {
        let p1 = -0.05 / 2500.0;
        let q = SLOPE.quantize("p1", p1).unwrap();
        assert!((q - p1).abs() <= SLOPE.lsb / 2.0);
        assert!(((q - p1) * 2500.0).abs() < p1.abs());
    }

    #[test]
    fn json_round_trip() {
        let r = ChannelRegistry::default_machine();
        assert_eq!(ChannelRegistry::from_json(&r.to_json()).unwrap(), r);
    }
}
