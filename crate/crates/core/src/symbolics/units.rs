// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Physical units as (scale-to-SI, dimension exponent vector) pairs.
//!
//! Three base dimensions are tracked: time, voltage and a dimensionless
//! count. Frequency is time^-1. Every quantity is carried in SI base units
//! internally; the unit symbol attached to a literal only matters at the
//! XML boundary.

use std::fmt;
use std::ops::{Div, Mul};

use thiserror::Error;

/// The hardware tick, 0.5 ns.
pub const TICK_SECONDS: f64 = 0.5e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Dims {
    pub time: i8,
    pub voltage: i8,
    pub count: i8,
}

impl Dims {
    pub const NONE: Dims = Dims::new(0, 0, 0);
    pub const TIME: Dims = Dims::new(1, 0, 0);
    pub const FREQUENCY: Dims = Dims::new(-1, 0, 0);
    pub const VOLTAGE: Dims = Dims::new(0, 1, 0);
    pub const COUNT: Dims = Dims::new(0, 0, 1);

    pub const fn new(time: i8, voltage: i8, count: i8) -> Self {
        Dims { time, voltage, count }
    }

    pub fn is_dimensionless(&self) -> bool {
        *self == Dims::NONE
    }

    pub fn powi(self, n: i32) -> Dims {
        let n = n as i8;
        Dims::new(self.time * n, self.voltage * n, self.count * n)
    }

    /// Human name used in diagnostics and function signatures.
    pub fn name(&self) -> String {
        match *self {
            Dims::NONE => "dimensionless".into(),
            Dims::TIME => "time".into(),
            Dims::FREQUENCY => "frequency".into(),
            Dims::VOLTAGE => "voltage".into(),
            Dims::COUNT => "count".into(),
            other => other.si_symbol(),
        }
    }

    pub fn from_name(name: &str) -> Option<Dims> {
        Some(match name {
            "dimensionless" => Dims::NONE,
            "time" => Dims::TIME,
            "frequency" => Dims::FREQUENCY,
            "voltage" => Dims::VOLTAGE,
            "count" => Dims::COUNT,
            _ => return None,
        })
    }

    fn si_symbol(&self) -> String {
        let mut parts = Vec::new();
        for (sym, exp) in [("V", self.voltage), ("counts", self.count), ("s", self.time)] {
            match exp {
                0 => {}
                1 => parts.push(sym.to_string()),
                e => parts.push(format!("{sym}^{e}")),
            }
        }
        parts.join("*")
    }
}

impl Mul for Dims {
    type Output = Dims;
    fn mul(self, rhs: Dims) -> Dims {
        Dims::new(self.time + rhs.time, self.voltage + rhs.voltage, self.count + rhs.count)
    }
}

impl Div for Dims {
    type Output = Dims;
    fn div(self, rhs: Dims) -> Dims {
        Dims::new(self.time - rhs.time, self.voltage - rhs.voltage, self.count - rhs.count)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

const KNOWN_UNITS: &[(&str, f64, Dims)] = &[
    ("s", 1.0, Dims::TIME),
    ("ms", 1e-3, Dims::TIME),
    ("us", 1e-6, Dims::TIME),
    ("ns", 1e-9, Dims::TIME),
    ("ps", 1e-12, Dims::TIME),
    ("tick", TICK_SECONDS, Dims::TIME),
    ("Hz", 1.0, Dims::FREQUENCY),
    ("kHz", 1e3, Dims::FREQUENCY),
    ("MHz", 1e6, Dims::FREQUENCY),
    ("GHz", 1e9, Dims::FREQUENCY),
    ("V", 1.0, Dims::VOLTAGE),
    ("mV", 1e-3, Dims::VOLTAGE),
    ("uV", 1e-6, Dims::VOLTAGE),
    ("counts", 1.0, Dims::COUNT),
    ("rad", 1.0, Dims::NONE),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown unit `{0}`")]
pub struct UnknownUnit(pub String);

/// A unit: canonical symbol, scale to SI base units, and dimensions.
///
/// Equality ignores the symbol: `us` and `µs` are the same unit.
#[derive(Debug, Clone)]
pub struct Unit {
    symbol: String,
    scale: f64,
    dims: Dims,
}

impl PartialEq for Unit {
    fn eq(&self, other: &Self) -> bool {
        self.scale == other.scale && self.dims == other.dims
    }
}

impl Unit {
    pub fn dimensionless() -> Unit {
        Unit { symbol: String::new(), scale: 1.0, dims: Dims::NONE }
    }

    /// The SI base unit for `dims` (scale 1).
    pub fn si(dims: Dims) -> Unit {
        if let Some((sym, _, _)) = KNOWN_UNITS.iter().find(|(_, s, d)| *s == 1.0 && *d == dims) {
            if *sym != "rad" {
                return Unit { symbol: sym.to_string(), scale: 1.0, dims };
            }
        }
        Unit { symbol: dims.si_symbol(), scale: 1.0, dims }
    }

    pub fn tick() -> Unit {
        Unit::parse("tick").expect("tick is a known unit")
    }

    /// Parses a unit string. Accepts the known symbols, `µs` as an alias of
    /// `us`, and products/quotients of symbols with integer powers
    /// (`V/s`, `counts*s^-1`).
    pub fn parse(text: &str) -> Result<Unit, UnknownUnit> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Unit::dimensionless());
        }
        let mut scale = 1.0;
        let mut dims = Dims::NONE;
        let mut symbol = String::new();
        let mut divide = false;
        let mut rest = text;
        loop {
            let end = rest.find(['*', '/']).unwrap_or(rest.len());
            let token = &rest[..end];
            let (name, power) = match token.split_once('^') {
                Some((name, p)) => {
                    let p: i32 = p.parse().map_err(|_| UnknownUnit(text.to_string()))?;
                    (name, p)
                }
                None => (token, 1),
            };
            let name = if name == "µs" || name == "μs" { "us" } else { name };
            let (canonical, s, d) = KNOWN_UNITS
                .iter()
                .find(|(sym, _, _)| *sym == name)
                .copied()
                .ok_or_else(|| UnknownUnit(text.to_string()))?;
            let power = if divide { -power } else { power };
            scale *= s.powi(power);
            dims = dims * d.powi(power);
            if !symbol.is_empty() {
                symbol.push(if divide { '/' } else { '*' });
            }
            symbol.push_str(canonical);
            let written = if divide { -power } else { power };
            if written != 1 {
                symbol.push_str(&format!("^{written}"));
            }
            if end == rest.len() {
                break;
            }
            divide = &rest[end..end + 1] == "/";
            rest = &rest[end + 1..];
        }
        Ok(Unit { symbol, scale, dims })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn is_dimensionless(&self) -> bool {
        self.dims.is_dimensionless() && self.scale == 1.0
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("non-finite quantity value {0}")]
pub struct NonFinite(pub f64);

/// An evaluated value in SI base units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    value: f64,
    dims: Dims,
}

impl Quantity {
    pub fn new(si_value: f64, dims: Dims) -> Result<Quantity, NonFinite> {
        if si_value.is_finite() {
            Ok(Quantity { value: si_value, dims })
        } else {
            Err(NonFinite(si_value))
        }
    }

    pub fn from_unit(value: f64, unit: &Unit) -> Result<Quantity, NonFinite> {
        Quantity::new(value * unit.scale, unit.dims)
    }

    pub fn dimensionless(value: f64) -> Result<Quantity, NonFinite> {
        Quantity::new(value, Dims::NONE)
    }

    /// Value in SI base units.
    pub fn si(&self) -> f64 {
        self.value
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn in_unit(&self, unit: &Unit) -> Option<f64> {
        (unit.dims == self.dims).then(|| self.value / unit.scale)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = Unit::si(self.dims);
        if unit.symbol.is_empty() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "{} {}", self.value, unit.symbol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_symbols() {
        let mhz = Unit::parse("MHz").unwrap();
        assert_eq!(mhz.scale(), 1e6);
        assert_eq!(mhz.dims(), Dims::FREQUENCY);
        assert_eq!(Unit::parse("µs").unwrap(), Unit::parse("us").unwrap());
        assert_eq!(Unit::parse("µs").unwrap().symbol(), "us");
        assert!(Unit::parse("").unwrap().is_dimensionless());
        assert!(Unit::parse("furlong").is_err());
    }

    #[test]
    fn compound_units() {
        let u = Unit::parse("V/s").unwrap();
        assert_eq!(u.dims(), Dims::new(-1, 1, 0));
        assert_eq!(u.symbol(), "V/s");
        let u = Unit::parse("counts*s^-1").unwrap();
        assert_eq!(u.dims(), Dims::new(-1, 0, 1));
        let again = Unit::parse(u.symbol()).unwrap();
        assert_eq!(again, u);
        let hz_ns = Unit::parse("MHz*us").unwrap();
        assert!(hz_ns.dims().is_dimensionless());
        assert_eq!(hz_ns.scale(), 1.0);
    }

    #[test]
    fn si_units_round_trip_through_parse() {
        for dims in [Dims::NONE, Dims::TIME, Dims::new(-1, 1, 0), Dims::new(2, -1, 1)] {
            let u = Unit::si(dims);
            assert_eq!(Unit::parse(u.symbol()).unwrap(), u, "{dims:?}");
        }
    }

    #[test]
    fn tick_is_half_a_nanosecond() {
        let q = Quantity::from_unit(10.0, &Unit::parse("us").unwrap()).unwrap();
        assert_eq!(q.in_unit(&Unit::tick()).map(f64::round), Some(20000.0));
        assert_eq!(Unit::tick().scale(), 0.5e-9);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Quantity::new(f64::NAN, Dims::NONE).is_err());
        assert!(Quantity::new(f64::INFINITY, Dims::TIME).is_err());
    }
}
