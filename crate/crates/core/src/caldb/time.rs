// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as a calibration timestamp")]
pub struct BadTimestamp(pub String);

/// Calendar time at second resolution. Serialized as ISO-8601
/// (`2021-05-31T08:55:00`); the dashed display form `2021-05-31-08-55`
/// is accepted on input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(NaiveDateTime);

impl Timestamp {
    pub fn new(dt: NaiveDateTime) -> Timestamp {
        Timestamp(dt.with_nanosecond(0).expect("zero nanoseconds is valid"))
    }

    pub fn now() -> Timestamp {
        Timestamp::new(chrono::Utc::now().naive_utc())
    }

    pub fn datetime(&self) -> NaiveDateTime {
        self.0
    }

    pub fn parse(text: &str) -> Result<Timestamp, BadTimestamp> {
        let t = text.trim();
        let bad = || BadTimestamp(text.to_string());
        for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d-%H-%M-%S", "%Y-%m-%dT%H:%M"] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(t, fmt) {
                return Ok(Timestamp::new(dt));
            }
        }
        // `2021-05-31-08-55`: chrono needs a seconds field to build a time.
        if let Ok(dt) = NaiveDateTime::parse_from_str(&format!("{t}-00"), "%Y-%m-%d-%H-%M-%S") {
            return Ok(Timestamp::new(dt));
        }
        if let Ok(d) = NaiveDate::parse_from_str(t, "%Y-%m-%d") {
            return Ok(Timestamp::new(d.and_hms_opt(0, 0, 0).ok_or_else(bad)?));
        }
        Err(bad())
    }

    /// The dashed form used by the database query display.
    pub fn display_short(&self) -> String {
        self.0.format("%Y-%m-%d-%H-%M").to_string()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format("%Y-%m-%dT%H:%M:%S"))
    }
}

impl FromStr for Timestamp {
    type Err = BadTimestamp;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Timestamp::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Which record of a parameter's history a reference selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DateSelector {
    #[default]
    MostRecent,
    Exact(Timestamp),
    LatestBefore(Timestamp),
}

impl DateSelector {
    pub fn parse(text: &str) -> Result<DateSelector, BadTimestamp> {
        let t = text.trim();
        if t.is_empty() || t == "most-recent" {
            return Ok(DateSelector::MostRecent);
        }
        if let Some(rest) = t.strip_prefix("latest-before:") {
            return Timestamp::parse(rest).map(DateSelector::LatestBefore);
        }
        Timestamp::parse(t.strip_prefix("exact:").unwrap_or(t)).map(DateSelector::Exact)
    }
}

impl fmt::Display for DateSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DateSelector::MostRecent => f.write_str("most-recent"),
            DateSelector::Exact(t) => write!(f, "{t}"),
            DateSelector::LatestBefore(t) => write!(f, "latest-before:{t}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_display_form_and_normalizes() {
        let t = Timestamp::parse("2021-05-31-08-55").unwrap();
        assert_eq!(t.to_string(), "2021-05-31T08:55:00");
        assert_eq!(t.display_short(), "2021-05-31-08-55");
        assert_eq!(Timestamp::parse("2021-05-31T08:55:00").unwrap(), t);
        assert!(Timestamp::parse("yesterday").is_err());
    }

    #[test]
    fn selectors() {
        assert_eq!(DateSelector::parse("most-recent").unwrap(), DateSelector::MostRecent);
        let t = Timestamp::parse("2021-06-01").unwrap();
        assert_eq!(DateSelector::parse("latest-before:2021-06-01").unwrap(), DateSelector::LatestBefore(t));
        assert_eq!(DateSelector::parse("2021-06-01T00:00:00").unwrap(), DateSelector::Exact(t));
        for s in [DateSelector::MostRecent, DateSelector::Exact(t), DateSelector::LatestBefore(t)] {
            assert_eq!(DateSelector::parse(&s.to_string()).unwrap(), s);
        }
    }
}
