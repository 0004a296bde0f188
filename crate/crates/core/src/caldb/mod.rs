// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Calibration database: an append-only history of named machine
//! parameters, queried by date and frozen into snapshots for compilation.
//!
//! Records are stored one per line as flat JSON objects:
//!
//! ```text
//! {"name":"DefaultMicrowaveRabiRate","value":1.0,"units":"MHz","date":"2021-05-31T08:55:00"}
//! {"name":"DDSSampleClockFrequency","value":250.0,"units":"MHz"}
//! ```
//!
//! A record without `date` is an undated constant that sorts before every
//! dated record.

pub mod registry;
mod time;

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use registry::{ChannelDescriptor, ChannelKind, ChannelRegistry, ParamSpec, RegistryError};
pub use time::{BadTimestamp, DateSelector, Timestamp};

use crate::symbolics::{Quantity, Scope, Unit, UnknownUnit};

const SEED_STORE: &str = include_str!("../../fixtures/seed_store.jsonl");

#[derive(Debug, Error)]
pub enum CalDbError {
    #[error("unknown calibration parameter `{0}`")]
    UnknownName(String),
    #[error("no record of `{name}` matches {selector}")]
    NoRecordBefore { name: String, selector: DateSelector },
    #[error("`{name}` is recorded in {existing} but the new record is in {new}")]
    DimensionMismatch { name: String, existing: String, new: String },
    #[error("`{name}` already has a record at {at}")]
    DuplicateTimestamp { name: String, at: String },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Unit(#[from] UnknownUnit),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// One dated (or undated) value of a named parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub name: String,
    pub value: f64,
    pub unit: Unit,
    /// `None` for undated constants, which precede every dated record.
    pub timestamp: Option<Timestamp>,
}

impl CalibrationRecord {
    pub fn new(name: impl Into<String>, value: f64, unit: &str, timestamp: Option<Timestamp>) -> Result<Self, CalDbError> {
        Ok(CalibrationRecord { name: name.into(), value, unit: Unit::parse(unit)?, timestamp })
    }

    pub fn quantity(&self) -> Quantity {
        Quantity::from_unit(self.value, &self.unit).expect("records hold finite values")
    }

    fn matches(&self, selector: &DateSelector) -> bool {
        match selector {
            DateSelector::MostRecent => true,
            DateSelector::Exact(t) => self.timestamp == Some(*t),
            DateSelector::LatestBefore(t) => self.timestamp.is_none_or(|ts| ts <= *t),
        }
    }

    /// The database display line, e.g.
    /// `<DatabaseEntry name="X" value="1" units="MHz" date="2021-05-31-08-55">`.
    pub fn display_entry(&self) -> String {
        let date = self.timestamp.map(|t| t.display_short()).unwrap_or_else(|| "constant".into());
        format!(
            "<DatabaseEntry name=\"{}\" value=\"{}\" units=\"{}\" date=\"{}\">",
            self.name, self.value, self.unit, date
        )
    }
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    name: String,
    value: f64,
    #[serde(default)]
    units: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    date: Option<Timestamp>,
}

impl From<&CalibrationRecord> for RecordLine {
    fn from(r: &CalibrationRecord) -> Self {
        RecordLine { name: r.name.clone(), value: r.value, units: r.unit.symbol().to_string(), date: r.timestamp }
    }
}

/// Picks the record a selector designates from a time-sorted history.
fn select<'a>(history: &'a [CalibrationRecord], selector: &DateSelector) -> Option<&'a CalibrationRecord> {
    history.iter().rev().find(|r| r.matches(selector))
}

/// The in-memory store. History per name is kept sorted by timestamp.
#[derive(Debug, Clone, Default)]
pub struct CalibrationStore {
    history: BTreeMap<String, Vec<CalibrationRecord>>,
    path: Option<PathBuf>,
}

impl CalibrationStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store preloaded with every constant the standard library and the
    /// example programs reference. Only `DefaultMicrowaveRabiRate` is a real
    /// calibration value; the rest are documented placeholders.
    pub fn seed() -> Self {
        Self::from_lines(SEED_STORE).expect("seed store fixture is valid")
    }

    pub fn from_lines(text: &str) -> Result<Self, CalDbError> {
        let mut store = CalibrationStore::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rec: RecordLine = serde_json::from_str(line)
                .map_err(|e| CalDbError::Format { line: i + 1, message: e.to_string() })?;
            let record = CalibrationRecord::new(rec.name, rec.value, &rec.units, rec.date)
                .map_err(|e| CalDbError::Format { line: i + 1, message: e.to_string() })?;
            store.insert(record)?;
        }
        Ok(store)
    }

    /// Opens a store file; appends made through the returned store are
    /// written through to it. A missing file is an empty store.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CalDbError> {
        let path = path.as_ref();
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => String::new(),
            Err(source) => return Err(CalDbError::Io { path: path.into(), source }),
        };
        let mut store = Self::from_lines(&text)?;
        store.path = Some(path.to_path_buf());
        Ok(store)
    }

    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for rec in self.records() {
            out.push_str(&serde_json::to_string(&RecordLine::from(rec)).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CalDbError> {
        let path = path.as_ref();
        fs::write(path, self.to_lines()).map_err(|source| CalDbError::Io { path: path.into(), source })
    }

    /// Every record, by name then time.
    pub fn records(&self) -> impl Iterator<Item = &CalibrationRecord> {
        self.history.values().flatten()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.history.keys().map(String::as_str)
    }

    pub fn history(&self, name: &str) -> Option<&[CalibrationRecord]> {
        self.history.get(name).map(Vec::as_slice)
    }

    fn insert(&mut self, record: CalibrationRecord) -> Result<(), CalDbError> {
        let history = self.history.entry(record.name.clone()).or_default();
        if let Some(first) = history.first() {
            if first.unit.dims() != record.unit.dims() {
                return Err(CalDbError::DimensionMismatch {
                    name: record.name,
                    existing: first.unit.dims().to_string(),
                    new: record.unit.dims().to_string(),
                });
            }
        }
        if history.iter().any(|r| r.timestamp == record.timestamp) {
            let at = record.timestamp.map(|t| t.to_string()).unwrap_or_else(|| "undated".into());
            return Err(CalDbError::DuplicateTimestamp { name: record.name, at });
        }
        let pos = history.partition_point(|r| r.timestamp < record.timestamp);
        history.insert(pos, record);
        Ok(())
    }

    /// Adds a record to the history, writing it through to the backing file
    /// when the store was opened from one.
    pub fn append(&mut self, record: CalibrationRecord) -> Result<(), CalDbError> {
        let line = serde_json::to_string(&RecordLine::from(&record)).expect("record serializes");
        self.insert(record)?;
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|source| CalDbError::Io { path: path.clone(), source })?;
            writeln!(f, "{line}").map_err(|source| CalDbError::Io { path: path.clone(), source })?;
        }
        Ok(())
    }

    pub fn query(&self, name: &str, selector: &DateSelector) -> Result<&CalibrationRecord, CalDbError> {
        let history = self.history.get(name).ok_or_else(|| CalDbError::UnknownName(name.to_string()))?;
        select(history, selector).ok_or_else(|| CalDbError::NoRecordBefore { name: name.to_string(), selector: *selector })
    }

    /// Freezes the history visible at `at`: every record with a timestamp at
    /// or before `at`, plus undated constants.
    pub fn snapshot(&self, at: Timestamp) -> CalibrationSnapshot {
        let mut records = BTreeMap::new();
        for (name, history) in &self.history {
            let visible: Vec<_> = history.iter().filter(|r| r.timestamp.is_none_or(|t| t <= at)).cloned().collect();
            if !visible.is_empty() {
                records.insert(name.clone(), visible);
            }
        }
        CalibrationSnapshot { at, records }
    }
}

/// Immutable view of the store at a reference time.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSnapshot {
    at: Timestamp,
    records: BTreeMap<String, Vec<CalibrationRecord>>,
}

impl CalibrationSnapshot {
    pub fn at(&self) -> Timestamp {
        self.at
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// The latest visible record of `name`.
    pub fn get(&self, name: &str) -> Option<&CalibrationRecord> {
        self.records.get(name).and_then(|h| h.last())
    }

    pub fn query(&self, name: &str, selector: &DateSelector) -> Option<&CalibrationRecord> {
        self.records.get(name).and_then(|h| select(h, selector))
    }

    /// Name → latest visible record.
    pub fn values(&self) -> impl Iterator<Item = (&str, &CalibrationRecord)> {
        self.records.iter().filter_map(|(n, h)| h.last().map(|r| (n.as_str(), r)))
    }

    /// Timestamp of the newest record in the snapshot; identifies the data
    /// version independent of the reference time.
    pub fn version(&self) -> Option<Timestamp> {
        self.records.values().filter_map(|h| h.last().and_then(|r| r.timestamp)).max()
    }
}

impl Scope for CalibrationSnapshot {
    fn constant(&self, name: &str, date: &DateSelector) -> Option<Quantity> {
        self.query(name, date).map(CalibrationRecord::quantity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        Timestamp::parse(s).unwrap()
    }

    #[test]
    fn seed_store_holds_the_rabi_rate() {
        let store = CalibrationStore::seed();
        let r = store.query("DefaultMicrowaveRabiRate", &DateSelector::MostRecent).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.unit.symbol(), "MHz");
        assert_eq!(r.timestamp, Some(ts("2021-05-31-08-55")));
        assert_eq!(
            r.display_entry(),
            r#"<DatabaseEntry name="DefaultMicrowaveRabiRate" value="1" units="MHz" date="2021-05-31-08-55">"#
        );
    }

    #[test]
    fn selectors_pick_the_right_record() {
        let mut store = CalibrationStore::new();
        let t1 = ts("2021-05-31T08:55:00");
        let t2 = ts("2021-06-02T08:55:00");
        store.append(CalibrationRecord::new("Rabi", 1.0, "MHz", Some(t1)).unwrap()).unwrap();
        assert_eq!(store.query("Rabi", &DateSelector::Exact(t1)).unwrap().value, 1.0);
        store.append(CalibrationRecord::new("Rabi", 1.1, "MHz", Some(t2)).unwrap()).unwrap();
        assert_eq!(store.query("Rabi", &DateSelector::MostRecent).unwrap().value, 1.1);
        let mid = ts("2021-06-01T00:00:00");
        assert_eq!(store.query("Rabi", &DateSelector::LatestBefore(mid)).unwrap().value, 1.0);
        assert!(matches!(
            store.query("Rabi", &DateSelector::LatestBefore(ts("2020-01-01"))),
            Err(CalDbError::NoRecordBefore { .. })
        ));
        assert!(matches!(store.query("Nope", &DateSelector::MostRecent), Err(CalDbError::UnknownName(_))));
    }

    #[test]
    fn append_rejects_bad_records() {
        let mut store = CalibrationStore::new();
        let t1 = ts("2021-05-31T08:55:00");
        store.append(CalibrationRecord::new("Rabi", 1.0, "MHz", Some(t1)).unwrap()).unwrap();
        let err = store.append(CalibrationRecord::new("Rabi", 1.0, "ns", Some(ts("2022-01-01"))).unwrap());
        assert!(matches!(err, Err(CalDbError::DimensionMismatch { .. })));
        let err = store.append(CalibrationRecord::new("Rabi", 2.0, "kHz", Some(t1)).unwrap());
        assert!(matches!(err, Err(CalDbError::DuplicateTimestamp { .. })));
        assert_eq!(store.history("Rabi").unwrap().len(), 1);
    }

    #[test]
    fn snapshots_freeze_history() {
        let mut store = CalibrationStore::new();
        let t1 = ts("2021-05-31T08:55:00");
        let t2 = ts("2021-06-02T08:55:00");
        store.append(CalibrationRecord::new("Rabi", 1.0, "MHz", Some(t1)).unwrap()).unwrap();
        store.append(CalibrationRecord::new("Rabi", 1.2, "MHz", Some(t2)).unwrap()).unwrap();
        store.append(CalibrationRecord::new("Clock", 250.0, "MHz", None).unwrap()).unwrap();

        let before = store.snapshot(ts("2020-01-01"));
        assert!(before.get("Rabi").is_none());
        assert_eq!(before.get("Clock").unwrap().value, 250.0);

        let between = store.snapshot(ts("2021-06-01"));
        assert_eq!(between.get("Rabi").unwrap().value, 1.0);
        assert_eq!(between.version(), Some(t1));

        let frozen = store.snapshot(ts("2030-01-01"));
        store.append(CalibrationRecord::new("Rabi", 9.0, "MHz", Some(ts("2029-01-01"))).unwrap()).unwrap();
        assert_eq!(frozen.get("Rabi").unwrap().value, 1.2);
    }

    #[test]
    fn empty_store_snapshot_is_empty() {
        let mut store = CalibrationStore::new();
        store.append(CalibrationRecord::new("Rabi", 1.0, "MHz", Some(ts("2021-05-31"))).unwrap()).unwrap();
        assert!(store.snapshot(ts("2000-01-01")).is_empty());
    }

    #[test]
    fn file_round_trip_and_write_through() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cal.jsonl");
        let mut store = CalibrationStore::open(&path).unwrap();
        store.append(CalibrationRecord::new("Rabi", 1.0, "MHz", Some(ts("2021-05-31-08-55"))).unwrap()).unwrap();
        store.append(CalibrationRecord::new("Rabi", 1.1, "MHz", Some(ts("2021-06-30-08-55"))).unwrap()).unwrap();
        let reloaded = CalibrationStore::open(&path).unwrap();
        assert_eq!(reloaded.to_lines(), store.to_lines());
        assert_eq!(reloaded.query("Rabi", &DateSelector::MostRecent).unwrap().value, 1.1);
    }

    #[test]
    fn malformed_lines_report_position() {
        let err = CalibrationStore::from_lines("{\"name\":\"a\",\"value\":1}\nnot json\n").unwrap_err();
        assert!(matches!(err, CalDbError::Format { line: 2, .. }));
    }
}
