// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use qcl_core::caldb::{CalDbError, CalibrationRecord, CalibrationStore, DateSelector, Timestamp};
use qcl_core::symbolics::{Dims, Quantity, Scope};

fn ts(s: &str) -> Timestamp {
    Timestamp::parse(s).unwrap()
}

fn rabi(value: f64, at: &str) -> CalibrationRecord {
    CalibrationRecord::new("DefaultMicrowaveRabiRate", value, "MHz", Some(ts(at))).unwrap()
}

#[test]
fn seeded_rabi_rate_is_one_megahertz() {
    let store = CalibrationStore::seed();
    let r = store.query("DefaultMicrowaveRabiRate", &DateSelector::MostRecent).unwrap();
    assert_eq!(r.quantity(), Quantity::new(1e6, Dims::FREQUENCY).unwrap());
    assert_eq!(r.timestamp, Some(ts("2021-05-31-08-55")));
    assert_eq!(r.unit.symbol(), "MHz");
}

#[test]
fn exact_selector_returns_the_only_record() {
    let store = CalibrationStore::seed();
    let r = store.query("DefaultMicrowaveRabiRate", &DateSelector::Exact(ts("2021-05-31-08-55"))).unwrap();
    assert_eq!(r.value, 1.0);
    assert!(matches!(
        store.query("DefaultMicrowaveRabiRate", &DateSelector::Exact(ts("2021-05-31-08-56"))),
        Err(CalDbError::NoRecordBefore { .. })
    ));
    assert!(matches!(store.query("NoSuchThing", &DateSelector::MostRecent), Err(CalDbError::UnknownName(_))));
}

#[test]
fn latest_before_picks_the_earlier_record() {
    let mut store = CalibrationStore::new();
    store.append(rabi(1.0, "2021-05-31-08-55")).unwrap();
    store.append(rabi(1.2, "2021-06-02-08-55")).unwrap();
    let mid = DateSelector::LatestBefore(ts("2021-06-01-08-55"));
    assert_eq!(store.query("DefaultMicrowaveRabiRate", &mid).unwrap().value, 1.0);
    assert_eq!(store.query("DefaultMicrowaveRabiRate", &DateSelector::MostRecent).unwrap().value, 1.2);
}

#[test]
fn later_append_becomes_most_recent() {
    let mut store = CalibrationStore::seed();
    store.append(rabi(1.1, "2021-06-15-10-00")).unwrap();
    assert_eq!(store.query("DefaultMicrowaveRabiRate", &DateSelector::MostRecent).unwrap().value, 1.1);
}

#[test]
fn append_in_other_dimension_is_rejected() {
    let mut store = CalibrationStore::seed();
    let bad = CalibrationRecord::new("DefaultMicrowaveRabiRate", 5.0, "ns", Some(ts("2021-06-15-10-00"))).unwrap();
    assert!(matches!(store.append(bad), Err(CalDbError::DimensionMismatch { .. })));
    assert_eq!(store.history("DefaultMicrowaveRabiRate").unwrap().len(), 1);
}

#[test]
fn replayed_history_file_answers_every_selector() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let text = r#"{"name":"X","value":1.0,"units":"MHz","date":"2021-01-01T00:00:00"}
{"name":"X","value":2.0,"units":"MHz","date":"2021-02-01T00:00:00"}
{"name":"X","value":3.0,"units":"MHz","date":"2021-03-01T00:00:00"}
"#;
    std::fs::write(&path, text).unwrap();
    let store = CalibrationStore::open(&path).unwrap();
    let q = |s: &str| store.query("X", &DateSelector::parse(s).unwrap()).unwrap().value;
    assert_eq!(q("most-recent"), 3.0);
    assert_eq!(q("2021-02-01-00-00"), 2.0);
    assert_eq!(q("latest-before:2021-01-15-00-00"), 1.0);
    assert_eq!(q("latest-before:2021-03-01-00-00"), 3.0);
    assert_eq!(store.to_lines(), CalibrationStore::from_lines(&store.to_lines()).unwrap().to_lines());
}

#[test]
fn appends_write_through_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let mut store = CalibrationStore::open(&path).unwrap();
    store.append(rabi(1.0, "2021-05-31-08-55")).unwrap();
    store.append(rabi(1.1, "2021-06-01-08-55")).unwrap();
    let reopened = CalibrationStore::open(&path).unwrap();
    assert_eq!(reopened.history("DefaultMicrowaveRabiRate").unwrap().len(), 2);
}

#[test]
fn snapshots_see_only_the_past() {
    let mut store = CalibrationStore::new();
    store.append(rabi(1.0, "2021-05-31-08-55")).unwrap();
    let now = store.snapshot(Timestamp::now());
    assert_eq!(now.get("DefaultMicrowaveRabiRate").unwrap().value, 1.0);
    assert!(store.snapshot(ts("2020-01-01-00-00")).is_empty());
    store.append(rabi(1.3, "2021-07-01-00-00")).unwrap();
    let between = store.snapshot(ts("2021-06-01-00-00"));
    assert_eq!(between.len(), 1);
    assert_eq!(between.constant("DefaultMicrowaveRabiRate", &DateSelector::MostRecent), Some(Quantity::new(1e6, Dims::FREQUENCY).unwrap()));
}

proptest! {
    /// Most-recent is the maximum timestamp, whatever the insertion order.
    #[test]
    fn most_recent_is_max_timestamp(days in proptest::collection::btree_set(1u32..365, 1..12), shuffle in any::<u64>()) {
        let mut days: Vec<u32> = days.into_iter().collect();
        let n = days.len();
        for i in 0..n {
            days.swap(i, (shuffle as usize).wrapping_mul(i + 7) % n);
        }
        let mut store = CalibrationStore::new();
        let base = ts("2021-01-01-00-00").datetime();
        for d in &days {
            let at = Timestamp::new(base + chrono::Duration::days(*d as i64));
            store.append(CalibrationRecord::new("P", *d as f64, "us", Some(at)).unwrap()).unwrap();
        }
        let max = *days.iter().max().unwrap() as f64;
        prop_assert_eq!(store.query("P", &DateSelector::MostRecent).unwrap().value, max);
        // A snapshot never exposes a record dated after it.
        let cut = Timestamp::new(base + chrono::Duration::days(180));
        let snap = store.snapshot(cut);
        if let Some(r) = snap.get("P") {
            prop_assert!(r.timestamp.unwrap() <= cut);
        }
    }
}
