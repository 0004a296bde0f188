// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulator trace records and their two wire forms.
//!
//! JSON lines: one object per event,
//! `{"tick":0,"engine":2,"kind":"value-set","payload":{"code":5,"value":0.1}}`.
//!
//! Binary: magic `QCLT`, version `u16`, event count `u64`, then per event
//! `tick u64, engine u32, kind u8` followed by the payload fields below, all
//! little-endian. `u32::MAX` encodes an absent optional field.
//!
//! | kind | code | payload                                              |
//! |------|------|------------------------------------------------------|
//! | value-set | 0 | code u32, value f64                               |
//! | branch-taken | 1 | from u32, to u32, segment u32                  |
//! | measurement-published | 2 | id u32, resource u32, slot u32, count u32, bit u8 |
//! | loop-iteration | 3 | remaining u32                                |
//! | halt | 4 | pc u32                                                   |

use serde_json::{json, Value};
use thiserror::Error;

pub const TRACE_MAGIC: [u8; 4] = *b"QCLT";
pub const TRACE_VERSION: u16 = 1;
const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TraceKind {
    ValueSet,
    BranchTaken,
    MeasurementPublished,
    LoopIteration,
    Halt,
}

impl TraceKind {
    pub const ALL: [TraceKind; 5] =
        [TraceKind::ValueSet, TraceKind::BranchTaken, TraceKind::MeasurementPublished, TraceKind::LoopIteration, TraceKind::Halt];

    pub fn name(self) -> &'static str {
        match self {
            TraceKind::ValueSet => "value-set",
            TraceKind::BranchTaken => "branch-taken",
            TraceKind::MeasurementPublished => "measurement-published",
            TraceKind::LoopIteration => "loop-iteration",
            TraceKind::Halt => "halt",
        }
    }

    pub fn from_name(s: &str) -> Option<TraceKind> {
        TraceKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    ValueSet { code: u32, value: f64 },
    /// `segment` is the destination segment when the target starts one.
    Branch { from: u32, to: u32, segment: Option<u32> },
    Measurement { id: u32, resource: u32, slot: u32, count: Option<u32>, bit: bool },
    Loop { remaining: u32 },
    Halt { pc: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub tick: u64,
    pub engine: u32,
    pub kind: TraceKind,
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Json { line: usize, message: String },
    #[error("binary trace: {0}")]
    Binary(String),
}

impl TraceEvent {
    pub fn to_json(&self) -> Value {
        let payload = match self.payload {
            Payload::ValueSet { code, value } => json!({ "code": code, "value": value }),
            Payload::Branch { from, to, segment } => json!({ "from": from, "to": to, "segment": segment }),
            Payload::Measurement { id, resource, slot, count, bit } => {
                json!({ "id": id, "resource": resource, "slot": slot, "count": count, "bit": bit as u8 })
            }
            Payload::Loop { remaining } => json!({ "remaining": remaining }),
            Payload::Halt { pc } => json!({ "pc": pc }),
        };
        json!({ "tick": self.tick, "engine": self.engine, "kind": self.kind.name(), "payload": payload })
    }

    pub fn from_json(v: &Value) -> Result<TraceEvent, String> {
        let u = |v: &Value, k: &str| v.get(k).and_then(Value::as_u64).ok_or_else(|| format!("missing integer `{k}`"));
        let u32f = |v: &Value, k: &str| u(v, k).and_then(|x| u32::try_from(x).map_err(|_| format!("`{k}` out of range")));
        let opt = |v: &Value, k: &str| match v.get(k) {
            None | Some(Value::Null) => Ok(None),
            Some(_) => u32f(v, k).map(Some),
        };
        let kind = v.get("kind").and_then(Value::as_str).and_then(TraceKind::from_name).ok_or("unknown kind")?;
        let p = v.get("payload").ok_or("missing payload")?;
        let payload = match kind {
            TraceKind::ValueSet => Payload::ValueSet {
                code: u32f(p, "code")?,
                value: p.get("value").and_then(Value::as_f64).ok_or("missing number `value`")?,
            },
            TraceKind::BranchTaken => Payload::Branch { from: u32f(p, "from")?, to: u32f(p, "to")?, segment: opt(p, "segment")? },
            TraceKind::MeasurementPublished => Payload::Measurement {
                id: u32f(p, "id")?,
                resource: u32f(p, "resource")?,
                slot: u32f(p, "slot")?,
                count: opt(p, "count")?,
                bit: u(p, "bit")? != 0,
            },
            TraceKind::LoopIteration => Payload::Loop { remaining: u32f(p, "remaining")? },
            TraceKind::Halt => Payload::Halt { pc: u32f(p, "pc")? },
        };
        Ok(TraceEvent { tick: u(v, "tick")?, engine: u32f(v, "engine")?, kind, payload })
    }
}

pub fn to_jsonl(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_json().to_string());
        out.push('\n');
    }
    out
}

pub fn from_jsonl(text: &str) -> Result<Vec<TraceEvent>, TraceError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let err = |message: String| TraceError::Json { line: i + 1, message };
            let v: Value = serde_json::from_str(l).map_err(|e| err(e.to_string()))?;
            TraceEvent::from_json(&v).map_err(err)
        })
        .collect()
}

pub fn to_binary(events: &[TraceEvent]) -> Vec<u8> {
    let mut out = Vec::with_capacity(14 + events.len() * 32);
    out.extend_from_slice(&TRACE_MAGIC);
    out.extend_from_slice(&TRACE_VERSION.to_le_bytes());
    out.extend_from_slice(&(events.len() as u64).to_le_bytes());
    for e in events {
        out.extend_from_slice(&e.tick.to_le_bytes());
        out.extend_from_slice(&e.engine.to_le_bytes());
        out.push(TraceKind::ALL.iter().position(|k| *k == e.kind).expect("kind listed") as u8);
        let mut put = |x: u32| out.extend_from_slice(&x.to_le_bytes());
        match e.payload {
            Payload::ValueSet { code, value } => {
                put(code);
                out.extend_from_slice(&value.to_le_bytes());
            }
            Payload::Branch { from, to, segment } => {
                put(from);
                put(to);
                put(segment.unwrap_or(NONE));
            }
            Payload::Measurement { id, resource, slot, count, bit } => {
                put(id);
                put(resource);
                put(slot);
                put(count.unwrap_or(NONE));
                out.push(bit as u8);
            }
            Payload::Loop { remaining } => put(remaining),
            Payload::Halt { pc } => put(pc),
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], TraceError> {
        let end = self.pos + N;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| TraceError::Binary(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s.try_into().expect("length checked"))
    }

    fn u32(&mut self) -> Result<u32, TraceError> {
        self.take::<4>().map(u32::from_le_bytes)
    }

    fn opt(&mut self) -> Result<Option<u32>, TraceError> {
        self.u32().map(|x| (x != NONE).then_some(x))
    }
}

pub fn from_binary(bytes: &[u8]) -> Result<Vec<TraceEvent>, TraceError> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take::<4>()? != TRACE_MAGIC {
        return Err(TraceError::Binary("bad magic".into()));
    }
    let version = u16::from_le_bytes(c.take()?);
    if version != TRACE_VERSION {
        return Err(TraceError::Binary(format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(c.take()?);
    let mut out = Vec::new();
    for _ in 0..n {
        let tick = u64::from_le_bytes(c.take()?);
        let engine = c.u32()?;
        let [code] = c.take::<1>()?;
        let kind = *TraceKind::ALL.get(code as usize).ok_or_else(|| TraceError::Binary(format!("unknown kind {code}")))?;
        let payload = match kind {
            TraceKind::ValueSet => Payload::ValueSet { code: c.u32()?, value: f64::from_le_bytes(c.take()?) },
            TraceKind::BranchTaken => Payload::Branch { from: c.u32()?, to: c.u32()?, segment: c.opt()? },
            TraceKind::MeasurementPublished => {
                Payload::Measurement { id: c.u32()?, resource: c.u32()?, slot: c.u32()?, count: c.opt()?, bit: c.take::<1>()?[0] != 0 }
            }
            TraceKind::LoopIteration => Payload::Loop { remaining: c.u32()? },
            TraceKind::Halt => Payload::Halt { pc: c.u32()? },
        };
        out.push(TraceEvent { tick, engine, kind, payload });
    }
    if c.pos != bytes.len() {
        return Err(TraceError::Binary(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<TraceEvent> {
        vec![
            TraceEvent { tick: 0, engine: 0, kind: TraceKind::ValueSet, payload: Payload::ValueSet { code: 5, value: 0.25 } },
            TraceEvent { tick: 3, engine: 1, kind: TraceKind::LoopIteration, payload: Payload::Loop { remaining: 2 } },
            TraceEvent {
                tick: 7,
                engine: 1,
                kind: TraceKind::MeasurementPublished,
                payload: Payload::Measurement { id: 0, resource: 0, slot: 3, count: None, bit: true },
            },
            TraceEvent { tick: 9, engine: 0, kind: TraceKind::BranchTaken, payload: Payload::Branch { from: 4, to: 9, segment: Some(2) } },
            TraceEvent { tick: 9, engine: 0, kind: TraceKind::Halt, payload: Payload::Halt { pc: 12 } },
        ]
    }

    #[test]
    fn jsonl_round_trip() {
        let s = sample();
        let text = to_jsonl(&s);
        assert_eq!(text.lines().count(), s.len());
        assert!(text.starts_with(r#"{"engine":0,"kind":"value-set""#) || text.contains(r#""kind":"value-set""#));
        assert_eq!(from_jsonl(&text).unwrap(), s);
    }

    #[test]
    fn binary_round_trip() {
        let s = sample();
        let b = to_binary(&s);
        assert_eq!(&b[..4], b"QCLT");
        assert_eq!(from_binary(&b).unwrap(), s);
        assert!(from_binary(&b[..b.len() - 1]).is_err());
    }
}
