// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! The compiled program and its binary container.
//!
//! All integers are little-endian. Strings are a `u32` byte length followed
//! by UTF-8 bytes.
//!
//! ```text
//! magic "QCLX", version u16, flags u16 (0)
//! segment count u32, resource count u32, table count u32,
//! binding count u32, engine count u32
//! source digest [32]                 sha-256 of the canonical source XML
//! snapshot string                    empty when compiled without one
//! segments:  name string
//! resources: name string, length u32
//! tables:    resource u32, slot count u32, slots u32..., entry count u32, entries u32...
//! bindings:  engine u32, instruction u32, resource u32, slot u32, threshold u32
//! engines:   name string, kind u8, min f64, lsb f64,
//!            segment offsets u32 x segment count, word count u32, words u64...
//! ```

use thiserror::Error;

use crate::caldb::registry::ChannelKind;

use super::opcode::{IsaError, Opcode};

pub const MAGIC: [u8; 4] = *b"QCLX";
pub const VERSION: u16 = 1;
/// Table entry that sends every engine to its terminal NOP.
pub const HALT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("not a compiled program (bad magic)")]
    BadMagic,
    #[error("unsupported container version {0}")]
    Version(u16),
    #[error("container ends early at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("invalid text in container")]
    Utf8,
    #[error("unknown engine kind {0}")]
    Kind(u8),
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error("malformed program: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceInfo {
    pub name: String,
    pub length: u32,
}

/// Lookup table consulted by BRANCHLUT: the consulted bits, first slot most
/// significant, index `entries`, which hold segment indices or [`HALT`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    pub resource: u32,
    pub slots: Vec<u32>,
    pub entries: Vec<u32>,
}

impl DecisionTable {
    pub fn key(&self, bits: &[bool]) -> usize {
        self.slots.iter().fold(0, |k, &s| k << 1 | bits.get(s as usize).copied().unwrap_or(false) as usize)
    }
}

/// A counter instruction whose execution closes a measurement window. Its
/// index in [`CompiledProgram::bindings`] is the measurement id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementBinding {
    pub engine: u32,
    pub instruction: u32,
    pub resource: u32,
    pub slot: u32,
    /// Counts at or above this read as 1.
    pub threshold: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineStream {
    /// Fully qualified `channel.parameter`.
    pub name: String,
    pub kind: ChannelKind,
    pub min: f64,
    pub lsb: f64,
    /// First instruction of each segment.
    pub segment_offsets: Vec<u32>,
    pub words: Vec<Opcode>,
}

impl EngineStream {
    pub fn decode_value(&self, code: u32) -> f64 {
        self.min + code as f64 * self.lsb
    }

    /// Index of the terminal NOP.
    pub fn halt_index(&self) -> u32 {
        self.words.len().saturating_sub(1) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompiledProgram {
    pub source_digest: [u8; 32],
    pub snapshot: Option<String>,
    pub segments: Vec<String>,
    pub resources: Vec<ResourceInfo>,
    pub tables: Vec<DecisionTable>,
    pub bindings: Vec<MeasurementBinding>,
    pub engines: Vec<EngineStream>,
}

impl CompiledProgram {
    pub fn engine(&self, name: &str) -> Option<(usize, &EngineStream)> {
        self.engines.iter().enumerate().find(|(_, e)| e.name == name)
    }

    pub fn segment_index(&self, name: &str) -> Option<usize> {
        self.segments.iter().position(|s| s == name)
    }

    pub fn instruction_counts(&self) -> Vec<(&str, usize)> {
        self.engines.iter().map(|e| (e.name.as_str(), e.words.len())).collect()
    }

    pub fn digest_hex(&self) -> String {
        self.source_digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Structural checks: terminal NOPs, targets in range, tables and
    /// bindings consistent.
    pub fn validate(&self) -> Result<(), ContainerError> {
        let bad = |m: String| Err(ContainerError::Malformed(m));
        for (t, table) in self.tables.iter().enumerate() {
            let Some(res) = self.resources.get(table.resource as usize) else {
                return bad(format!("table {t} names resource {}", table.resource));
            };
            if table.slots.len() > 16 || table.entries.len() != 1 << table.slots.len() {
                return bad(format!("table {t} has {} entries for {} bits", table.entries.len(), table.slots.len()));
            }
            if table.slots.iter().any(|&s| s >= res.length) {
                return bad(format!("table {t} consults a slot outside `{}`", res.name));
            }
            if table.entries.iter().any(|&e| e != HALT && e as usize >= self.segments.len()) {
                return bad(format!("table {t} targets a missing segment"));
            }
        }
        for (i, b) in self.bindings.iter().enumerate() {
            let ok = self.engines.get(b.engine as usize).is_some_and(|e| (b.instruction as usize) < e.words.len())
                && self.resources.get(b.resource as usize).is_some_and(|r| b.slot < r.length);
            if !ok {
                return bad(format!("binding {i} is out of range"));
            }
        }
        for e in &self.engines {
            if !matches!(e.words.last(), Some(Opcode::Nop { .. })) {
                return bad(format!("engine `{}` does not end in NOP", e.name));
            }
            if e.segment_offsets.len() != self.segments.len() {
                return bad(format!("engine `{}` has {} segment offsets", e.name, e.segment_offsets.len()));
            }
            let n = e.words.len() as u32;
            for op in &e.words {
                if op.target().is_some_and(|t| t >= n) {
                    return bad(format!("engine `{}`: jump past the end", e.name));
                }
                if let Opcode::BranchLut { resource, table, .. } = *op {
                    match self.tables.get(table as usize) {
                        Some(t) if t.resource == resource as u32 => {}
                        _ => return bad(format!("engine `{}`: BRANCHLUT m={resource} t={table} has no table", e.name)),
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, ContainerError> {
        let mut w = Writer::default();
        w.bytes(&MAGIC);
        w.u16(VERSION);
        w.u16(0);
        for n in [self.segments.len(), self.resources.len(), self.tables.len(), self.bindings.len(), self.engines.len()] {
            w.u32(n as u32);
        }
        w.bytes(&self.source_digest);
        w.string(self.snapshot.as_deref().unwrap_or(""));
        for s in &self.segments {
            w.string(s);
        }
        for r in &self.resources {
            w.string(&r.name);
            w.u32(r.length);
        }
        for t in &self.tables {
            w.u32(t.resource);
            w.u32s(&t.slots);
            w.u32s(&t.entries);
        }
        for b in &self.bindings {
            for v in [b.engine, b.instruction, b.resource, b.slot, b.threshold] {
                w.u32(v);
            }
        }
        for e in &self.engines {
            w.string(&e.name);
            w.bytes(&[kind_code(e.kind)]);
            w.bytes(&e.min.to_le_bytes());
            w.bytes(&e.lsb.to_le_bytes());
            for &o in &e.segment_offsets {
                w.u32(o);
            }
            w.u32(e.words.len() as u32);
            for op in &e.words {
                w.bytes(&op.encode()?.to_le_bytes());
            }
        }
        Ok(w.0)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<CompiledProgram, ContainerError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(ContainerError::Version(version));
        }
        r.u16()?;
        let [nseg, nres, ntab, nbind, neng] = [r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?];
        let mut p = CompiledProgram { source_digest: r.take(32)?.try_into().expect("32 bytes"), ..Default::default() };
        let snap = r.string()?;
        p.snapshot = (!snap.is_empty()).then_some(snap);
        for _ in 0..nseg {
            p.segments.push(r.string()?);
        }
        for _ in 0..nres {
            p.resources.push(ResourceInfo { name: r.string()?, length: r.u32()? });
        }
        for _ in 0..ntab {
            p.tables.push(DecisionTable { resource: r.u32()?, slots: r.u32s()?, entries: r.u32s()? });
        }
        for _ in 0..nbind {
            p.bindings.push(MeasurementBinding {
                engine: r.u32()?,
                instruction: r.u32()?,
                resource: r.u32()?,
                slot: r.u32()?,
                threshold: r.u32()?,
            });
        }
        for _ in 0..neng {
            let name = r.string()?;
            let code = r.take(1)?[0];
            let kind = kind_from_code(code).ok_or(ContainerError::Kind(code))?;
            let min = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
            let lsb = f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
            let segment_offsets = (0..nseg).map(|_| r.u32()).collect::<Result<_, _>>()?;
            let n = r.u32()?;
            let mut words = Vec::new();
            for _ in 0..n {
                words.push(Opcode::decode(u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes")))?);
            }
            p.engines.push(EngineStream { name, kind, min, lsb, segment_offsets, words });
        }
        if r.pos != bytes.len() {
            return Err(ContainerError::Trailing(bytes.len() - r.pos));
        }
        Ok(p)
    }

    /// Human-readable listing.
    pub fn disassemble(&self) -> String {
        let mut out = String::new();
        for e in &self.engines {
            out.push_str(&format!("{} ({:?})\n", e.name, e.kind));
            for (i, op) in e.words.iter().enumerate() {
                if let Some(s) = e.segment_offsets.iter().position(|&o| o as usize == i) {
                    out.push_str(&format!("  ; {}\n", self.segments[s]));
                }
                out.push_str(&format!("  {i:>5}  {op}\n"));
            }
        }
        out
    }
}

fn kind_code(k: ChannelKind) -> u8 {
    match k {
        ChannelKind::Dds => 0,
        ChannelKind::Counter => 1,
        ChannelKind::Ttl => 2,
    }
}

fn kind_from_code(c: u8) -> Option<ChannelKind> {
    Some(match c {
        0 => ChannelKind::Dds,
        1 => ChannelKind::Counter,
        2 => ChannelKind::Ttl,
        _ => return None,
    })
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.0.extend_from_slice(b);
    }
    fn u16(&mut self, v: u16) {
        self.bytes(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u32s(&mut self, vs: &[u32]) {
        self.u32(vs.len() as u32);
        for &v in vs {
            self.u32(v);
        }
    }
    fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ContainerError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(ContainerError::Truncated(self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u16(&mut self) -> Result<u16, ContainerError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }
    fn u32(&mut self) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u32s(&mut self) -> Result<Vec<u32>, ContainerError> {
        let n = self.u32()? as usize;
        if n > self.bytes.len() {
            return Err(ContainerError::Truncated(self.pos));
        }
        (0..n).map(|_| self.u32()).collect()
    }
    fn string(&mut self) -> Result<String, ContainerError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| ContainerError::Utf8)
    }
}
