// Copyright 2026 The qcl Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-width engine instructions.
//!
//! Word layout, little-endian `u64`:
//!
//! | bits  | field                       |
//! |-------|-----------------------------|
//! | 0-7   | mnemonic                    |
//! | 8-15  | reserved, zero              |
//! | 16-39 | delay in ticks              |
//! | 40-63 | operand                     |
//!
//! BRANCHLUT packs its operand as `m` (bits 40-47) and `t` (bits 48-63).

use std::fmt;

use thiserror::Error;

pub const DELAY_BITS: u32 = 24;
pub const OPERAND_BITS: u32 = 24;
pub const MAX_DELAY: u32 = (1 << DELAY_BITS) - 1;
pub const MAX_OPERAND: u32 = (1 << OPERAND_BITS) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsaError {
    #[error("{field} value {value} does not fit in {bits} bits")]
    FieldOverflow { field: &'static str, value: u64, bits: u32 },
    #[error("unknown mnemonic code {0}")]
    UnknownMnemonic(u8),
    #[error("reserved bits set in word {0:#018x}")]
    ReservedBits(u64),
    #[error("{0} takes no operand, word {1:#018x}")]
    UnexpectedOperand(Mnemonic, u64),
    #[error("stream length {0} is not a multiple of 8 bytes")]
    Truncated(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Mnemonic {
    Nop = 0,
    SetValue = 1,
    SetLoop = 2,
    Jnz = 3,
    Jz = 4,
    DecLoop = 5,
    Goto = 6,
    BranchLut = 7,
}

impl Mnemonic {
    pub const ALL: [Mnemonic; 8] = [
        Mnemonic::Nop,
        Mnemonic::SetValue,
        Mnemonic::SetLoop,
        Mnemonic::Jnz,
        Mnemonic::Jz,
        Mnemonic::DecLoop,
        Mnemonic::Goto,
        Mnemonic::BranchLut,
    ];

    pub fn from_code(code: u8) -> Option<Mnemonic> {
        Mnemonic::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Mnemonic::Nop => "NOP",
            Mnemonic::SetValue => "SETVALUE",
            Mnemonic::SetLoop => "SETLOOP",
            Mnemonic::Jnz => "JNZ",
            Mnemonic::Jz => "JZ",
            Mnemonic::DecLoop => "DECLOOP",
            Mnemonic::Goto => "GOTO",
            Mnemonic::BranchLut => "BRANCHLUT",
        }
    }
}

impl fmt::Display for Mnemonic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One instruction. `delay` is the wait, in ticks, between the previous
/// instruction and this one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    Nop { delay: u32 },
    SetValue { delay: u32, value: u32 },
    SetLoop { delay: u32, count: u32 },
    Jnz { delay: u32, target: u32 },
    Jz { delay: u32, target: u32 },
    DecLoop { delay: u32 },
    Goto { delay: u32, target: u32 },
    BranchLut { delay: u32, resource: u8, table: u16 },
}

impl Opcode {
    pub fn mnemonic(&self) -> Mnemonic {
        match self {
            Opcode::Nop { .. } => Mnemonic::Nop,
            Opcode::SetValue { .. } => Mnemonic::SetValue,
            Opcode::SetLoop { .. } => Mnemonic::SetLoop,
            Opcode::Jnz { .. } => Mnemonic::Jnz,
            Opcode::Jz { .. } => Mnemonic::Jz,
            Opcode::DecLoop { .. } => Mnemonic::DecLoop,
            Opcode::Goto { .. } => Mnemonic::Goto,
            Opcode::BranchLut { .. } => Mnemonic::BranchLut,
        }
    }

    pub fn delay(&self) -> u32 {
        match *self {
            Opcode::Nop { delay }
            | Opcode::SetValue { delay, .. }
            | Opcode::SetLoop { delay, .. }
            | Opcode::Jnz { delay, .. }
            | Opcode::Jz { delay, .. }
            | Opcode::DecLoop { delay }
            | Opcode::Goto { delay, .. }
            | Opcode::BranchLut { delay, .. } => delay,
        }
    }

    /// The raw 24-bit operand field.
    pub fn operand(&self) -> u32 {
        match *self {
            Opcode::Nop { .. } | Opcode::DecLoop { .. } => 0,
            Opcode::SetValue { value, .. } => value,
            Opcode::SetLoop { count, .. } => count,
            Opcode::Jnz { target, .. } | Opcode::Jz { target, .. } | Opcode::Goto { target, .. } => target,
            Opcode::BranchLut { resource, table, .. } => resource as u32 | (table as u32) << 8,
        }
    }

    /// Jump target of JNZ, JZ and GOTO.
    pub fn target(&self) -> Option<u32> {
        match *self {
            Opcode::Jnz { target, .. } | Opcode::Jz { target, .. } | Opcode::Goto { target, .. } => Some(target),
            _ => None,
        }
    }

    pub fn encode(&self) -> Result<u64, IsaError> {
        let delay = self.delay();
        if delay > MAX_DELAY {
            return Err(IsaError::FieldOverflow { field: "delay", value: delay as u64, bits: DELAY_BITS });
        }
        let operand = self.operand();
        if operand > MAX_OPERAND {
            return Err(IsaError::FieldOverflow { field: "operand", value: operand as u64, bits: OPERAND_BITS });
        }
        Ok(self.mnemonic() as u64 | (delay as u64) << 16 | (operand as u64) << 40)
    }

    pub fn decode(word: u64) -> Result<Opcode, IsaError> {
        let code = (word & 0xff) as u8;
        let mnemonic = Mnemonic::from_code(code).ok_or(IsaError::UnknownMnemonic(code))?;
        if (word >> 8) & 0xff != 0 {
            return Err(IsaError::ReservedBits(word));
        }
        let delay = ((word >> 16) & MAX_DELAY as u64) as u32;
        let operand = (word >> 40) as u32;
        Ok(match mnemonic {
            Mnemonic::Nop | Mnemonic::DecLoop if operand != 0 => return Err(IsaError::UnexpectedOperand(mnemonic, word)),
            Mnemonic::Nop => Opcode::Nop { delay },
            Mnemonic::DecLoop => Opcode::DecLoop { delay },
            Mnemonic::SetValue => Opcode::SetValue { delay, value: operand },
            Mnemonic::SetLoop => Opcode::SetLoop { delay, count: operand },
            Mnemonic::Jnz => Opcode::Jnz { delay, target: operand },
            Mnemonic::Jz => Opcode::Jz { delay, target: operand },
            Mnemonic::Goto => Opcode::Goto { delay, target: operand },
            Mnemonic::BranchLut => Opcode::BranchLut { delay, resource: (operand & 0xff) as u8, table: (operand >> 8) as u16 },
        })
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<9} d={}", self.mnemonic().name(), self.delay())?;
        match *self {
            Opcode::Nop { .. } | Opcode::DecLoop { .. } => Ok(()),
            Opcode::SetValue { value, .. } => write!(f, " x={value}"),
            Opcode::SetLoop { count, .. } => write!(f, " n={count}"),
            Opcode::Jnz { target, .. } | Opcode::Jz { target, .. } | Opcode::Goto { target, .. } => write!(f, " pc={target}"),
            Opcode::BranchLut { resource, table, .. } => write!(f, " m={resource} t={table}"),
        }
    }
}

pub fn encode_stream(ops: &[Opcode]) -> Result<Vec<u8>, IsaError> {
    let mut out = Vec::with_capacity(ops.len() * 8);
    for op in ops {
        out.extend_from_slice(&op.encode()?.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_stream(bytes: &[u8]) -> Result<Vec<Opcode>, IsaError> {
    if !bytes.len().is_multiple_of(8) {
        return Err(IsaError::Truncated(bytes.len()));
    }
    bytes
        .chunks_exact(8)
        .map(|c| Opcode::decode(u64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_setvalue_is_just_the_tag() {
        let w = Opcode::SetValue { delay: 0, value: 0 }.encode().unwrap();
        assert_eq!(w, 1);
        assert_eq!(Opcode::decode(w).unwrap(), Opcode::SetValue { delay: 0, value: 0 });
    }

    #[test]
    #[allow(clippy::unusual_byte_groupings)] // grouped by field
    fn field_positions() {
        let w = Opcode::SetValue { delay: 0x123456, value: 0xabcdef }.encode().unwrap();
        assert_eq!(w, 0xabcdef_123456_00_01);
        let w = Opcode::BranchLut { delay: 0, resource: 3, table: 0x0102 }.encode().unwrap();
        assert_eq!(w >> 40, 0x0102_03);
    }

    #[test]
    fn overflow_and_garbage() {
        assert!(matches!(Opcode::Nop { delay: 1 << 24 }.encode(), Err(IsaError::FieldOverflow { field: "delay", .. })));
        assert!(matches!(Opcode::Goto { delay: 0, target: 1 << 24 }.encode(), Err(IsaError::FieldOverflow { field: "operand", .. })));
        assert_eq!(Opcode::decode(8), Err(IsaError::UnknownMnemonic(8)));
        assert!(matches!(Opcode::decode(0x100), Err(IsaError::ReservedBits(_))));
        assert!(matches!(Opcode::decode(1 << 40), Err(IsaError::UnexpectedOperand(Mnemonic::Nop, _))));
        assert_eq!(decode_stream(&[0; 7]), Err(IsaError::Truncated(7)));
    }
}
