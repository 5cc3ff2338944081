use crate::DecodeError;

/// Every instruction occupies exactly this many bytes.
pub const INSTRUCTION_BYTES: usize = 8;

/// Register file width.
pub const NUM_REGS: usize = 16;

/// The instruction set.
///
/// Encoding: byte 0 is the opcode (0x00..=0x0A in declaration order), the
/// remaining seven bytes hold the operands little-endian in declaration
/// order, and unused bytes must be zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instruction {
    Nop,
    Delay { ticks: u32 },
    Pulse {
        channel: u8,
        waveform_id: u16,
        duration_ticks: u32,
    },
    Measure { channel: u8, dest_reg: u8 },
    Xorr { dst: u8, a: u8, b: u8 },
    Loadi { dst: u8, imm: u32 },
    SendCb {
        device: u16,
        callback_id: u16,
        arg_reg: u8,
    },
    RecvCb { dest_reg: u8 },
    Brnz { reg: u8, target: u16 },
    Jmp { target: u16 },
    Halt,
}

impl Instruction {
    pub fn opcode(&self) -> u8 {
        match self {
            Instruction::Nop => 0x00,
            Instruction::Delay { .. } => 0x01,
            Instruction::Pulse { .. } => 0x02,
            Instruction::Measure { .. } => 0x03,
            Instruction::Xorr { .. } => 0x04,
            Instruction::Loadi { .. } => 0x05,
            Instruction::SendCb { .. } => 0x06,
            Instruction::RecvCb { .. } => 0x07,
            Instruction::Brnz { .. } => 0x08,
            Instruction::Jmp { .. } => 0x09,
            Instruction::Halt => 0x0A,
        }
    }

    /// Ticks this instruction advances the deterministic clock by.
    pub fn duration_ticks(&self) -> u64 {
        match self {
            Instruction::Delay { ticks } => *ticks as u64,
            Instruction::Pulse { duration_ticks, .. } => *duration_ticks as u64,
            _ => 1,
        }
    }

    pub fn encode(&self) -> [u8; INSTRUCTION_BYTES] {
        let mut b = [0u8; INSTRUCTION_BYTES];
        b[0] = self.opcode();
        match *self {
            Instruction::Nop | Instruction::Halt => {}
            Instruction::Delay { ticks } => b[1..5].copy_from_slice(&ticks.to_le_bytes()),
            Instruction::Pulse {
                channel,
                waveform_id,
                duration_ticks,
            } => {
                b[1] = channel;
                b[2..4].copy_from_slice(&waveform_id.to_le_bytes());
                b[4..8].copy_from_slice(&duration_ticks.to_le_bytes());
            }
            Instruction::Measure { channel, dest_reg } => {
                b[1] = channel;
                b[2] = dest_reg;
            }
            Instruction::Xorr { dst, a, b: src_b } => {
                b[1] = dst;
                b[2] = a;
                b[3] = src_b;
            }
            Instruction::Loadi { dst, imm } => {
                b[1] = dst;
                b[2..6].copy_from_slice(&imm.to_le_bytes());
            }
            Instruction::SendCb {
                device,
                callback_id,
                arg_reg,
            } => {
                b[1..3].copy_from_slice(&device.to_le_bytes());
                b[3..5].copy_from_slice(&callback_id.to_le_bytes());
                b[5] = arg_reg;
            }
            Instruction::RecvCb { dest_reg } => b[1] = dest_reg,
            Instruction::Brnz { reg, target } => {
                b[1] = reg;
                b[2..4].copy_from_slice(&target.to_le_bytes());
            }
            Instruction::Jmp { target } => b[1..3].copy_from_slice(&target.to_le_bytes()),
        }
        b
    }

    /// Decodes one instruction. `index` is used only for error reporting;
    /// branch-target bounds are checked by [`decode_program`], which knows
    /// the program length.
    pub fn decode(raw: &[u8; INSTRUCTION_BYTES], index: usize) -> Result<Self, DecodeError> {
        fn reg(value: u8, index: usize) -> Result<u8, DecodeError> {
            if (value as usize) < NUM_REGS {
                Ok(value)
            } else {
                Err(DecodeError::RegisterOutOfRange { index, reg: value })
            }
        }
        fn require_zero(raw: &[u8], index: usize) -> Result<(), DecodeError> {
            if raw.iter().all(|&b| b == 0) {
                Ok(())
            } else {
                Err(DecodeError::NonzeroPadding { index })
            }
        }

        let insn = match raw[0] {
            0x00 => {
                require_zero(&raw[1..], index)?;
                Instruction::Nop
            }
            0x01 => {
                require_zero(&raw[5..], index)?;
                Instruction::Delay {
                    ticks: u32::from_le_bytes(raw[1..5].try_into().unwrap()),
                }
            }
            0x02 => Instruction::Pulse {
                channel: raw[1],
                waveform_id: u16::from_le_bytes(raw[2..4].try_into().unwrap()),
                duration_ticks: u32::from_le_bytes(raw[4..8].try_into().unwrap()),
            },
            0x03 => {
                require_zero(&raw[3..], index)?;
                Instruction::Measure {
                    channel: raw[1],
                    dest_reg: reg(raw[2], index)?,
                }
            }
            0x04 => {
                require_zero(&raw[4..], index)?;
                Instruction::Xorr {
                    dst: reg(raw[1], index)?,
                    a: reg(raw[2], index)?,
                    b: reg(raw[3], index)?,
                }
            }
            0x05 => {
                require_zero(&raw[6..], index)?;
                Instruction::Loadi {
                    dst: reg(raw[1], index)?,
                    imm: u32::from_le_bytes(raw[2..6].try_into().unwrap()),
                }
            }
            0x06 => {
                require_zero(&raw[6..], index)?;
                Instruction::SendCb {
                    device: u16::from_le_bytes(raw[1..3].try_into().unwrap()),
                    callback_id: u16::from_le_bytes(raw[3..5].try_into().unwrap()),
                    arg_reg: reg(raw[5], index)?,
                }
            }
            0x07 => {
                require_zero(&raw[2..], index)?;
                Instruction::RecvCb {
                    dest_reg: reg(raw[1], index)?,
                }
            }
            0x08 => {
                require_zero(&raw[4..], index)?;
                Instruction::Brnz {
                    reg: reg(raw[1], index)?,
                    target: u16::from_le_bytes(raw[2..4].try_into().unwrap()),
                }
            }
            0x09 => {
                require_zero(&raw[3..], index)?;
                Instruction::Jmp {
                    target: u16::from_le_bytes(raw[1..3].try_into().unwrap()),
                }
            }
            0x0A => {
                require_zero(&raw[1..], index)?;
                Instruction::Halt
            }
            opcode => return Err(DecodeError::UnknownOpcode { index, opcode }),
        };
        Ok(insn)
    }
}

/// Decodes a whole binary program and validates branch targets against the
/// program length.
pub fn decode_program(bytes: &[u8]) -> Result<Vec<Instruction>, DecodeError> {
    if bytes.is_empty() {
        return Err(DecodeError::EmptyProgram);
    }
    if !bytes.len().is_multiple_of(INSTRUCTION_BYTES) {
        return Err(DecodeError::MisalignedLength(bytes.len()));
    }
    let len = bytes.len() / INSTRUCTION_BYTES;
    let mut program = Vec::with_capacity(len);
    for (index, chunk) in bytes.chunks_exact(INSTRUCTION_BYTES).enumerate() {
        program.push(Instruction::decode(chunk.try_into().unwrap(), index)?);
    }
    for (index, insn) in program.iter().enumerate() {
        let target = match insn {
            Instruction::Brnz { target, .. } | Instruction::Jmp { target } => *target,
            _ => continue,
        };
        if target as usize >= len {
            return Err(DecodeError::BranchOutOfRange { index, target, len });
        }
    }
    Ok(program)
}

/// One entry of the deterministic event trace a program run emits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Pulse {
        tick: u64,
        channel: u8,
        waveform_id: u16,
        duration_ticks: u32,
    },
    Measure {
        tick: u64,
        channel: u8,
        dest_reg: u8,
        bit: bool,
    },
    CallbackSent {
        tick: u64,
        device: u16,
        callback_id: u16,
        arg: u64,
    },
    CallbackReceived {
        tick: u64,
        dest_reg: u8,
        value: u64,
    },
    Halt { tick: u64 },
}

impl std::fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TraceEvent::Pulse {
                tick,
                channel,
                waveform_id,
                duration_ticks,
            } => write!(f, "t={tick} PULSE ch={channel} wf={waveform_id} dur={duration_ticks}"),
            TraceEvent::Measure {
                tick,
                channel,
                dest_reg,
                bit,
            } => write!(f, "t={tick} MEASURE ch={channel} r{dest_reg} bit={}", *bit as u8),
            TraceEvent::CallbackSent {
                tick,
                device,
                callback_id,
                arg,
            } => write!(f, "t={tick} SENDCB dev={device} cb={callback_id} arg={arg}"),
            TraceEvent::CallbackReceived { tick, dest_reg, value } => {
                write!(f, "t={tick} RECVCB r{dest_reg} value={value}")
            }
            TraceEvent::Halt { tick } => write!(f, "t={tick} HALT"),
        }
    }
}
