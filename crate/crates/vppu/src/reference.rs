//! Second interpreter for substitutability checks.
//!
//! Written against the raw byte encoding rather than the decoded
//! [`crate::Instruction`] form, with its own fetch/validate/step logic, so
//! that agreement between the two interpreters is meaningful evidence the
//! program format and timing semantics are pinned down by the encoding and
//! not by one implementation's structure.

use std::collections::VecDeque;

use crate::{
    CallbackBridge, ExecFault, ExecLimits, FaultCause, PhysicalBackend, TraceEvent, VppuState,
    INSTRUCTION_BYTES, NUM_REGS,
};

fn le16(bytes: &[u8], at: usize) -> u16 {
    bytes[at] as u16 | (bytes[at + 1] as u16) << 8
}

fn le32(bytes: &[u8], at: usize) -> u32 {
    bytes[at] as u32
        | (bytes[at + 1] as u32) << 8
        | (bytes[at + 2] as u32) << 16
        | (bytes[at + 3] as u32) << 24
}

/// Operand bytes that must be zero for each opcode, as (first, last_excl)
/// within the 8-byte word.
const ZERO_SPANS: [(usize, usize); 11] = [
    (1, 8), // NOP
    (5, 8), // DELAY
    (8, 8), // PULSE uses the full word
    (3, 8), // MEASURE
    (4, 8), // XORR
    (6, 8), // LOADI
    (6, 8), // SENDCB
    (2, 8), // RECVCB
    (4, 8), // BRNZ
    (3, 8), // JMP
    (1, 8), // HALT
];

fn word_is_valid(word: &[u8], n_insns: usize) -> bool {
    let op = word[0] as usize;
    if op >= ZERO_SPANS.len() {
        return false;
    }
    let (lo, hi) = ZERO_SPANS[op];
    if word[lo..hi].iter().any(|&b| b != 0) {
        return false;
    }
    let reg_fields: &[usize] = match op {
        0x03 => &[2],
        0x04 => &[1, 2, 3],
        0x05 => &[1],
        0x06 => &[5],
        0x07 => &[1],
        0x08 => &[1],
        _ => &[],
    };
    if reg_fields.iter().any(|&i| word[i] as usize >= NUM_REGS) {
        return false;
    }
    match op {
        0x08 => (le16(word, 2) as usize) < n_insns,
        0x09 => (le16(word, 1) as usize) < n_insns,
        _ => true,
    }
}

/// Runs a binary program with semantics identical to [`crate::execute`].
pub fn execute(
    bytes: &[u8],
    backend: &mut dyn PhysicalBackend,
    bridge: &dyn CallbackBridge,
    limits: &ExecLimits,
    args: &[u64],
) -> Result<VppuState, ExecFault> {
    let bad_program = ExecFault {
        pc: 0,
        tick: 0,
        cause: FaultCause::PcOutOfRange,
    };
    if bytes.is_empty() || !bytes.len().is_multiple_of(INSTRUCTION_BYTES) {
        return Err(bad_program);
    }
    let n_insns = bytes.len() / INSTRUCTION_BYTES;
    if !bytes
        .chunks_exact(INSTRUCTION_BYTES)
        .all(|w| word_is_valid(w, n_insns))
    {
        return Err(bad_program);
    }

    let mut regs = [0u64; NUM_REGS];
    regs[..args.len()].copy_from_slice(args);
    let mut pc = 0usize;
    let mut clock = 0u64;
    let mut trace = Vec::new();
    let mut pending: VecDeque<Vec<u8>> = VecDeque::new();

    loop {
        if pc >= n_insns {
            return Err(ExecFault {
                pc,
                tick: clock,
                cause: FaultCause::PcOutOfRange,
            });
        }
        let word = &bytes[pc * INSTRUCTION_BYTES..(pc + 1) * INSTRUCTION_BYTES];
        let tick = clock;
        let mut jumped_to = None;
        let mut cost = 1u64;

        match word[0] {
            0x00 => {}
            0x01 => cost = le32(word, 1) as u64,
            0x02 => {
                cost = le32(word, 4) as u64;
                trace.push(TraceEvent::Pulse {
                    tick,
                    channel: word[1],
                    waveform_id: le16(word, 2),
                    duration_ticks: le32(word, 4),
                });
            }
            0x03 => match backend.measure(word[1], tick) {
                Ok(bit) => {
                    regs[word[2] as usize] = regs[word[2] as usize] << 1 | bit as u64;
                    trace.push(TraceEvent::Measure {
                        tick,
                        channel: word[1],
                        dest_reg: word[2],
                        bit,
                    });
                }
                Err(m) => {
                    return Err(ExecFault {
                        pc,
                        tick,
                        cause: FaultCause::MeasureFailed(m),
                    })
                }
            },
            0x04 => regs[word[1] as usize] = regs[word[2] as usize] ^ regs[word[3] as usize],
            0x05 => regs[word[1] as usize] = le32(word, 2) as u64,
            0x06 => {
                let (device, callback_id) = (le16(word, 1), le16(word, 3));
                let arg = regs[word[5] as usize];
                trace.push(TraceEvent::CallbackSent {
                    tick,
                    device,
                    callback_id,
                    arg,
                });
                match bridge.call(device, callback_id, arg) {
                    Ok(result) => pending.push_back(result),
                    Err(m) => {
                        return Err(ExecFault {
                            pc,
                            tick,
                            cause: FaultCause::CallbackFailed(m),
                        })
                    }
                }
            }
            0x07 => match pending.pop_front() {
                Some(result) if result.len() <= 8 => {
                    let mut raw = [0u8; 8];
                    raw[..result.len()].copy_from_slice(&result);
                    let value = u64::from_le_bytes(raw);
                    regs[word[1] as usize] = value;
                    trace.push(TraceEvent::CallbackReceived {
                        tick,
                        dest_reg: word[1],
                        value,
                    });
                }
                Some(result) => {
                    return Err(ExecFault {
                        pc,
                        tick,
                        cause: FaultCause::ResultTooWide(result.len()),
                    })
                }
                None => {
                    return Err(ExecFault {
                        pc,
                        tick,
                        cause: FaultCause::RecvWithoutPending,
                    })
                }
            },
            0x08 => {
                if regs[word[1] as usize] != 0 {
                    jumped_to = Some(le16(word, 2) as usize);
                }
            }
            0x09 => jumped_to = Some(le16(word, 1) as usize),
            0x0A => {
                trace.push(TraceEvent::Halt { tick });
                return Ok(VppuState {
                    pc,
                    regs,
                    dtd_clock: tick + 1,
                    halted: true,
                    trace,
                });
            }
            _ => unreachable!("validated above"),
        }

        clock = tick + cost;
        if clock > limits.tick_budget {
            return Err(ExecFault {
                pc,
                tick: clock,
                cause: FaultCause::TickBudgetExceeded(limits.tick_budget),
            });
        }
        pc = jumped_to.unwrap_or(pc + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{assemble, CountingBackend, NullBridge, RepetitionBackend};

    #[test]
    fn agrees_with_primary_on_a_measurement_loop() {
        let src = "\
attempt: LOADI r0, 0
         MEASURE 254, r0
         BRNZ r0, attempt
         MEASURE 0, r2
         MEASURE 1, r2
         PULSE 0, 9, 4
         XORR r15, r2, r3
         HALT";
        let bytes = assemble(src).unwrap();
        let limits = ExecLimits::default();

        let mut backend_a = RepetitionBackend::new(3, 0.2, 99);
        backend_a.set_distill_failures(2);
        let a = crate::execute_bytes(&bytes, &mut backend_a, &NullBridge, &limits, &[]).unwrap();

        let mut backend_b = RepetitionBackend::new(3, 0.2, 99);
        backend_b.set_distill_failures(2);
        let b = execute(&bytes, &mut backend_b, &NullBridge, &limits, &[]).unwrap();

        assert_eq!(a, b);
        assert_eq!(a.trace_text(), b.trace_text());
    }

    #[test]
    fn rejects_invalid_encodings() {
        let mut bytes = assemble("HALT").unwrap();
        bytes[5] = 7;
        assert!(execute(
            &bytes,
            &mut CountingBackend::new(),
            &NullBridge,
            &ExecLimits::default(),
            &[]
        )
        .is_err());
    }
}
