use std::collections::HashMap;

use crate::{AsmError, Instruction, INSTRUCTION_BYTES, NUM_REGS};

/// Assembles the text format: one instruction per line, `;` starts a
/// comment, `label:` defines a label (alone or prefixed to an instruction).
/// Branch targets may be labels or numeric instruction indices. Registers
/// are written `r0`..`r15`.
pub fn assemble(text: &str) -> Result<Vec<u8>, AsmError> {
    // First pass: strip comments/labels and record label positions.
    let mut labels: HashMap<String, u16> = HashMap::new();
    let mut lines: Vec<(usize, String)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let mut body = raw;
        if let Some(cut) = body.find(';') {
            body = &body[..cut];
        }
        let mut body = body.trim();
        while let Some(colon) = body.find(':') {
            let (label, rest) = body.split_at(colon);
            let label = label.trim();
            if label.is_empty() || label.contains(char::is_whitespace) {
                break; // not a label; let operand parsing report it
            }
            if labels
                .insert(label.to_string(), lines.len() as u16)
                .is_some()
            {
                return Err(AsmError::DuplicateLabel {
                    line,
                    label: label.to_string(),
                });
            }
            body = rest[1..].trim();
        }
        if !body.is_empty() {
            lines.push((line, body.to_string()));
        }
    }
    if lines.is_empty() {
        return Err(AsmError::EmptyProgram);
    }

    let len = lines.len();
    let mut out = Vec::with_capacity(len * INSTRUCTION_BYTES);
    for (line, body) in &lines {
        let insn = parse_instruction(*line, body, &labels, len)?;
        out.extend_from_slice(&insn.encode());
    }
    Ok(out)
}

fn parse_instruction(
    line: usize,
    body: &str,
    labels: &HashMap<String, u16>,
    program_len: usize,
) -> Result<Instruction, AsmError> {
    let mut parts = body.splitn(2, char::is_whitespace);
    let mnemonic = parts.next().unwrap().to_ascii_uppercase();
    let rest = parts.next().unwrap_or("").trim();
    let ops: Vec<&str> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',')
            .flat_map(|p| p.split_whitespace())
            .collect()
    };

    let expect = |n: usize| -> Result<(), AsmError> {
        if ops.len() == n {
            Ok(())
        } else {
            Err(AsmError::OperandCount {
                line,
                expected: n,
                got: ops.len(),
            })
        }
    };
    let number = |text: &str, max: u64| -> Result<u64, AsmError> {
        let parsed = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X"))
        {
            u64::from_str_radix(hex, 16)
        } else {
            text.parse::<u64>()
        };
        match parsed {
            Ok(v) if v <= max => Ok(v),
            Ok(v) => Err(AsmError::BadOperand {
                line,
                detail: format!("value {v} exceeds maximum {max}"),
            }),
            Err(_) => Err(AsmError::BadOperand {
                line,
                detail: format!("invalid number {text:?}"),
            }),
        }
    };
    let register = |text: &str| -> Result<u8, AsmError> {
        let digits = text
            .strip_prefix('r')
            .or_else(|| text.strip_prefix('R'))
            .ok_or_else(|| AsmError::BadOperand {
                line,
                detail: format!("expected register like r0..r15, got {text:?}"),
            })?;
        let idx = number(digits, (NUM_REGS - 1) as u64)?;
        Ok(idx as u8)
    };
    let target = |text: &str| -> Result<u16, AsmError> {
        let resolved = if let Some(&t) = labels.get(text) {
            t as u64
        } else if text.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            number(text, u16::MAX as u64)?
        } else {
            return Err(AsmError::UnresolvedLabel {
                line,
                label: text.to_string(),
            });
        };
        if resolved as usize >= program_len {
            return Err(AsmError::TargetOutOfRange {
                line,
                target: resolved,
                len: program_len,
            });
        }
        Ok(resolved as u16)
    };

    let insn = match mnemonic.as_str() {
        "NOP" => {
            expect(0)?;
            Instruction::Nop
        }
        "DELAY" => {
            expect(1)?;
            Instruction::Delay {
                ticks: number(ops[0], u32::MAX as u64)? as u32,
            }
        }
        "PULSE" => {
            expect(3)?;
            Instruction::Pulse {
                channel: number(ops[0], u8::MAX as u64)? as u8,
                waveform_id: number(ops[1], u16::MAX as u64)? as u16,
                duration_ticks: number(ops[2], u32::MAX as u64)? as u32,
            }
        }
        "MEASURE" => {
            expect(2)?;
            Instruction::Measure {
                channel: number(ops[0], u8::MAX as u64)? as u8,
                dest_reg: register(ops[1])?,
            }
        }
        "XORR" => {
            expect(3)?;
            Instruction::Xorr {
                dst: register(ops[0])?,
                a: register(ops[1])?,
                b: register(ops[2])?,
            }
        }
        "LOADI" => {
            expect(2)?;
            Instruction::Loadi {
                dst: register(ops[0])?,
                imm: number(ops[1], u32::MAX as u64)? as u32,
            }
        }
        "SENDCB" => {
            expect(3)?;
            Instruction::SendCb {
                device: number(ops[0], u16::MAX as u64)? as u16,
                callback_id: number(ops[1], u16::MAX as u64)? as u16,
                arg_reg: register(ops[2])?,
            }
        }
        "RECVCB" => {
            expect(1)?;
            Instruction::RecvCb {
                dest_reg: register(ops[0])?,
            }
        }
        "BRNZ" => {
            expect(2)?;
            Instruction::Brnz {
                reg: register(ops[0])?,
                target: target(ops[1])?,
            }
        }
        "JMP" => {
            expect(1)?;
            Instruction::Jmp {
                target: target(ops[0])?,
            }
        }
        "HALT" => {
            expect(0)?;
            Instruction::Halt
        }
        _ => {
            return Err(AsmError::UnknownMnemonic {
                line,
                text: mnemonic,
            })
        }
    };
    Ok(insn)
}

/// Renders a binary program back to assembly text with numeric branch
/// targets. `assemble(disassemble(assemble(text)))` is byte-identical to
/// `assemble(text)`.
pub fn disassemble(bytes: &[u8]) -> Result<String, crate::DecodeError> {
    let program = crate::decode_program(bytes)?;
    let mut out = String::new();
    for insn in &program {
        let line = match *insn {
            Instruction::Nop => "NOP".to_string(),
            Instruction::Delay { ticks } => format!("DELAY {ticks}"),
            Instruction::Pulse {
                channel,
                waveform_id,
                duration_ticks,
            } => format!("PULSE {channel}, {waveform_id}, {duration_ticks}"),
            Instruction::Measure { channel, dest_reg } => {
                format!("MEASURE {channel}, r{dest_reg}")
            }
            Instruction::Xorr { dst, a, b } => format!("XORR r{dst}, r{a}, r{b}"),
            Instruction::Loadi { dst, imm } => format!("LOADI r{dst}, {imm}"),
            Instruction::SendCb {
                device,
                callback_id,
                arg_reg,
            } => format!("SENDCB {device}, {callback_id}, r{arg_reg}"),
            Instruction::RecvCb { dest_reg } => format!("RECVCB r{dest_reg}"),
            Instruction::Brnz { reg, target } => format!("BRNZ r{reg}, {target}"),
            Instruction::Jmp { target } => format!("JMP {target}"),
            Instruction::Halt => "HALT".to_string(),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
