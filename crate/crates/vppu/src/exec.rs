use std::collections::VecDeque;

use crate::{
    decode_program, ExecFault, FaultCause, Instruction, PhysicalBackend, TraceEvent, NUM_REGS,
};

/// Routes a mid-program callback send to the runtime.
///
/// The call is synchronous: the program does not advance until the callee
/// has completed and its result bytes are returned.
pub trait CallbackBridge: Sync {
    fn call(&self, device: u16, callback_id: u16, arg: u64) -> Result<Vec<u8>, String>;
}

/// Bridge for programs that must not reach outside the device.
pub struct NullBridge;

impl CallbackBridge for NullBridge {
    fn call(&self, device: u16, callback_id: u16, _arg: u64) -> Result<Vec<u8>, String> {
        Err(format!(
            "no callback bridge wired (send to device {device}, callback {callback_id})"
        ))
    }
}

/// Execution limits. The tick budget bounds runaway loops.
#[derive(Debug, Clone)]
pub struct ExecLimits {
    pub tick_budget: u64,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            tick_budget: 10_000_000,
        }
    }
}

/// Final processor state plus the ordered event trace of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VppuState {
    pub pc: usize,
    pub regs: [u64; NUM_REGS],
    pub dtd_clock: u64,
    pub halted: bool,
    pub trace: Vec<TraceEvent>,
}

impl VppuState {
    /// Renders the trace one event per line; the canonical form used for
    /// byte-level trace comparison.
    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for event in &self.trace {
            out.push_str(&event.to_string());
            out.push('\n');
        }
        out
    }

    /// Program result convention: register 15 at halt.
    pub fn result_register(&self) -> u64 {
        self.regs[NUM_REGS - 1]
    }
}

/// Decodes and runs a binary program.
pub fn execute_bytes(
    bytes: &[u8],
    backend: &mut dyn PhysicalBackend,
    bridge: &dyn CallbackBridge,
    limits: &ExecLimits,
    args: &[u64],
) -> Result<VppuState, ExecFault> {
    let program = decode_program(bytes).map_err(|_| ExecFault {
        pc: 0,
        tick: 0,
        cause: FaultCause::PcOutOfRange,
    })?;
    execute(&program, backend, bridge, limits, args)
}

/// Runs a decoded program to completion.
///
/// Arguments are preloaded into registers `r0..`, one register each. The
/// deterministic clock advances by an instruction's duration (DELAY and
/// PULSE) or exactly one tick otherwise; events are stamped with the tick
/// at which their instruction began.
pub fn execute(
    program: &[Instruction],
    backend: &mut dyn PhysicalBackend,
    bridge: &dyn CallbackBridge,
    limits: &ExecLimits,
    args: &[u64],
) -> Result<VppuState, ExecFault> {
    assert!(
        args.len() < NUM_REGS,
        "at most {} kernel arguments",
        NUM_REGS - 1
    );
    let mut state = VppuState {
        pc: 0,
        regs: [0u64; NUM_REGS],
        dtd_clock: 0,
        halted: false,
        trace: Vec::new(),
    };
    state.regs[..args.len()].copy_from_slice(args);
    let mut pending: VecDeque<Vec<u8>> = VecDeque::new();

    loop {
        let pc = state.pc;
        let Some(insn) = program.get(pc) else {
            return Err(ExecFault {
                pc,
                tick: state.dtd_clock,
                cause: FaultCause::PcOutOfRange,
            });
        };
        let tick = state.dtd_clock;
        let mut next_pc = pc + 1;

        match *insn {
            Instruction::Nop | Instruction::Delay { .. } => {}
            Instruction::Pulse {
                channel,
                waveform_id,
                duration_ticks,
            } => state.trace.push(TraceEvent::Pulse {
                tick,
                channel,
                waveform_id,
                duration_ticks,
            }),
            Instruction::Measure { channel, dest_reg } => {
                let bit = backend.measure(channel, tick).map_err(|m| ExecFault {
                    pc,
                    tick,
                    cause: FaultCause::MeasureFailed(m),
                })?;
                let reg = &mut state.regs[dest_reg as usize];
                *reg = (*reg << 1) | bit as u64;
                state.trace.push(TraceEvent::Measure {
                    tick,
                    channel,
                    dest_reg,
                    bit,
                });
            }
            Instruction::Xorr { dst, a, b } => {
                state.regs[dst as usize] = state.regs[a as usize] ^ state.regs[b as usize];
            }
            Instruction::Loadi { dst, imm } => {
                state.regs[dst as usize] = imm as u64;
            }
            Instruction::SendCb {
                device,
                callback_id,
                arg_reg,
            } => {
                let arg = state.regs[arg_reg as usize];
                state.trace.push(TraceEvent::CallbackSent {
                    tick,
                    device,
                    callback_id,
                    arg,
                });
                let result = bridge.call(device, callback_id, arg).map_err(|m| ExecFault {
                    pc,
                    tick,
                    cause: FaultCause::CallbackFailed(m),
                })?;
                pending.push_back(result);
            }
            Instruction::RecvCb { dest_reg } => {
                let bytes = pending.pop_front().ok_or(ExecFault {
                    pc,
                    tick,
                    cause: FaultCause::RecvWithoutPending,
                })?;
                if bytes.len() > 8 {
                    return Err(ExecFault {
                        pc,
                        tick,
                        cause: FaultCause::ResultTooWide(bytes.len()),
                    });
                }
                let mut raw = [0u8; 8];
                raw[..bytes.len()].copy_from_slice(&bytes);
                let value = u64::from_le_bytes(raw);
                state.regs[dest_reg as usize] = value;
                state.trace.push(TraceEvent::CallbackReceived {
                    tick,
                    dest_reg,
                    value,
                });
            }
            Instruction::Brnz { reg, target } => {
                if state.regs[reg as usize] != 0 {
                    next_pc = target as usize;
                }
            }
            Instruction::Jmp { target } => next_pc = target as usize,
            Instruction::Halt => {
                state.dtd_clock = tick + 1;
                state.halted = true;
                state.pc = pc;
                state.trace.push(TraceEvent::Halt { tick });
                return Ok(state);
            }
        }

        state.dtd_clock = tick + insn.duration_ticks();
        if state.dtd_clock > limits.tick_budget {
            return Err(ExecFault {
                pc,
                tick: state.dtd_clock,
                cause: FaultCause::TickBudgetExceeded(limits.tick_budget),
            });
        }
        state.pc = next_pc;
    }
}
