//! Deterministic virtual pulse processing unit.
//!
//! Executes a small fixed instruction set on a tick-based deterministic
//! clock, produces measurement outcomes through a pluggable physical
//! backend, and can invoke device callbacks mid-program through a bridge
//! supplied by the runtime. Programs are eight bytes per instruction with
//! no header, so a binary program file is just the concatenated encoding.
//!
//! Two interpreters are provided: [`execute`] is the production path, and
//! [`reference::execute`] is a second, separately written interpreter used
//! to check substitutability — any quantum-control device that honors the
//! same program format can stand in for the VPPU.

mod asm;
mod backend;
mod error;
mod exec;
mod isa;
pub mod reference;

pub use asm::{assemble, disassemble};
pub use backend::{
    CountingBackend, PhysicalBackend, RepetitionBackend, FLAG_CHANNEL, LOGICAL_CHANNEL,
};
pub use error::{AsmError, DecodeError, ExecFault, FaultCause};
pub use exec::{execute, execute_bytes, CallbackBridge, ExecLimits, NullBridge, VppuState};
pub use isa::{decode_program, Instruction, TraceEvent, INSTRUCTION_BYTES, NUM_REGS};
