/// Assembly-time errors, with the 1-based source line they occurred on.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmError {
    #[error("line {line}: unknown mnemonic {text:?}")]
    UnknownMnemonic { line: usize, text: String },
    #[error("line {line}: {detail}")]
    BadOperand { line: usize, detail: String },
    #[error("line {line}: expected {expected} operands, got {got}")]
    OperandCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: unresolved label {label:?}")]
    UnresolvedLabel { line: usize, label: String },
    #[error("line {line}: duplicate label {label:?}")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: branch target {target} outside program of {len} instructions")]
    TargetOutOfRange {
        line: usize,
        target: u64,
        len: usize,
    },
    #[error("empty program")]
    EmptyProgram,
}

/// Program decode errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("program length {0} is not a multiple of 8 bytes")]
    MisalignedLength(usize),
    #[error("instruction {index}: unknown opcode 0x{opcode:02X}")]
    UnknownOpcode { index: usize, opcode: u8 },
    #[error("instruction {index}: unused operand bytes must be zero")]
    NonzeroPadding { index: usize },
    #[error("instruction {index}: register {reg} out of range (16 registers)")]
    RegisterOutOfRange { index: usize, reg: u8 },
    #[error("instruction {index}: branch target {target} outside program of {len} instructions")]
    BranchOutOfRange {
        index: usize,
        target: u16,
        len: usize,
    },
    #[error("empty program")]
    EmptyProgram,
}

/// Why program execution stopped abnormally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultCause {
    /// Program counter ran past the last instruction without a HALT.
    PcOutOfRange,
    /// RECVCB with no pending callback result.
    RecvWithoutPending,
    /// The callback bridge reported a failure.
    CallbackFailed(String),
    /// The physical backend rejected a measurement.
    MeasureFailed(String),
    /// A callback result was wider than a 64-bit register.
    ResultTooWide(usize),
    /// Configured tick budget exceeded.
    TickBudgetExceeded(u64),
}

/// Execution fault, carrying the faulting program counter and tick.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("fault at pc {pc}, tick {tick}: {cause:?}")]
pub struct ExecFault {
    pub pc: usize,
    pub tick: u64,
    pub cause: FaultCause,
}
