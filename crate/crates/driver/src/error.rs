use qlink_device_core::{DeviceError, DeviceUid};

/// Typed-marshaling errors.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MarshalError {
    #[error("expected {expected} bytes for this type, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("length prefix declares {declared} items but buffer holds {actual}")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("trailing bits past the declared count must be zero")]
    NonzeroTrailingBits,
    #[error("buffer too short for a length prefix")]
    TooShort,
}

/// Kernel compilation errors.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error("empty kernel source")]
    EmptySource,
    #[error(transparent)]
    Asm(#[from] qlink_vppu::AsmError),
    #[error(transparent)]
    Decode(#[from] qlink_vppu::DecodeError),
    #[error("no quantum-control target named {0:?}")]
    UnknownTarget(String),
    #[error("source names no target and {0} quantum-control devices are available")]
    AmbiguousTarget(usize),
    #[error("section for target {0} is empty")]
    EmptySection(DeviceUid),
}

/// Driver-level errors.
#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Marshal(#[from] MarshalError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("driver is already initialized")]
    AlreadyInitialized,
    #[error("driver is not initialized")]
    NotInitialized,
    #[error("invalid device configuration: {0}")]
    Config(String),
    #[error("no kernel loaded under this handle")]
    InvalidKernelHandle,
    #[error("kernel declares multiple programs for device {0}")]
    DuplicateTarget(DeviceUid),
    #[error("kernel name must be nonempty")]
    EmptyKernelName,
    #[error("result buffer holds {got} bytes but the kernel declares {expected}")]
    ResultSizeMismatch { expected: u64, got: u64 },
    #[error("kernel argument {index} is {size} bytes; register arguments are at most 8")]
    ArgTooWide { index: usize, size: u64 },
    #[error("kernel takes at most 15 register arguments, got {0}")]
    TooManyArgs(usize),
    #[error("device {0} is not a loopback echo endpoint")]
    NotAnEchoDevice(DeviceUid),
    #[error("latency run lost {missing} of {sent} packets")]
    TransportLoss { missing: usize, sent: u64 },
    #[error(transparent)]
    Transport(#[from] qlink_rtlink::RtError),
    #[error("device_call to {target} expected a {expected:?} result, callee returned {got} bytes")]
    ResultTypeMismatch {
        target: DeviceUid,
        expected: crate::ValueType,
        got: usize,
    },
}
