use crate::{Capability, DeviceUid};

/// Errors surfaced by the device layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeviceError {
    #[error("no device registered with uid {0}")]
    UnknownDevice(DeviceUid),
    #[error("device name {0:?} is already registered")]
    DuplicateName(String),
    #[error("device name must be nonempty")]
    EmptyName,
    #[error("a device must advertise at least one capability")]
    NoCapabilities,
    #[error("device {uid} lacks the {needed:?} capability")]
    MissingCapability { uid: DeviceUid, needed: Capability },
    #[error("device {0} is disconnected")]
    Disconnected(DeviceUid),
    #[error("callback {name:?} is already registered on device {uid}")]
    DuplicateCallback { uid: DeviceUid, name: String },
    #[error("no callback {name:?} on device {uid}")]
    UnknownCallback { uid: DeviceUid, name: String },
    #[error("no callback with id {id} on device {uid}")]
    UnknownCallbackId { uid: DeviceUid, id: u16 },
    #[error("callback {name:?} on device {uid} faulted: {message}")]
    CallbackFault {
        uid: DeviceUid,
        name: String,
        message: String,
    },
    #[error("allocation size must be nonzero")]
    ZeroSize,
    #[error("stale or unknown memory handle {handle} on device {uid}")]
    StaleHandle { uid: DeviceUid, handle: u64 },
    #[error("access of {requested} bytes at offset {offset} exceeds region of {size} bytes")]
    OutOfBounds {
        requested: u64,
        offset: u64,
        size: u64,
    },
    #[error("device {uid} does not support {operation}")]
    Unsupported {
        uid: DeviceUid,
        operation: &'static str,
    },
    #[error("device {uid} ({name}) failed to connect: {message}")]
    ConnectFailed {
        uid: DeviceUid,
        name: String,
        message: String,
    },
    #[error("program rejected by device {uid}: {message}")]
    ProgramRejected { uid: DeviceUid, message: String },
    #[error("device {uid} faulted at pc {pc}: {message}")]
    DeviceFault {
        uid: DeviceUid,
        pc: u64,
        message: String,
    },
}
