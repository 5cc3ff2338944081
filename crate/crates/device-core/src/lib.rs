//! Machine model for a tightly coupled HPC/quantum-control runtime.
//!
//! This crate defines the device layer everything else builds on: unique
//! device identities, runtime-queryable capability sets, a thread-safe
//! registry with connect/disconnect lifecycle, per-device callback tables,
//! and device-resident memory with stale-handle detection. Higher layers
//! (the driver API, the pulse-processor emulator, the interconnect) treat
//! every compute resource — including the host itself — as a registered
//! device here.

mod capability;
mod clock;
mod device;
mod error;
mod ptr;
mod registry;

pub use capability::{Capability, CapabilitySet};
pub use clock::ClockDomains;
pub use device::{
    BufferDescriptor, CallbackFn, DeviceBehavior, GenericBehavior, ProgramSlot, TriggerContext,
    TriggerOutput,
};
pub use error::DeviceError;
pub use ptr::DevicePtr;
pub use registry::{DeviceInfo, Registry};

/// Unique identifier of a registered device.
///
/// Assigned from a monotonically increasing counter at registration time and
/// never reused within a process lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeviceUid(pub u64);

impl DeviceUid {
    pub fn value(self) -> u64 {
        self.0
    }
}

impl std::fmt::Display for DeviceUid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "dev{}", self.0)
    }
}
