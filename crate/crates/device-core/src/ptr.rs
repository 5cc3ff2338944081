use crate::DeviceUid;

/// Typed handle to a byte region living on one device.
///
/// A `DevicePtr` never carries the bytes themselves; it names an allocation
/// in the registry. Handles are unique per device among live allocations,
/// and any use after `free` is rejected as a stale handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DevicePtr {
    pub device: DeviceUid,
    pub handle: u64,
    pub size_bytes: u64,
}

impl DevicePtr {
    pub fn new(device: DeviceUid, handle: u64, size_bytes: u64) -> Self {
        debug_assert!(size_bytes > 0);
        DevicePtr {
            device,
            handle,
            size_bytes,
        }
    }
}

impl std::fmt::Display for DevicePtr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}#{}[{}B]", self.device, self.handle, self.size_bytes)
    }
}
