use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use crate::{
    Capability, CapabilitySet, CallbackFn, DeviceBehavior, DeviceError, DevicePtr, DeviceUid,
};

struct DeviceState {
    connected: bool,
    /// Callback table in registration order; the index is the callback id.
    callbacks: Vec<(String, CallbackFn)>,
    allocations: HashMap<u64, Vec<u8>>,
    next_handle: u64,
}

struct DeviceEntry {
    uid: DeviceUid,
    name: String,
    caps: CapabilitySet,
    behavior: Arc<dyn DeviceBehavior>,
    state: Mutex<DeviceState>,
    /// Serializes calls targeting this device, in arrival order.
    call_lock: Mutex<()>,
}

/// Snapshot of one device's public record.
#[derive(Debug, Clone)]
pub struct DeviceInfo {
    pub uid: DeviceUid,
    pub name: String,
    pub capabilities: CapabilitySet,
    pub connected: bool,
    pub kind: &'static str,
    pub callback_names: Vec<String>,
}

/// Thread-safe device registry.
///
/// Registration, lookup, connect/disconnect, callback dispatch, and memory
/// management may all be driven concurrently. Uids come from a counter that
/// only moves forward, so they are strictly increasing in registration order
/// and never reused; a device keeps its uid across disconnect/reconnect
/// cycles.
pub struct Registry {
    devices: RwLock<Vec<Arc<DeviceEntry>>>,
}

impl Registry {
    pub fn new() -> Self {
        Registry {
            devices: RwLock::new(Vec::new()),
        }
    }

    fn entry(&self, uid: DeviceUid) -> Result<Arc<DeviceEntry>, DeviceError> {
        let devices = self.devices.read().unwrap();
        devices
            .get(uid.0 as usize)
            .cloned()
            .ok_or(DeviceError::UnknownDevice(uid))
    }

    pub fn register_device(
        &self,
        name: &str,
        capabilities: CapabilitySet,
        behavior: Arc<dyn DeviceBehavior>,
    ) -> Result<DeviceUid, DeviceError> {
        if name.is_empty() {
            return Err(DeviceError::EmptyName);
        }
        if capabilities.is_empty() {
            return Err(DeviceError::NoCapabilities);
        }
        let mut devices = self.devices.write().unwrap();
        if devices.iter().any(|d| d.name == name) {
            return Err(DeviceError::DuplicateName(name.to_string()));
        }
        let uid = DeviceUid(devices.len() as u64);
        devices.push(Arc::new(DeviceEntry {
            uid,
            name: name.to_string(),
            caps: capabilities,
            behavior,
            state: Mutex::new(DeviceState {
                connected: false,
                callbacks: Vec::new(),
                allocations: HashMap::new(),
                next_handle: 0,
            }),
            call_lock: Mutex::new(()),
        }));
        Ok(uid)
    }

    /// Idempotent: connecting a connected device is a no-op.
    pub fn connect(&self, uid: DeviceUid) -> Result<(), DeviceError> {
        let entry = self.entry(uid)?;
        let mut state = entry.state.lock().unwrap();
        if state.connected {
            return Ok(());
        }
        entry
            .behavior
            .on_connect()
            .map_err(|message| DeviceError::ConnectFailed {
                uid,
                name: entry.name.clone(),
                message,
            })?;
        state.connected = true;
        Ok(())
    }

    /// Disconnecting releases every live allocation of the device.
    pub fn disconnect(&self, uid: DeviceUid) -> Result<(), DeviceError> {
        let entry = self.entry(uid)?;
        let mut state = entry.state.lock().unwrap();
        if !state.connected {
            return Ok(());
        }
        state.allocations.clear();
        state.connected = false;
        entry
            .behavior
            .on_disconnect()
            .map_err(|message| DeviceError::ConnectFailed {
                uid,
                name: entry.name.clone(),
                message,
            })
    }

    pub fn is_connected(&self, uid: DeviceUid) -> Result<bool, DeviceError> {
        Ok(self.entry(uid)?.state.lock().unwrap().connected)
    }

    pub fn info(&self, uid: DeviceUid) -> Result<DeviceInfo, DeviceError> {
        let entry = self.entry(uid)?;
        let state = entry.state.lock().unwrap();
        Ok(DeviceInfo {
            uid: entry.uid,
            name: entry.name.clone(),
            capabilities: entry.caps,
            connected: state.connected,
            kind: entry.behavior.kind(),
            callback_names: state.callbacks.iter().map(|(n, _)| n.clone()).collect(),
        })
    }

    pub fn device_count(&self) -> usize {
        self.devices.read().unwrap().len()
    }

    pub fn uids(&self) -> Vec<DeviceUid> {
        self.devices
            .read()
            .unwrap()
            .iter()
            .map(|d| d.uid)
            .collect()
    }

    pub fn find_by_name(&self, name: &str) -> Option<DeviceUid> {
        self.devices
            .read()
            .unwrap()
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.uid)
    }

    pub fn capabilities(&self, uid: DeviceUid) -> Result<CapabilitySet, DeviceError> {
        Ok(self.entry(uid)?.caps)
    }

    pub fn require_capability(&self, uid: DeviceUid, needed: Capability) -> Result<(), DeviceError> {
        if self.entry(uid)?.caps.contains(needed) {
            Ok(())
        } else {
            Err(DeviceError::MissingCapability { uid, needed })
        }
    }

    pub fn behavior(&self, uid: DeviceUid) -> Result<Arc<dyn DeviceBehavior>, DeviceError> {
        Ok(self.entry(uid)?.behavior.clone())
    }

    /// Runs `f` while holding the device's call lock. Calls targeting the
    /// same device are thereby serialized in arrival order.
    pub fn with_call_lock<R>(
        &self,
        uid: DeviceUid,
        f: impl FnOnce() -> R,
    ) -> Result<R, DeviceError> {
        let entry = self.entry(uid)?;
        let _guard = entry.call_lock.lock().unwrap();
        Ok(f())
    }

    // --- callbacks ------------------------------------------------------

    /// Registers a callback under a per-device unique name. Returns the
    /// callback id (position in registration order), which a pulse program
    /// can use to address the callback numerically.
    pub fn register_callback(
        &self,
        uid: DeviceUid,
        name: &str,
        callback: CallbackFn,
    ) -> Result<u16, DeviceError> {
        self.require_capability(uid, Capability::DeviceCallback)?;
        let entry = self.entry(uid)?;
        let mut state = entry.state.lock().unwrap();
        if !state.connected {
            return Err(DeviceError::Disconnected(uid));
        }
        if state.callbacks.iter().any(|(n, _)| n == name) {
            return Err(DeviceError::DuplicateCallback {
                uid,
                name: name.to_string(),
            });
        }
        let id = state.callbacks.len() as u16;
        state.callbacks.push((name.to_string(), callback));
        Ok(id)
    }

    pub fn callback_id(&self, uid: DeviceUid, name: &str) -> Result<u16, DeviceError> {
        let entry = self.entry(uid)?;
        let state = entry.state.lock().unwrap();
        state
            .callbacks
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| i as u16)
            .ok_or_else(|| DeviceError::UnknownCallback {
                uid,
                name: name.to_string(),
            })
    }

    fn resolve_callback(
        &self,
        uid: DeviceUid,
        id: u16,
    ) -> Result<(String, CallbackFn), DeviceError> {
        let entry = self.entry(uid)?;
        let state = entry.state.lock().unwrap();
        if !state.connected {
            return Err(DeviceError::Disconnected(uid));
        }
        state
            .callbacks
            .get(id as usize)
            .map(|(n, f)| (n.clone(), f.clone()))
            .ok_or(DeviceError::UnknownCallbackId { uid, id })
    }

    /// Invokes a callback by name, synchronously, under the device's call
    /// lock. The caller resumes only after the callee has completed.
    pub fn invoke_callback(
        &self,
        uid: DeviceUid,
        name: &str,
        args: &[Vec<u8>],
    ) -> Result<Vec<u8>, DeviceError> {
        self.require_capability(uid, Capability::DeviceCallback)?;
        let id = self.callback_id(uid, name)?;
        self.invoke_callback_by_id(uid, id, args)
    }

    pub fn invoke_callback_by_id(
        &self,
        uid: DeviceUid,
        id: u16,
        args: &[Vec<u8>],
    ) -> Result<Vec<u8>, DeviceError> {
        self.require_capability(uid, Capability::DeviceCallback)?;
        let (name, callback) = self.resolve_callback(uid, id)?;
        let entry = self.entry(uid)?;
        let _guard = entry.call_lock.lock().unwrap();
        callback(args).map_err(|message| DeviceError::CallbackFault { uid, name, message })
    }

    // --- device memory ---------------------------------------------------

    /// Allocates a zero-initialized region of exactly `size_bytes` bytes.
    pub fn alloc(&self, uid: DeviceUid, size_bytes: u64) -> Result<DevicePtr, DeviceError> {
        if size_bytes == 0 {
            return Err(DeviceError::ZeroSize);
        }
        self.require_capability(uid, Capability::DataMarshaling)?;
        let entry = self.entry(uid)?;
        let mut state = entry.state.lock().unwrap();
        if !state.connected {
            return Err(DeviceError::Disconnected(uid));
        }
        let handle = state.next_handle;
        state.next_handle += 1;
        state.allocations.insert(handle, vec![0u8; size_bytes as usize]);
        Ok(DevicePtr::new(uid, handle, size_bytes))
    }

    pub fn free(&self, ptr: DevicePtr) -> Result<(), DeviceError> {
        let entry = self.entry(ptr.device)?;
        let mut state = entry.state.lock().unwrap();
        if !state.connected {
            return Err(DeviceError::Disconnected(ptr.device));
        }
        state
            .allocations
            .remove(&ptr.handle)
            .map(|_| ())
            .ok_or(DeviceError::StaleHandle {
                uid: ptr.device,
                handle: ptr.handle,
            })
    }

    fn check_bounds(len: u64, offset: u64, requested: u64) -> Result<(), DeviceError> {
        if offset.checked_add(requested).is_none_or(|end| end > len) {
            Err(DeviceError::OutOfBounds {
                requested,
                offset,
                size: len,
            })
        } else {
            Ok(())
        }
    }

    pub fn write(&self, ptr: DevicePtr, offset: u64, bytes: &[u8]) -> Result<(), DeviceError> {
        let entry = self.entry(ptr.device)?;
        let mut state = entry.state.lock().unwrap();
        if !state.connected {
            return Err(DeviceError::Disconnected(ptr.device));
        }
        let region = state
            .allocations
            .get_mut(&ptr.handle)
            .ok_or(DeviceError::StaleHandle {
                uid: ptr.device,
                handle: ptr.handle,
            })?;
        Self::check_bounds(region.len() as u64, offset, bytes.len() as u64)?;
        region[offset as usize..offset as usize + bytes.len()].copy_from_slice(bytes);
        Ok(())
    }

    pub fn read(&self, ptr: DevicePtr, offset: u64, len: u64) -> Result<Vec<u8>, DeviceError> {
        let entry = self.entry(ptr.device)?;
        let state = entry.state.lock().unwrap();
        if !state.connected {
            return Err(DeviceError::Disconnected(ptr.device));
        }
        let region = state
            .allocations
            .get(&ptr.handle)
            .ok_or(DeviceError::StaleHandle {
                uid: ptr.device,
                handle: ptr.handle,
            })?;
        Self::check_bounds(region.len() as u64, offset, len)?;
        Ok(region[offset as usize..(offset + len) as usize].to_vec())
    }

    pub fn live_allocations(&self, uid: DeviceUid) -> Result<usize, DeviceError> {
        Ok(self.entry(uid)?.state.lock().unwrap().allocations.len())
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GenericBehavior;

    fn caps_all() -> CapabilitySet {
        CapabilitySet::of(&Capability::ALL)
    }

    fn behavior() -> Arc<dyn DeviceBehavior> {
        Arc::new(GenericBehavior::new("test"))
    }

    #[test]
    fn uid_counter_starts_at_zero() {
        let reg = Registry::new();
        let a = reg
            .register_device("a", caps_all(), behavior())
            .unwrap();
        let b = reg
            .register_device("b", caps_all(), behavior())
            .unwrap();
        assert_eq!(a, DeviceUid(0));
        assert_eq!(b, DeviceUid(1));
    }

    #[test]
    fn duplicate_name_rejected() {
        let reg = Registry::new();
        reg.register_device("a", caps_all(), behavior()).unwrap();
        assert_eq!(
            reg.register_device("a", caps_all(), behavior()),
            Err(DeviceError::DuplicateName("a".into()))
        );
    }

    #[test]
    fn empty_name_and_empty_caps_rejected() {
        let reg = Registry::new();
        assert_eq!(
            reg.register_device("", caps_all(), behavior()),
            Err(DeviceError::EmptyName)
        );
        assert_eq!(
            reg.register_device("x", CapabilitySet::empty(), behavior()),
            Err(DeviceError::NoCapabilities)
        );
    }

    #[test]
    fn connect_is_idempotent() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        assert!(!reg.is_connected(uid).unwrap());
        reg.connect(uid).unwrap();
        reg.connect(uid).unwrap();
        assert!(reg.is_connected(uid).unwrap());
    }

    #[test]
    fn unknown_uid_errors() {
        let reg = Registry::new();
        assert_eq!(
            reg.connect(DeviceUid(7)),
            Err(DeviceError::UnknownDevice(DeviceUid(7)))
        );
    }

    #[test]
    fn malloc_while_disconnected_fails() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        reg.disconnect(uid).unwrap();
        assert_eq!(reg.alloc(uid, 32), Err(DeviceError::Disconnected(uid)));
    }

    #[test]
    fn disconnect_releases_all_allocations() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        for _ in 0..3 {
            reg.alloc(uid, 16).unwrap();
        }
        assert_eq!(reg.live_allocations(uid).unwrap(), 3);
        reg.disconnect(uid).unwrap();
        assert_eq!(reg.live_allocations(uid).unwrap(), 0);
    }

    #[test]
    fn alloc_zero_initializes() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        let ptr = reg.alloc(uid, 32).unwrap();
        assert_eq!(reg.read(ptr, 0, 32).unwrap(), vec![0u8; 32]);
    }

    #[test]
    fn double_free_is_stale() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        let ptr = reg.alloc(uid, 8).unwrap();
        reg.free(ptr).unwrap();
        assert_eq!(
            reg.free(ptr),
            Err(DeviceError::StaleHandle {
                uid,
                handle: ptr.handle
            })
        );
    }

    #[test]
    fn out_of_bounds_write_rejected() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        let ptr = reg.alloc(uid, 32).unwrap();
        let err = reg.write(ptr, 0, &[0u8; 33]).unwrap_err();
        assert!(matches!(err, DeviceError::OutOfBounds { .. }));
    }

    #[test]
    fn callback_requires_capability() {
        let reg = Registry::new();
        let uid = reg
            .register_device(
                "qc-only",
                CapabilitySet::empty().with(Capability::QuantumControl),
                behavior(),
            )
            .unwrap();
        reg.connect(uid).unwrap();
        let err = reg
            .register_callback(uid, "add", Arc::new(|_args| Ok(Vec::new())))
            .unwrap_err();
        assert_eq!(
            err,
            DeviceError::MissingCapability {
                uid,
                needed: Capability::DeviceCallback
            }
        );
    }

    #[test]
    fn duplicate_callback_rejected() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        reg.register_callback(uid, "add", Arc::new(|_| Ok(Vec::new())))
            .unwrap();
        let err = reg
            .register_callback(uid, "add", Arc::new(|_| Ok(Vec::new())))
            .unwrap_err();
        assert!(matches!(err, DeviceError::DuplicateCallback { .. }));
    }

    #[test]
    fn callback_ids_follow_registration_order() {
        let reg = Registry::new();
        let uid = reg.register_device("a", caps_all(), behavior()).unwrap();
        reg.connect(uid).unwrap();
        let first = reg
            .register_callback(uid, "one", Arc::new(|_| Ok(vec![1])))
            .unwrap();
        let second = reg
            .register_callback(uid, "two", Arc::new(|_| Ok(vec![2])))
            .unwrap();
        assert_eq!((first, second), (0, 1));
        assert_eq!(reg.invoke_callback_by_id(uid, 1, &[]).unwrap(), vec![2]);
        assert_eq!(reg.invoke_callback(uid, "one", &[]).unwrap(), vec![1]);
    }
}
