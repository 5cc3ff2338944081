use std::sync::Arc;

use crate::{DeviceError, DeviceUid};

/// A registered callback: any number of byte-buffer arguments in, one byte
/// buffer out. Typed marshaling is layered above this boundary.
pub type CallbackFn = Arc<dyn Fn(&[Vec<u8>]) -> Result<Vec<u8>, String> + Send + Sync>;

/// Token for a staged program, returned by `upload_program` and consumed by
/// `trigger`. Staging and triggering are separate so that a multi-device
/// launch can upload everything before triggering anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProgramSlot(pub u64);

/// Descriptor of a device-exposed memory buffer, produced by the RDMA
/// handshake stub. No hardware transport backs these; the handshake seam is
/// what higher layers depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BufferDescriptor {
    pub addr: u64,
    pub len: u64,
    pub rkey: u32,
}

/// Dispatch context handed to a quantum-control device when it is triggered.
pub struct TriggerContext<'a> {
    /// Routes callback sends issued mid-program back into the runtime.
    /// `(device, callback_id, arg)` → callback result bytes.
    pub bridge: &'a (dyn Fn(u16, u16, u64) -> Result<Vec<u8>, String> + Sync),
    /// Kernel arguments, preloaded into the device's low registers.
    pub args: Vec<u64>,
}

/// What a triggered program produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerOutput {
    /// Raw 8-byte result register contents at halt, little-endian.
    pub result: [u8; 8],
    /// Final deterministic-domain tick count.
    pub final_tick: u64,
    /// Serialized event trace for inspection; format is device-specific.
    pub trace: Vec<u8>,
}

/// Behavior implementation backing a registered device.
///
/// Every method has an "unsupported" default so plain devices (the host, an
/// echo endpoint) implement only what they advertise. The registry enforces
/// capability gating before these are reached; the defaults are a second
/// line of defense for direct use.
pub trait DeviceBehavior: Send + Sync {
    /// Short device kind for diagnostics, e.g. "vppu" or "echo".
    fn kind(&self) -> &'static str {
        "generic"
    }

    /// One-time initialization hook; called on the disconnected→connected edge.
    fn on_connect(&self) -> Result<(), String> {
        Ok(())
    }

    /// Finalization hook; called on the connected→disconnected edge.
    fn on_disconnect(&self) -> Result<(), String> {
        Ok(())
    }

    /// Validates that `binary` decodes under this device's program decoder.
    fn validate_program(&self, uid: DeviceUid, binary: &[u8]) -> Result<(), DeviceError> {
        let _ = binary;
        Err(DeviceError::Unsupported {
            uid,
            operation: "program validation",
        })
    }

    /// Stages a program for a later trigger.
    fn upload_program(&self, uid: DeviceUid, binary: &[u8]) -> Result<ProgramSlot, DeviceError> {
        let _ = binary;
        Err(DeviceError::Unsupported {
            uid,
            operation: "program upload",
        })
    }

    /// Drops a staged program that will not be triggered (e.g. the launch
    /// was aborted after this upload).
    fn discard_program(&self, uid: DeviceUid, slot: ProgramSlot) {
        let _ = (uid, slot);
    }

    /// Runs a previously staged program to completion.
    fn trigger(
        &self,
        uid: DeviceUid,
        slot: ProgramSlot,
        ctx: TriggerContext<'_>,
    ) -> Result<TriggerOutput, DeviceError> {
        let _ = (slot, ctx);
        Err(DeviceError::Unsupported {
            uid,
            operation: "program trigger",
        })
    }

    /// RDMA handshake stub: exposes buffer descriptors for one-time setup.
    fn rdma_descriptors(&self, uid: DeviceUid) -> Result<Vec<BufferDescriptor>, DeviceError> {
        Err(DeviceError::Unsupported {
            uid,
            operation: "rdma handshake",
        })
    }

    /// True if the runtime must serialize all calls into this behavior.
    fn single_threaded(&self) -> bool {
        false
    }
}

/// No-op behavior for devices that are pure memory/callback endpoints.
#[derive(Debug, Default)]
pub struct GenericBehavior {
    kind: &'static str,
}

impl GenericBehavior {
    pub fn new(kind: &'static str) -> Self {
        GenericBehavior { kind }
    }
}

impl DeviceBehavior for GenericBehavior {
    fn kind(&self) -> &'static str {
        if self.kind.is_empty() {
            "generic"
        } else {
            self.kind
        }
    }
}
