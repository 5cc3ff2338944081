use qlink_device_core::DeviceUid;

/// One binary program bound to one quantum-control device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QControlProgram {
    pub target: DeviceUid,
    pub binary: Vec<u8>,
}

/// A compiled kernel: a name, one program per target device, and the byte
/// width of the value the kernel returns (0 for none). The width is
/// declared by the compiler so launches can size-check result buffers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledKernel {
    pub kernel_name: String,
    pub programs: Vec<QControlProgram>,
    pub result_bytes: u64,
}

/// Handle to a loaded kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelHandle(pub u64);

/// Kernel input: a prebuilt binary or source text for a JIT-capable
/// compiler plugin.
#[derive(Debug, Clone, Copy)]
pub enum KernelSource<'a> {
    Precompiled(&'a [u8]),
    Text(&'a str),
}
