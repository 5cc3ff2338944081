//! Logical-QPU driver API.
//!
//! One instance owns a device registry with the real-time host preregistered
//! as device 0, and exposes the driver surface: initialization from a device
//! configuration, memory management through device pointers, kernel loading
//! through pluggable compilers, collective kernel launch through an executor,
//! synchronous `device_call` dispatch with typed argument marshaling, and a
//! round-trip latency harness against echo devices.

mod compiler;
mod config;
mod devices;
mod driver;
mod error;
mod executor;
mod kernel;
mod marshal;

pub use compiler::{CompilerPlugin, QcTarget, VppuAssemblyCompiler};
pub use config::{DeviceConfig, DeviceKind, DriverConfig, CONFIG_ENV_VAR};
pub use devices::{
    DecoderState, EchoDevice, EchoTransportKind, HostDevice, InterpreterKind, VppuDevice,
};
pub use driver::{CallbackRequest, DeviceRunSummary, Driver, LaunchReport};
pub use error::{CompileError, DriverError, MarshalError};
pub use executor::{CollectiveExecutor, ExecutorPlugin, PreparedLaunch};
pub use kernel::{CompiledKernel, KernelHandle, KernelSource, QControlProgram};
pub use marshal::{Value, ValueType};

pub use qlink_device_core::{
    BufferDescriptor, Capability, CapabilitySet, CallbackFn, DeviceBehavior, DevicePtr, DeviceUid,
    Registry,
};
