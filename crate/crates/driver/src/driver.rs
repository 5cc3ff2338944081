use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use qlink_device_core::{
    BufferDescriptor, Capability, CapabilitySet, CallbackFn, ClockDomains, DeviceBehavior,
    DeviceInfo, DevicePtr, DeviceUid, Registry,
};
use qlink_rtlink::{measure_loopback, MeasureConfig, LOOPBACK_PAYLOAD_BYTES};

use crate::config::{parse_params, EchoParams, VppuParams};
use crate::devices::{DecoderState, EchoDevice, EchoTransportKind, HostDevice, InterpreterKind, VppuDevice};
use crate::{
    CollectiveExecutor, CompiledKernel, CompilerPlugin, DeviceConfig, DeviceKind, DriverConfig,
    DriverError, ExecutorPlugin, KernelHandle, KernelSource, PreparedLaunch, QcTarget, Value,
    ValueType,
};

/// Callback invocation with arguments and result staged in device memory
/// rather than passed by value: arguments are read-only for the duration
/// of the call, and the result region must be pre-allocated with exactly
/// the byte width the callee produces.
#[derive(Debug, Clone)]
pub struct CallbackRequest {
    pub target: DeviceUid,
    pub callback_name: String,
    pub args: Vec<DevicePtr>,
    pub result: Option<DevicePtr>,
}

/// Per-device outcome of a kernel launch.
#[derive(Debug, Clone)]
pub struct DeviceRunSummary {
    pub uid: DeviceUid,
    pub final_tick: u64,
    /// Final tick converted through the device's DTD tick width, when the
    /// device has one.
    pub dtd_time_ns: Option<u64>,
    pub trace_text: String,
}

#[derive(Debug, Clone)]
pub struct LaunchReport {
    pub kernel_name: String,
    pub devices: Vec<DeviceRunSummary>,
}

/// The logical-QPU driver. The real-time host is preregistered as device 0
/// with memory and callback capabilities; configured devices are registered
/// and connected by [`Driver::initialize`].
pub struct Driver {
    registry: Arc<Registry>,
    host: DeviceUid,
    initialized: Mutex<bool>,
    kernels: Mutex<HashMap<u64, CompiledKernel>>,
    next_kernel: AtomicU64,
    executor: Box<dyn ExecutorPlugin>,
    clock: ClockDomains,
    vppus: Mutex<HashMap<DeviceUid, Arc<VppuDevice>>>,
    decoders: Mutex<HashMap<DeviceUid, Arc<DecoderState>>>,
    echoes: Mutex<HashMap<DeviceUid, Arc<EchoDevice>>>,
}

impl Driver {
    pub fn new() -> Self {
        Self::with_executor(Box::new(CollectiveExecutor))
    }

    pub fn with_executor(executor: Box<dyn ExecutorPlugin>) -> Self {
        let registry = Arc::new(Registry::new());
        let host = registry
            .register_device(
                "host",
                CapabilitySet::of(&[Capability::DataMarshaling, Capability::DeviceCallback]),
                Arc::new(HostDevice),
            )
            .expect("host registration on a fresh registry");
        Driver {
            registry,
            host,
            initialized: Mutex::new(false),
            kernels: Mutex::new(HashMap::new()),
            next_kernel: AtomicU64::new(0),
            executor,
            clock: ClockDomains::default(),
            vppus: Mutex::new(HashMap::new()),
            decoders: Mutex::new(HashMap::new()),
            echoes: Mutex::new(HashMap::new()),
        }
    }

    /// Registers and connects every configured device, plus the host.
    /// Fails on a second call and on any device that cannot connect.
    pub fn initialize(&self, config: &DriverConfig) -> Result<(), DriverError> {
        {
            let mut initialized = self.initialized.lock().unwrap();
            if *initialized {
                return Err(DriverError::AlreadyInitialized);
            }
            *initialized = true;
        }
        self.registry.connect(self.host)?;
        for device in &config.devices {
            self.add_device(device)?;
        }
        Ok(())
    }

    fn add_device(&self, config: &DeviceConfig) -> Result<DeviceUid, DriverError> {
        let uid = match config.kind {
            DeviceKind::Vppu => {
                let params: VppuParams = parse_params(&config.params)?;
                let backend = qlink_vppu::RepetitionBackend::new(
                    params.n_data,
                    params.p_flip,
                    params.seed,
                );
                let interpreter = match params.interpreter.as_str() {
                    "standard" => InterpreterKind::Standard,
                    "reference" => InterpreterKind::Reference,
                    other => {
                        return Err(DriverError::Config(format!(
                            "unknown interpreter {other:?}"
                        )))
                    }
                };
                let device = Arc::new(
                    VppuDevice::new(backend, params.seed)
                        .with_limits(qlink_vppu::ExecLimits {
                            tick_budget: params.tick_budget,
                        })
                        .with_interpreter(interpreter)
                        .with_clock(ClockDomains::new(params.dtd_tick_ns)),
                );
                let uid = self.registry.register_device(
                    &config.name,
                    CapabilitySet::of(&[Capability::QuantumControl]),
                    device.clone(),
                )?;
                self.vppus.lock().unwrap().insert(uid, device);
                uid
            }
            DeviceKind::Decoder => {
                let state = DecoderState::new();
                let uid = self.registry.register_device(
                    &config.name,
                    CapabilitySet::of(&[Capability::DataMarshaling, Capability::DeviceCallback]),
                    Arc::new(HostDevice),
                )?;
                self.decoders.lock().unwrap().insert(uid, state);
                uid
            }
            DeviceKind::Echo => {
                let params: EchoParams = parse_params(&config.params)?;
                let transport = match params.transport.as_str() {
                    "inproc" => EchoTransportKind::Inproc,
                    "udp" => EchoTransportKind::Udp,
                    other => {
                        return Err(DriverError::Config(format!(
                            "unknown echo transport {other:?}"
                        )))
                    }
                };
                let device = Arc::new(EchoDevice::new(transport, params.bind));
                let uid = self.registry.register_device(
                    &config.name,
                    CapabilitySet::of(&[Capability::Rdma]),
                    device.clone(),
                )?;
                self.echoes.lock().unwrap().insert(uid, device);
                uid
            }
        };
        self.registry.connect(uid)?;
        if config.kind == DeviceKind::Decoder {
            self.wire_decoder_callbacks(uid)?;
        }
        Ok(uid)
    }

    /// Decoder callback table, in id order: 0 `enqueue_packed`,
    /// 1 `enqueue_sim`, 2 `enqueue_bits`, 3 `decode`, 4 `history_len`.
    fn wire_decoder_callbacks(&self, uid: DeviceUid) -> Result<(), DriverError> {
        let state = self
            .decoders
            .lock()
            .unwrap()
            .get(&uid)
            .cloned()
            .expect("decoder state registered with the device");

        let packed_state = state.clone();
        self.register_callback(
            uid,
            "enqueue_packed",
            Arc::new(move |args: &[Vec<u8>]| {
                let packed = decode_u64_arg(args)?;
                packed_state.push_packed(packed);
                Ok(Vec::new())
            }),
        )?;

        // Simulation-style path: the packed register value is re-marshaled
        // as a boolean vector and fed through the bit-vector entry, so both
        // enqueue encodings exercise distinct marshaling rules end to end.
        let sim_state = state.clone();
        let width = state.syndrome_width();
        self.register_callback(
            uid,
            "enqueue_sim",
            Arc::new(move |args: &[Vec<u8>]| {
                let packed = decode_u64_arg(args)?;
                let bits: Vec<bool> = (0..width).rev().map(|i| packed >> i & 1 == 1).collect();
                let encoded = Value::Bits(bits).encode();
                push_bits_encoded(&sim_state, &encoded)
            }),
        )?;

        let bits_state = state.clone();
        self.register_callback(
            uid,
            "enqueue_bits",
            Arc::new(move |args: &[Vec<u8>]| {
                let encoded = args.first().ok_or("enqueue_bits takes one argument")?;
                push_bits_encoded(&bits_state, encoded)
            }),
        )?;

        let decode_state = state.clone();
        self.register_callback(
            uid,
            "decode",
            Arc::new(move |_args: &[Vec<u8>]| {
                let flip = decode_state.decode_and_clear()?;
                Ok(vec![flip as u8])
            }),
        )?;

        let len_state = state;
        self.register_callback(
            uid,
            "history_len",
            Arc::new(move |_args: &[Vec<u8>]| {
                Ok((len_state.history_len() as u64).to_le_bytes().to_vec())
            }),
        )?;
        Ok(())
    }

    /// Registers a caller-provided device. It starts disconnected.
    pub fn register_device(
        &self,
        name: &str,
        capabilities: CapabilitySet,
        behavior: Arc<dyn DeviceBehavior>,
    ) -> Result<DeviceUid, DriverError> {
        Ok(self.registry.register_device(name, capabilities, behavior)?)
    }

    pub fn connect(&self, uid: DeviceUid) -> Result<(), DriverError> {
        Ok(self.registry.connect(uid)?)
    }

    pub fn disconnect(&self, uid: DeviceUid) -> Result<(), DriverError> {
        Ok(self.registry.disconnect(uid)?)
    }

    /// Disconnects every device, host last.
    pub fn shutdown(&self) -> Result<(), DriverError> {
        for uid in self.registry.uids().into_iter().rev() {
            self.registry.disconnect(uid)?;
        }
        Ok(())
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn host_uid(&self) -> DeviceUid {
        self.host
    }

    pub fn clock(&self) -> &ClockDomains {
        &self.clock
    }

    /// Configured devices, excluding the implicit host.
    pub fn device_count(&self) -> usize {
        self.registry.device_count() - 1
    }

    pub fn device_info(&self, uid: DeviceUid) -> Result<DeviceInfo, DriverError> {
        Ok(self.registry.info(uid)?)
    }

    pub fn find_device(&self, name: &str) -> Option<DeviceUid> {
        self.registry.find_by_name(name)
    }

    /// Typed access to a configured pulse-unit emulator, for error
    /// injection and backend configuration.
    pub fn vppu_device(&self, uid: DeviceUid) -> Option<Arc<VppuDevice>> {
        self.vppus.lock().unwrap().get(&uid).cloned()
    }

    pub fn decoder_state(&self, uid: DeviceUid) -> Option<Arc<DecoderState>> {
        self.decoders.lock().unwrap().get(&uid).cloned()
    }

    fn ensure_initialized(&self) -> Result<(), DriverError> {
        if *self.initialized.lock().unwrap() {
            Ok(())
        } else {
            Err(DriverError::NotInitialized)
        }
    }

    // --- memory ----------------------------------------------------------

    /// Allocates zero-initialized device memory; with no device given, the
    /// real-time host is targeted.
    pub fn malloc(
        &self,
        size_bytes: u64,
        device: Option<DeviceUid>,
    ) -> Result<DevicePtr, DriverError> {
        self.ensure_initialized()?;
        Ok(self.registry.alloc(device.unwrap_or(self.host), size_bytes)?)
    }

    pub fn free(&self, ptr: DevicePtr) -> Result<(), DriverError> {
        self.ensure_initialized()?;
        Ok(self.registry.free(ptr)?)
    }

    /// Copies exactly `size_bytes` from a host slice into device memory.
    pub fn memcpy_to_device(
        &self,
        dst: DevicePtr,
        src: &[u8],
        size_bytes: u64,
    ) -> Result<(), DriverError> {
        self.ensure_initialized()?;
        let len = size_bytes as usize;
        if len > src.len() {
            return Err(qlink_device_core::DeviceError::OutOfBounds {
                requested: size_bytes,
                offset: 0,
                size: src.len() as u64,
            }
            .into());
        }
        Ok(self.registry.write(dst, 0, &src[..len])?)
    }

    /// Copies exactly `size_bytes` of device memory back to the host.
    pub fn memcpy_from_device(
        &self,
        src: DevicePtr,
        size_bytes: u64,
    ) -> Result<Vec<u8>, DriverError> {
        self.ensure_initialized()?;
        Ok(self.registry.read(src, 0, size_bytes)?)
    }

    /// Device-to-device copy, routed through the host.
    pub fn memcpy(
        &self,
        dst: DevicePtr,
        src: DevicePtr,
        size_bytes: u64,
    ) -> Result<(), DriverError> {
        self.ensure_initialized()?;
        let staged = self.registry.read(src, 0, size_bytes)?;
        Ok(self.registry.write(dst, 0, &staged)?)
    }

    // --- callbacks -------------------------------------------------------

    pub fn register_callback(
        &self,
        target: DeviceUid,
        name: &str,
        callback: CallbackFn,
    ) -> Result<u16, DriverError> {
        Ok(self.registry.register_callback(target, name, callback)?)
    }

    /// Synchronous callback invocation with typed marshaling. The caller
    /// resumes only after the callee has completed; argument buffers are
    /// immutable for the duration of the call.
    pub fn device_call(
        &self,
        target: DeviceUid,
        callback_name: &str,
        args: &[Value],
        result_type: Option<ValueType>,
    ) -> Result<Option<Value>, DriverError> {
        let encoded: Vec<Vec<u8>> = args.iter().map(Value::encode).collect();
        let raw = self.registry.invoke_callback(target, callback_name, &encoded)?;
        match result_type {
            None => Ok(None),
            Some(ty) => {
                let value = Value::decode(ty, &raw).map_err(|_| {
                    DriverError::ResultTypeMismatch {
                        target,
                        expected: ty,
                        got: raw.len(),
                    }
                })?;
                Ok(Some(value))
            }
        }
    }

    /// Invokes a callback with its arguments read out of device memory and
    /// its result written into the pre-allocated result region, which must
    /// match the callee's output size exactly.
    pub fn device_call_request(&self, request: &CallbackRequest) -> Result<(), DriverError> {
        let mut buffers = Vec::with_capacity(request.args.len());
        for arg in &request.args {
            buffers.push(self.registry.read(*arg, 0, arg.size_bytes)?);
        }
        let out =
            self.registry
                .invoke_callback(request.target, &request.callback_name, &buffers)?;
        if let Some(ptr) = request.result {
            if out.len() as u64 != ptr.size_bytes {
                return Err(DriverError::ResultSizeMismatch {
                    expected: out.len() as u64,
                    got: ptr.size_bytes,
                });
            }
            self.registry.write(ptr, 0, &out)?;
        }
        Ok(())
    }

    /// Raw dispatch path used by running programs: callback addressed by
    /// numeric id, arguments already encoded.
    pub fn device_call_raw(
        &self,
        target: DeviceUid,
        callback_id: u16,
        args: &[Vec<u8>],
    ) -> Result<Vec<u8>, DriverError> {
        Ok(self.registry.invoke_callback_by_id(target, callback_id, args)?)
    }

    // --- kernels ---------------------------------------------------------

    fn qc_targets(&self) -> Vec<QcTarget> {
        self.registry
            .uids()
            .into_iter()
            .filter_map(|uid| {
                let info = self.registry.info(uid).ok()?;
                if !info.capabilities.contains(Capability::QuantumControl) {
                    return None;
                }
                Some(QcTarget {
                    uid,
                    name: info.name,
                })
            })
            .collect()
    }

    /// Compiles or loads a kernel through the given compiler plugin and
    /// stores it under a fresh handle.
    pub fn load_kernel(
        &self,
        source: KernelSource<'_>,
        compiler: &dyn CompilerPlugin,
    ) -> Result<KernelHandle, DriverError> {
        self.ensure_initialized()?;
        let targets = self.qc_targets();
        let kernel = match source {
            KernelSource::Precompiled(binary) => compiler.load_precompiled(binary, &targets)?,
            KernelSource::Text(text) => compiler.jit_compile(text, &targets)?,
        };
        if kernel.kernel_name.is_empty() {
            return Err(DriverError::EmptyKernelName);
        }
        let mut seen = std::collections::HashSet::new();
        for program in &kernel.programs {
            if !seen.insert(program.target) {
                return Err(DriverError::DuplicateTarget(program.target));
            }
            self.registry
                .require_capability(program.target, Capability::QuantumControl)?;
            self.registry
                .behavior(program.target)?
                .validate_program(program.target, &program.binary)?;
        }
        let handle = self.next_kernel.fetch_add(1, Ordering::Relaxed);
        self.kernels.lock().unwrap().insert(handle, kernel);
        Ok(KernelHandle(handle))
    }

    pub fn kernel(&self, handle: KernelHandle) -> Option<CompiledKernel> {
        self.kernels.lock().unwrap().get(&handle.0).cloned()
    }

    /// Uploads every program of the kernel, then triggers all targets
    /// through the executor and blocks until they halt. Upload is atomic
    /// with respect to triggering: if any upload fails, nothing runs.
    pub fn launch_kernel(
        &self,
        handle: KernelHandle,
        args: &[DevicePtr],
        result: Option<DevicePtr>,
    ) -> Result<LaunchReport, DriverError> {
        self.ensure_initialized()?;
        let kernel = self
            .kernels
            .lock()
            .unwrap()
            .get(&handle.0)
            .cloned()
            .ok_or(DriverError::InvalidKernelHandle)?;

        let expected = kernel.result_bytes;
        let got = result.map(|r| r.size_bytes).unwrap_or(0);
        if expected != got {
            return Err(DriverError::ResultSizeMismatch { expected, got });
        }

        if args.len() > 15 {
            return Err(DriverError::TooManyArgs(args.len()));
        }
        let mut reg_args = Vec::with_capacity(args.len());
        for (index, arg) in args.iter().enumerate() {
            if arg.size_bytes > 8 {
                return Err(DriverError::ArgTooWide {
                    index,
                    size: arg.size_bytes,
                });
            }
            let bytes = self.registry.read(*arg, 0, arg.size_bytes)?;
            let mut raw = [0u8; 8];
            raw[..bytes.len()].copy_from_slice(&bytes);
            reg_args.push(u64::from_le_bytes(raw));
        }

        // Upload phase. Any failure aborts before anything is triggered.
        let mut launches: Vec<PreparedLaunch> = Vec::with_capacity(kernel.programs.len());
        for program in &kernel.programs {
            if !self.registry.is_connected(program.target)? {
                self.abort_uploads(&launches);
                return Err(qlink_device_core::DeviceError::Disconnected(program.target).into());
            }
            let behavior = self.registry.behavior(program.target)?;
            match behavior.upload_program(program.target, &program.binary) {
                Ok(slot) => launches.push(PreparedLaunch {
                    uid: program.target,
                    slot,
                }),
                Err(e) => {
                    self.abort_uploads(&launches);
                    return Err(e.into());
                }
            }
        }

        let bridge = |device: u16, callback_id: u16, arg: u64| -> Result<Vec<u8>, String> {
            self.device_call_raw(
                DeviceUid(device as u64),
                callback_id,
                &[arg.to_le_bytes().to_vec()],
            )
            .map_err(|e| e.to_string())
        };
        let outputs = self
            .executor
            .execute(&self.registry, &launches, &bridge, &reg_args)?;

        if let Some(result_ptr) = result {
            // Result convention: the first program's result register, low
            // `result_bytes` bytes.
            if let Some((_, output)) = outputs.first() {
                self.registry
                    .write(result_ptr, 0, &output.result[..expected as usize])?;
            }
        }

        let vppus = self.vppus.lock().unwrap();
        Ok(LaunchReport {
            kernel_name: kernel.kernel_name.clone(),
            devices: outputs
                .into_iter()
                .map(|(uid, output)| DeviceRunSummary {
                    uid,
                    final_tick: output.final_tick,
                    dtd_time_ns: vppus
                        .get(&uid)
                        .map(|device| device.clock().dtd_time_ns(output.final_tick)),
                    trace_text: String::from_utf8_lossy(&output.trace).into_owned(),
                })
                .collect(),
        })
    }

    fn abort_uploads(&self, staged: &[PreparedLaunch]) {
        for launch in staged {
            if let Ok(behavior) = self.registry.behavior(launch.uid) {
                behavior.discard_program(launch.uid, launch.slot);
            }
        }
    }

    // --- latency harness and RDMA seam ------------------------------------

    /// Measures `n_samples` round trips against an echo device and returns
    /// every per-sample latency in nanoseconds, in send order. Lost packets
    /// are an error, never silently aggregated away.
    pub fn measure_roundtrip_latency(
        &self,
        target: DeviceUid,
        n_samples: u64,
        payload_bytes: usize,
    ) -> Result<Vec<u64>, DriverError> {
        self.ensure_initialized()?;
        let echo = self
            .echoes
            .lock()
            .unwrap()
            .get(&target)
            .cloned()
            .ok_or(DriverError::NotAnEchoDevice(target))?;
        if !self.registry.is_connected(target)? {
            return Err(qlink_device_core::DeviceError::Disconnected(target).into());
        }
        let pair = echo.make_transport()?;
        let outcome = measure_loopback(
            pair,
            &MeasureConfig {
                n_packets: n_samples,
                interval_ns: 0,
                payload_bytes: payload_bytes.max(LOOPBACK_PAYLOAD_BYTES),
                idle_timeout: Duration::from_millis(500),
            },
        )?;
        if !outcome.gaps.is_empty() {
            return Err(DriverError::TransportLoss {
                missing: outcome.gaps.len(),
                sent: n_samples,
            });
        }
        Ok(outcome.samples.iter().map(|s| s.rtt_ns).collect())
    }

    /// RDMA handshake stub: buffer descriptors from an rdma-capable device.
    pub fn rdma_handshake(&self, target: DeviceUid) -> Result<Vec<BufferDescriptor>, DriverError> {
        self.ensure_initialized()?;
        self.registry.require_capability(target, Capability::Rdma)?;
        Ok(self.registry.behavior(target)?.rdma_descriptors(target)?)
    }
}

impl Default for Driver {
    fn default() -> Self {
        Self::new()
    }
}

fn decode_u64_arg(args: &[Vec<u8>]) -> Result<u64, String> {
    let first = args.first().ok_or("expected one argument")?;
    if first.len() != 8 {
        return Err(format!("expected an 8-byte argument, got {}", first.len()));
    }
    Ok(u64::from_le_bytes(first.as_slice().try_into().unwrap()))
}

fn push_bits_encoded(state: &DecoderState, encoded: &[u8]) -> Result<Vec<u8>, String> {
    match Value::decode(ValueType::Bits, encoded) {
        Ok(Value::Bits(bits)) if bits.len() == state.syndrome_width() => {
            state.push_bits(bits);
            Ok(Vec::new())
        }
        Ok(Value::Bits(bits)) => Err(format!(
            "expected {} syndrome bits, got {}",
            state.syndrome_width(),
            bits.len()
        )),
        Ok(_) => unreachable!("decode(Bits) yields Bits"),
        Err(e) => Err(e.to_string()),
    }
}
