use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use qlink_device_core::{
    BufferDescriptor, ClockDomains, DeviceBehavior, DeviceError, DeviceUid, ProgramSlot,
    TriggerContext, TriggerOutput,
};
use qlink_rtlink::{EchoHandle, InprocEcho, NoDrops, RtError, TransportPair};
use qlink_vppu::{
    decode_program, CallbackBridge, ExecLimits, Instruction, PhysicalBackend, RepetitionBackend,
    VppuState,
};

/// The real-time host as a device: plain memory and callback endpoint.
#[derive(Debug, Default)]
pub struct HostDevice;

impl DeviceBehavior for HostDevice {
    fn kind(&self) -> &'static str {
        "host"
    }
}

/// Which interpreter executes uploaded programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpreterKind {
    Standard,
    Reference,
}

/// Pulse-unit emulator wired up as a quantum-control device. Uploads stage
/// decoded programs under slot tokens; triggering reseeds the physical
/// backend and runs the program to completion, so a launch is a pure
/// function of (program, seed, injected errors).
pub struct VppuDevice {
    backend: Mutex<RepetitionBackend>,
    staged: Mutex<std::collections::HashMap<u64, Vec<Instruction>>>,
    next_slot: AtomicU64,
    limits: ExecLimits,
    interpreter: InterpreterKind,
    seed: AtomicU64,
    clock: ClockDomains,
}

impl VppuDevice {
    pub fn new(backend: RepetitionBackend, seed: u64) -> Self {
        VppuDevice {
            backend: Mutex::new(backend),
            staged: Mutex::new(std::collections::HashMap::new()),
            next_slot: AtomicU64::new(0),
            limits: ExecLimits::default(),
            interpreter: InterpreterKind::Standard,
            seed: AtomicU64::new(seed),
            clock: ClockDomains::default(),
        }
    }

    pub fn with_clock(mut self, clock: ClockDomains) -> Self {
        self.clock = clock;
        self
    }

    /// The deterministic-domain clock this unit runs on.
    pub fn clock(&self) -> &ClockDomains {
        &self.clock
    }

    /// Seed used to reset the backend at every trigger.
    pub fn set_seed(&self, seed: u64) {
        self.seed.store(seed, Ordering::Relaxed);
    }

    pub fn with_limits(mut self, limits: ExecLimits) -> Self {
        self.limits = limits;
        self
    }

    pub fn with_interpreter(mut self, interpreter: InterpreterKind) -> Self {
        self.interpreter = interpreter;
        self
    }

    /// Reconfigures the physical backend (error injection, flag schedule).
    pub fn configure_backend(&self, configure: impl FnOnce(&mut RepetitionBackend)) {
        configure(&mut self.backend.lock().unwrap());
    }

    fn run(
        &self,
        program: &[Instruction],
        bridge: &dyn CallbackBridge,
        args: &[u64],
    ) -> Result<VppuState, qlink_vppu::ExecFault> {
        let mut backend = self.backend.lock().unwrap();
        backend.reset(self.seed.load(Ordering::Relaxed));
        match self.interpreter {
            InterpreterKind::Standard => {
                qlink_vppu::execute(program, &mut *backend, bridge, &self.limits, args)
            }
            InterpreterKind::Reference => {
                let bytes: Vec<u8> = program.iter().flat_map(|i| i.encode()).collect();
                qlink_vppu::reference::execute(&bytes, &mut *backend, bridge, &self.limits, args)
            }
        }
    }
}

struct FnBridge<'a>(&'a (dyn Fn(u16, u16, u64) -> Result<Vec<u8>, String> + Sync));

impl CallbackBridge for FnBridge<'_> {
    fn call(&self, device: u16, callback_id: u16, arg: u64) -> Result<Vec<u8>, String> {
        (self.0)(device, callback_id, arg)
    }
}

impl DeviceBehavior for VppuDevice {
    fn kind(&self) -> &'static str {
        "vppu"
    }

    fn validate_program(&self, uid: DeviceUid, binary: &[u8]) -> Result<(), DeviceError> {
        decode_program(binary).map(|_| ()).map_err(|e| {
            DeviceError::ProgramRejected {
                uid,
                message: e.to_string(),
            }
        })
    }

    fn upload_program(&self, uid: DeviceUid, binary: &[u8]) -> Result<ProgramSlot, DeviceError> {
        let program = decode_program(binary).map_err(|e| DeviceError::ProgramRejected {
            uid,
            message: e.to_string(),
        })?;
        let slot = self.next_slot.fetch_add(1, Ordering::Relaxed);
        self.staged.lock().unwrap().insert(slot, program);
        Ok(ProgramSlot(slot))
    }

    fn discard_program(&self, _uid: DeviceUid, slot: ProgramSlot) {
        self.staged.lock().unwrap().remove(&slot.0);
    }

    fn trigger(
        &self,
        uid: DeviceUid,
        slot: ProgramSlot,
        ctx: TriggerContext<'_>,
    ) -> Result<TriggerOutput, DeviceError> {
        let program = self
            .staged
            .lock()
            .unwrap()
            .remove(&slot.0)
            .ok_or(DeviceError::Unsupported {
                uid,
                operation: "trigger of an unknown program slot",
            })?;
        let state = self
            .run(&program, &FnBridge(ctx.bridge), &ctx.args)
            .map_err(|fault| DeviceError::DeviceFault {
                uid,
                pc: fault.pc as u64,
                message: format!("{:?} at tick {}", fault.cause, fault.tick),
            })?;
        Ok(TriggerOutput {
            result: state.result_register().to_le_bytes(),
            final_tick: state.dtd_clock,
            trace: state.trace_text().into_bytes(),
        })
    }

    fn single_threaded(&self) -> bool {
        true
    }
}

/// Shared state behind the decoder device's callbacks: the syndrome history
/// accumulated by the enqueue entry points and drained by `decode`.
pub struct DecoderState {
    history: Mutex<Vec<Vec<bool>>>,
    decoder: qlink_qec_rtsim::RepetitionDecoder,
    syndrome_width: usize,
    last_verdict: Mutex<Option<bool>>,
}

impl DecoderState {
    pub fn new() -> Arc<Self> {
        Arc::new(DecoderState {
            history: Mutex::new(Vec::new()),
            decoder: qlink_qec_rtsim::RepetitionDecoder::new(),
            syndrome_width: 2,
            last_verdict: Mutex::new(None),
        })
    }

    pub fn syndrome_width(&self) -> usize {
        self.syndrome_width
    }

    /// Packed-integer entry: the low `syndrome_width` bits of the argument,
    /// most recently measured bit in the least-significant position.
    pub fn push_packed(&self, packed: u64) {
        let mut pair = Vec::with_capacity(self.syndrome_width);
        for i in (0..self.syndrome_width).rev() {
            pair.push(packed >> i & 1 == 1);
        }
        self.history.lock().unwrap().push(pair);
    }

    /// Bit-vector entry: used by the simulation-style path, where syndromes
    /// arrive as a marshaled boolean vector instead of a packed integer.
    pub fn push_bits(&self, bits: Vec<bool>) {
        self.history.lock().unwrap().push(bits);
    }

    pub fn history_len(&self) -> usize {
        self.history.lock().unwrap().len()
    }

    /// Decodes and clears the accumulated history.
    pub fn decode_and_clear(&self) -> Result<bool, String> {
        let history = std::mem::take(&mut *self.history.lock().unwrap());
        let flip = self
            .decoder
            .decode(&history)
            .map(|outcome| outcome.logical_flip)
            .map_err(|e| e.to_string())?;
        *self.last_verdict.lock().unwrap() = Some(flip);
        Ok(flip)
    }

    /// Verdict of the most recent decode, for run reports.
    pub fn last_verdict(&self) -> Option<bool> {
        *self.last_verdict.lock().unwrap()
    }
}

/// Loopback echo endpoint. In UDP mode the service is spawned on connect
/// and torn down on disconnect; in in-process mode each measurement run
/// spawns its own channel-backed echo.
pub struct EchoDevice {
    transport: EchoTransportKind,
    bind: String,
    udp: Mutex<Option<EchoHandle>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EchoTransportKind {
    Inproc,
    Udp,
}

impl EchoDevice {
    pub fn new(transport: EchoTransportKind, bind: String) -> Self {
        EchoDevice {
            transport,
            bind,
            udp: Mutex::new(None),
        }
    }

    /// Builds a fresh transport pair aimed at this echo endpoint.
    pub fn make_transport(&self) -> Result<TransportPair, RtError> {
        match self.transport {
            EchoTransportKind::Inproc => {
                let mut echo = InprocEcho::spawn(NoDrops);
                TransportPair::inproc(&mut echo)
            }
            EchoTransportKind::Udp => {
                let guard = self.udp.lock().unwrap();
                let handle = guard
                    .as_ref()
                    .ok_or_else(|| RtError::Endpoint("echo service not connected".into()))?;
                let addr = handle
                    .local_addr()
                    .ok_or_else(|| RtError::Endpoint("echo service has no address".into()))?;
                TransportPair::udp(addr)
            }
        }
    }
}

impl DeviceBehavior for EchoDevice {
    fn kind(&self) -> &'static str {
        "echo"
    }

    fn on_connect(&self) -> Result<(), String> {
        if self.transport == EchoTransportKind::Udp {
            let handle =
                EchoHandle::spawn_udp(&self.bind, NoDrops).map_err(|e| e.to_string())?;
            *self.udp.lock().unwrap() = Some(handle);
        }
        Ok(())
    }

    fn on_disconnect(&self) -> Result<(), String> {
        self.udp.lock().unwrap().take();
        Ok(())
    }

    fn rdma_descriptors(&self, _uid: DeviceUid) -> Result<Vec<BufferDescriptor>, DeviceError> {
        // Handshake stub: descriptors for the high-latency-sensitivity seam;
        // no hardware transport stands behind them.
        Ok(vec![BufferDescriptor {
            addr: 0x4000_0000,
            len: 8192,
            rkey: 0x51C0,
        }])
    }
}
