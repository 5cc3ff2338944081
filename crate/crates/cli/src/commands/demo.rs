//! End-to-end demo: a repeat-until-success preparation loop, streamed
//! stabilizer rounds with per-round decoder callbacks, a final decode, and
//! a conditional correction, all running as a pulse program launched
//! through the driver.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use qlink_driver::{
    DeviceConfig, DeviceKind, DeviceUid, Driver, DriverConfig, KernelSource,
    VppuAssemblyCompiler,
};

use crate::report::{write_json, RunReport};

/// Result byte a program reports when the preparation loop runs out of
/// attempts.
const ATTEMPTS_EXHAUSTED: u8 = 0xFF;

/// Decoder callback ids, fixed by the decoder device's registration order.
const CB_ENQUEUE_PACKED: u16 = 0;
const CB_ENQUEUE_SIM: u16 = 1;
const CB_DECODE: u16 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct DemoCase {
    pub rounds: u32,
    /// (round, data qubit) error injections.
    pub injections: Vec<(u64, usize)>,
    pub seed: u64,
    pub p_flip: f64,
    /// Bound on the repeat-until-success loop.
    pub attempts: u32,
    /// Failed preparation attempts the backend reports before success.
    pub distill_failures: u32,
    /// Route syndromes through the simulation-style (bit-vector) enqueue
    /// instead of the packed-integer enqueue.
    pub sim_path: bool,
    pub interpreter: String,
}

impl Default for DemoCase {
    fn default() -> Self {
        DemoCase {
            rounds: 5,
            injections: Vec::new(),
            seed: 0,
            p_flip: 0.0,
            attempts: 16,
            distill_failures: 2,
            sim_path: false,
            interpreter: "standard".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoOutcome {
    pub logical_outcome: u8,
    pub decoder_verdict: String,
    pub decoder_flip: bool,
    pub preparation_polls: usize,
    pub final_tick: u64,
    #[serde(skip)]
    pub trace_text: String,
}

/// The kernel source: an unrolled repeat-until-success prologue, `rounds`
/// stabilizer rounds each packing two syndrome bits into a register for one
/// callback send, a final decode call, and the conditional correction.
pub fn build_demo_program(
    rounds: u32,
    attempts: u32,
    decoder: DeviceUid,
    enqueue_cb: u16,
) -> String {
    let dec = decoder.value();
    let mut src = String::new();
    for attempt in 0..attempts {
        let retry_target = if attempt + 1 < attempts {
            format!("attempt_{}", attempt + 1)
        } else {
            "prep_failed".to_string()
        };
        let _ = writeln!(src, "attempt_{attempt}: LOADI r0, 0");
        let _ = writeln!(src, "MEASURE 254, r0");
        let _ = writeln!(src, "BRNZ r0, {retry_target}");
        let _ = writeln!(src, "JMP body");
    }
    let _ = writeln!(src, "prep_failed: LOADI r15, {ATTEMPTS_EXHAUSTED}");
    let _ = writeln!(src, "HALT");
    let _ = writeln!(src, "body: NOP");
    for _ in 0..rounds {
        let _ = writeln!(src, "LOADI r2, 0");
        let _ = writeln!(src, "MEASURE 0, r2");
        let _ = writeln!(src, "MEASURE 1, r2");
        let _ = writeln!(src, "SENDCB {dec}, {enqueue_cb}, r2");
        let _ = writeln!(src, "RECVCB r6");
    }
    let _ = writeln!(src, "LOADI r3, 0");
    let _ = writeln!(src, "MEASURE 255, r3");
    let _ = writeln!(src, "SENDCB {dec}, {CB_DECODE}, r3");
    let _ = writeln!(src, "RECVCB r4");
    let _ = writeln!(src, "BRNZ r4, correct");
    let _ = writeln!(src, "JMP finish");
    // The correction pulse stands in for the conditional gate.
    let _ = writeln!(src, "correct: PULSE 0, 1, 2");
    let _ = writeln!(src, "LOADI r5, 1");
    let _ = writeln!(src, "XORR r3, r3, r5");
    let _ = writeln!(src, "finish: XORR r15, r3, r14");
    let _ = writeln!(src, "HALT");
    src
}

fn demo_config(case: &DemoCase) -> DriverConfig {
    DriverConfig {
        devices: vec![
            DeviceConfig {
                name: "vppu0".into(),
                kind: DeviceKind::Vppu,
                params: serde_json::json!({
                    "p_flip": case.p_flip,
                    "seed": case.seed,
                    "interpreter": case.interpreter,
                }),
            },
            DeviceConfig {
                name: "decoder0".into(),
                kind: DeviceKind::Decoder,
                params: serde_json::Value::Null,
            },
        ],
    }
}

/// Runs one demo case on a fresh driver. Honors `QLINK_CONFIG` when set;
/// otherwise uses the built-in one-emulator-one-decoder machine.
pub fn run_demo_case(case: &DemoCase) -> Result<DemoOutcome> {
    let config = match DriverConfig::from_env()? {
        Some(config) => config,
        None => demo_config(case),
    };
    let driver = Driver::new();
    driver.initialize(&config)?;

    let vppu = driver
        .registry()
        .uids()
        .into_iter()
        .find(|&uid| driver.vppu_device(uid).is_some())
        .ok_or_else(|| anyhow!("configuration has no pulse-unit device"))?;
    let decoder = driver
        .registry()
        .uids()
        .into_iter()
        .find(|&uid| driver.decoder_state(uid).is_some())
        .ok_or_else(|| anyhow!("configuration has no decoder device"))?;

    let vppu_device = driver.vppu_device(vppu).expect("vppu uid resolved above");
    vppu_device.set_seed(case.seed);
    vppu_device.configure_backend(|backend| {
        backend.set_distill_failures(case.distill_failures);
        for &(round, qubit) in &case.injections {
            backend
                .inject_error(round, qubit)
                .expect("injection indices validated by the caller");
        }
    });

    let enqueue_cb = if case.sim_path {
        CB_ENQUEUE_SIM
    } else {
        CB_ENQUEUE_PACKED
    };
    let source = build_demo_program(case.rounds, case.attempts, decoder, enqueue_cb);
    let compiler = VppuAssemblyCompiler::new("t_gate_teleport").returns_bytes(1);
    let handle = driver
        .load_kernel(KernelSource::Text(&source), &compiler)
        .context("demo kernel failed to compile")?;
    let result = driver.malloc(1, None)?;
    let report = driver.launch_kernel(handle, &[], Some(result))?;

    let logical_outcome = driver.memcpy_from_device(result, 1)?[0];
    if logical_outcome == ATTEMPTS_EXHAUSTED {
        bail!(
            "attempt budget exhausted after {} preparation attempts",
            case.attempts
        );
    }
    let run = &report.devices[0];
    let decoder_flip = driver
        .decoder_state(decoder)
        .and_then(|state| state.last_verdict())
        .ok_or_else(|| anyhow!("decode callback was never reached"))?;
    let preparation_polls = run
        .trace_text
        .lines()
        .filter(|line| line.contains("MEASURE ch=254"))
        .count();

    Ok(DemoOutcome {
        logical_outcome,
        decoder_verdict: if decoder_flip { "flip" } else { "no flip" }.to_string(),
        decoder_flip,
        preparation_polls,
        final_tick: run.final_tick,
        trace_text: run.trace_text.clone(),
    })
}

#[derive(Debug, Serialize)]
pub struct ExhaustiveRow {
    pub round: u64,
    pub qubit: usize,
    pub packed_outcome: u8,
    pub sim_outcome: u8,
    pub packed_verdict: String,
    pub paths_agree: bool,
}

/// Exhaustive single-error sweep: every (round, qubit) injection, each run
/// through both enqueue encodings. Fails if any case leaves a logical flip
/// uncorrected or the two paths disagree.
pub fn run_exhaustive(base: &DemoCase) -> Result<Vec<ExhaustiveRow>> {
    let mut rows = Vec::new();
    for round in 0..base.rounds as u64 {
        for qubit in 0..3usize {
            let mut packed_case = base.clone();
            packed_case.injections = vec![(round, qubit)];
            packed_case.sim_path = false;
            let packed = run_demo_case(&packed_case)?;

            let mut sim_case = packed_case.clone();
            sim_case.sim_path = true;
            let sim = run_demo_case(&sim_case)?;

            rows.push(ExhaustiveRow {
                round,
                qubit,
                packed_outcome: packed.logical_outcome,
                sim_outcome: sim.logical_outcome,
                packed_verdict: packed.decoder_verdict.clone(),
                paths_agree: packed.logical_outcome == sim.logical_outcome
                    && packed.decoder_flip == sim.decoder_flip,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Serialize)]
pub struct DemoResults {
    pub case: DemoCase,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<DemoOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<Vec<ExhaustiveRow>>,
}

pub fn cmd_demo(
    case: DemoCase,
    exhaustive: bool,
    out: Option<&Path>,
    json: bool,
) -> Result<()> {
    let config = serde_json::to_value(&case)?;
    if exhaustive {
        let rows = run_exhaustive(&case)?;
        let all_corrected = rows
            .iter()
            .all(|r| r.packed_outcome == 0 && r.sim_outcome == 0);
        let all_agree = rows.iter().all(|r| r.paths_agree);
        let n = rows.len();
        let results = DemoResults {
            case,
            outcome: None,
            exhaustive: Some(rows),
        };
        let report = RunReport::new("demo --exhaustive", config, results);
        if let Some(out) = out {
            write_json(out, "demo.json", &report.stable_json())?;
        }
        report.print(json);
        if !json {
            println!(
                "{n} injections: corrected={all_corrected} dual-path agreement={all_agree}"
            );
        }
        if !all_corrected || !all_agree {
            bail!("exhaustive demo found uncorrected or divergent cases");
        }
        return Ok(());
    }
    let outcome = run_demo_case(&case)?;
    if !json {
        println!(
            "logical outcome {} | decoder says {} | {} preparation polls | {} ticks",
            outcome.logical_outcome,
            outcome.decoder_verdict,
            outcome.preparation_polls,
            outcome.final_tick
        );
    }
    let results = DemoResults {
        case,
        outcome: Some(outcome),
        exhaustive: None,
    };
    let report = RunReport::new("demo", config, results);
    if let Some(out) = out {
        write_json(out, "demo.json", &report.stable_json())?;
    }
    report.print(json);
    Ok(())
}
