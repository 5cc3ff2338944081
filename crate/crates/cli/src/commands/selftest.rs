//! Fast subset of the acceptance checks, runnable in a couple of seconds.

use anyhow::{bail, Result};

use qlink_qec_rtsim::{
    plan_capacity, simulate_stream, wait_time_closed_form, wait_time_recurrence, CapacityInputs,
    RtParams, SimMode,
};
use qlink_rtlink::{compute_stats, encode_frame, synthetic, Frame, LoopbackPayload, WarmupRule};

use crate::commands::demo::{run_exhaustive, DemoCase};

pub fn cmd_selftest() -> Result<()> {
    let mut failures = 0usize;
    let mut check = |name: &str, pass: bool| {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    // Wait-time formula against its recurrence oracle at reference timing.
    let mut agree = true;
    for &c in &[0.7e-6, 1.4e-6, 2.1e-6] {
        let params = RtParams {
            decode_secs_per_round: c,
            ..RtParams::default()
        };
        for j in 1..=30 {
            let closed = wait_time_closed_form(&params, j).unwrap();
            let oracle = wait_time_recurrence(&params, j).unwrap();
            if (closed - oracle).abs() / oracle >= 1e-9 {
                agree = false;
            }
        }
    }
    check("wait-time closed form matches recurrence", agree);

    // Sliding simulator within one round of the recurrence.
    let params = RtParams::default();
    let sim = simulate_stream(&params, &SimMode::Sliding, 10_000_000)?;
    let within = sim.waits.iter().all(|w| {
        let oracle = wait_time_recurrence(&params, w.gate).unwrap();
        (w.wait_secs - oracle).abs() <= params.round_secs
    });
    check("sliding simulation tracks the recurrence", within);

    // Capacity planner reference numbers.
    let ai = plan_capacity(&CapacityInputs::Ai {
        params_per_model: 25e6,
        flop_per_param_per_qubit: 2.0,
        cycle_rate_hz: 1e6,
        n_logical_qubits: 100.0,
        headroom_factor: 10.0,
    })?;
    check(
        "capacity planner reference numbers",
        ai.flop_per_s_per_qubit == 50e12 && ai.with_headroom == 5e16,
    );

    // Golden loopback frame bytes.
    let frame = Frame::loopback(0, 0, &LoopbackPayload::new(1, 0x0102).unwrap());
    let bytes = encode_frame(&frame)?;
    check(
        "loopback payload golden bytes",
        bytes[0..4] == *b"NQLK"
            && bytes.len() == qlink_rtlink::FRAME_HEADER_BYTES + 32
            && bytes[qlink_rtlink::FRAME_HEADER_BYTES + 11] == 0x01
            && bytes[qlink_rtlink::FRAME_HEADER_BYTES + 12] == 0x01
            && bytes[qlink_rtlink::FRAME_HEADER_BYTES + 13] == 0x02,
    );

    // Statistics pipeline on the canonical synthetic trace.
    let trace = synthetic::generate(
        synthetic::POC_TRACE_SEED,
        &synthetic::SyntheticTraceSpec::poc_like(),
    );
    let stats = compute_stats(&trace, 10, WarmupRule::Auto)?;
    check(
        "latency statistics pipeline",
        (stats.mean_ns - 3839.0).abs() <= 5.0
            && (stats.stddev_ns - 35.0).abs() <= 5.0
            && (150..=250).contains(&stats.warmup_boundary),
    );

    // Exhaustive single-error demo with dual-path agreement.
    let rows = run_exhaustive(&DemoCase::default())?;
    check(
        "end-to-end demo corrects all single errors",
        rows.iter()
            .all(|r| r.packed_outcome == 0 && r.sim_outcome == 0 && r.paths_agree),
    );

    if failures > 0 {
        bail!("{failures} selftest check(s) failed");
    }
    println!("selftest: all checks passed");
    Ok(())
}
