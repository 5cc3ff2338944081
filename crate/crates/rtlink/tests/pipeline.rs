//! End-to-end loopback pipeline and codec totality tests.

use std::time::Duration;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qlink_rtlink::{
    compute_stats, decode_frame, encode_frame, format_report_line, measure_loopback, synthetic,
    EchoHandle, Frame, LoopbackPayload, MeasureConfig, MsgType, NoDrops, TransportPair,
    WarmupRule,
};

#[test]
fn codec_never_panics_on_random_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
    for _ in 0..20_000 {
        let len = rng.gen_range(0..9216);
        let mut bytes = vec![0u8; len];
        rng.fill(&mut bytes[..]);
        // Half the cases: make the magic valid so deeper paths are reached.
        if len >= 4 && rng.gen_bool(0.5) {
            bytes[0..4].copy_from_slice(b"NQLK");
        }
        if let Ok(frame) = decode_frame(&bytes) {
            assert_eq!(encode_frame(&frame).unwrap(), bytes);
        }
    }
}

proptest! {
    #[test]
    fn valid_frames_roundtrip(
        msg in 1u8..=4,
        flags in any::<u16>(),
        seq in any::<u32>(),
        ts in any::<u64>(),
        payload in proptest::collection::vec(any::<u8>(), 0..256),
    ) {
        let frame = Frame {
            msg_type: MsgType::from_u8(msg).unwrap(),
            flags,
            seq,
            timestamp_ns: ts,
            payload,
        };
        let bytes = encode_frame(&frame).unwrap();
        prop_assert_eq!(decode_frame(&bytes).unwrap(), frame);
    }
}

#[test]
fn udp_two_clients_keep_their_own_sequence_streams() {
    let echo = EchoHandle::spawn_udp("127.0.0.1:0", NoDrops).unwrap();
    let addr = echo.local_addr().unwrap();
    let run = move |n: u64| {
        let pair = TransportPair::udp(addr).unwrap();
        measure_loopback(
            pair,
            &MeasureConfig {
                n_packets: n,
                idle_timeout: Duration::from_secs(2),
                ..Default::default()
            },
        )
        .unwrap()
    };
    let a = std::thread::spawn(move || run(200));
    let pair_b = TransportPair::udp(addr).unwrap();
    let b = measure_loopback(
        pair_b,
        &MeasureConfig {
            n_packets: 300,
            idle_timeout: Duration::from_secs(2),
            ..Default::default()
        },
    )
    .unwrap();
    let a = a.join().unwrap();
    let numbers = |outcome: &qlink_rtlink::MeasureOutcome| {
        outcome
            .samples
            .iter()
            .map(|s| s.packet_number)
            .collect::<Vec<_>>()
    };
    assert_eq!(numbers(&a), (0..200).collect::<Vec<_>>());
    assert_eq!(numbers(&b), (0..300).collect::<Vec<_>>());
}

#[test]
fn gap_accounting_is_exact() {
    // Deterministic drop of three packet numbers; reported gaps plus
    // received numbers must partition the sent range.
    let mut echo = qlink_rtlink::InprocEcho::spawn(|frame: &Frame| {
        LoopbackPayload::decode(&frame.payload)
            .map(|p| [5u16, 17, 400].contains(&p.packet_number))
            .unwrap_or(false)
    });
    let pair = TransportPair::inproc(&mut echo).unwrap();
    let outcome = measure_loopback(
        pair,
        &MeasureConfig {
            n_packets: 1000,
            idle_timeout: Duration::from_millis(300),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(outcome.gaps, vec![5, 17, 400]);
    let mut all: Vec<u32> = outcome
        .samples
        .iter()
        .map(|s| s.packet_number)
        .chain(outcome.gaps.iter().copied())
        .collect();
    all.sort_unstable();
    assert_eq!(all, (0..1000).collect::<Vec<_>>());
}

#[test]
fn synthetic_trace_statistics_match_ground_truth() {
    let spec = synthetic::SyntheticTraceSpec::poc_like();
    let trace = synthetic::generate(synthetic::POC_TRACE_SEED, &spec);
    let stats = compute_stats(&trace, 10, WarmupRule::Auto).unwrap();

    assert!(
        (150..=250).contains(&stats.warmup_boundary),
        "warmup boundary {} outside [150, 250]",
        stats.warmup_boundary
    );
    assert!(
        (stats.mean_ns - 3839.0).abs() <= 5.0,
        "steady mean {} off target",
        stats.mean_ns
    );
    assert!(
        (stats.stddev_ns - 35.0).abs() <= 5.0,
        "steady std {} off target",
        stats.stddev_ns
    );

    // Independent recomputation of the steady-state moments.
    let steady = &trace[stats.warmup_boundary..];
    let mean = steady.iter().map(|&v| v as f64).sum::<f64>() / steady.len() as f64;
    let var = steady
        .iter()
        .map(|&v| (v as f64 - mean).powi(2))
        .sum::<f64>()
        / (steady.len() as f64 - 1.0);
    assert!((stats.mean_ns - mean).abs() < 1e-9);
    assert!((stats.stddev_ns - var.sqrt()).abs() < 1e-9);
    assert_eq!(stats.histogram.counts.iter().sum::<u64>() as usize, trace.len());
}

#[test]
fn report_line_prints_poc_precision() {
    let spec = synthetic::SyntheticTraceSpec::poc_like();
    let trace = synthetic::generate(synthetic::POC_TRACE_SEED, &spec);
    let stats = compute_stats(&trace, 10, WarmupRule::Auto).unwrap();
    let line = format_report_line(&stats);
    assert!(line.contains("mean 3.839 µs"), "line was: {line}");
    assert!(line.contains("std 35 ns"), "line was: {line}");
}
