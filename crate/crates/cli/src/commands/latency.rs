//! Round-trip latency benchmark: spawn or connect to an echo, measure every
//! sample, compute warm-up-aware statistics, and emit plot-ready files.

use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

use qlink_rtlink::{
    compute_stats, format_report_line, measure_loopback, EchoHandle, LatencyStats, MeasureConfig,
    MeasureOutcome, NoDrops, TransportPair, WarmupRule,
};

use crate::commands::UsageError;
use crate::report::{write_csv, write_json, RunReport};

#[derive(Debug, Clone)]
pub enum LatencyEndpoint {
    /// In-process channel echo.
    Inproc,
    /// Existing UDP echo at this address.
    Endpoint(String),
    /// Spawn a local UDP echo and measure against it.
    SpawnUdp,
}

#[derive(Debug, Clone)]
pub struct LatencyOptions {
    pub endpoint: LatencyEndpoint,
    pub n: u64,
    pub interval_ns: u64,
    pub bin_ns: u64,
    pub payload_bytes: usize,
    pub fixed_warmup: Option<usize>,
    pub csv_stdout: bool,
}

#[derive(Debug, Serialize)]
pub struct LatencyResults {
    pub samples: usize,
    pub gaps: Vec<u32>,
    pub stats: LatencyStats,
    pub report_line: String,
}

pub fn run_measurement(options: &LatencyOptions) -> Result<(MeasureOutcome, LatencyStats)> {
    if options.n == 0 {
        return Err(UsageError("--n must be at least 1".into()).into());
    }
    if options.n > qlink_rtlink::MAX_PACKETS_PER_RUN {
        return Err(UsageError(format!(
            "--n exceeds the 16-bit packet space ({})",
            qlink_rtlink::MAX_PACKETS_PER_RUN
        ))
        .into());
    }

    // Keep UDP services alive for the duration of the run.
    let mut _spawned: Option<EchoHandle> = None;
    let pair = match &options.endpoint {
        LatencyEndpoint::Inproc => {
            let mut echo = qlink_rtlink::InprocEcho::spawn(NoDrops);
            TransportPair::inproc(&mut echo)?
        }
        LatencyEndpoint::Endpoint(addr) => {
            let addr = addr
                .parse()
                .map_err(|e| UsageError(format!("bad --endpoint address: {e}")))?;
            TransportPair::udp(addr)?
        }
        LatencyEndpoint::SpawnUdp => {
            let echo = EchoHandle::spawn_udp("127.0.0.1:0", NoDrops)?;
            let addr = echo.local_addr().context("echo bound without an address")?;
            let pair = TransportPair::udp(addr)?;
            _spawned = Some(echo);
            pair
        }
    };

    let outcome = measure_loopback(
        pair,
        &MeasureConfig {
            n_packets: options.n,
            interval_ns: options.interval_ns,
            payload_bytes: options.payload_bytes,
            idle_timeout: Duration::from_millis(500),
        },
    )?;
    let rtts: Vec<u64> = outcome.samples.iter().map(|s| s.rtt_ns).collect();
    let rule = match options.fixed_warmup {
        Some(count) => WarmupRule::Fixed(count),
        None => WarmupRule::Auto,
    };
    let stats = compute_stats(&rtts, options.bin_ns, rule)?;
    Ok((outcome, stats))
}

pub fn cmd_latency(options: &LatencyOptions, out: Option<&Path>, json: bool) -> Result<()> {
    let (outcome, stats) = run_measurement(options)?;
    let line = format_report_line(&stats);

    if let Some(out) = out {
        write_csv(
            out,
            "samples.csv",
            "packet_number,send_ts_ns,recv_ts_ns,rtt_ns",
            outcome.samples.iter().map(|s| {
                format!(
                    "{},{},{},{}",
                    s.packet_number, s.send_ts_ns, s.recv_ts_ns, s.rtt_ns
                )
            }),
        )?;
        write_json(out, "stats.json", &serde_json::to_value(&stats)?)?;
        // Gnuplot-ready histogram: bin center and count.
        let histogram = &stats.histogram;
        write_csv(
            out,
            "histogram.dat",
            "# rtt_ns count",
            histogram.counts.iter().enumerate().map(|(i, count)| {
                let center = histogram.origin_ns + i as u64 * histogram.width_ns
                    + histogram.width_ns / 2;
                format!("{center} {count}")
            }),
        )?;
    }

    let results = LatencyResults {
        samples: outcome.samples.len(),
        gaps: outcome.gaps.clone(),
        stats,
        report_line: line.clone(),
    };
    let report = RunReport::new(
        "latency",
        serde_json::json!({
            "n": options.n,
            "interval_ns": options.interval_ns,
            "bin_ns": options.bin_ns,
            "payload_bytes": options.payload_bytes,
        }),
        results,
    );
    report.print(json);
    if options.csv_stdout {
        println!("packet_number,send_ts_ns,recv_ts_ns,rtt_ns");
        for s in &outcome.samples {
            println!(
                "{},{},{},{}",
                s.packet_number, s.send_ts_ns, s.recv_ts_ns, s.rtt_ns
            );
        }
    } else if !json {
        println!("{line}");
        if !outcome.gaps.is_empty() {
            println!("lost packet numbers: {:?}", outcome.gaps);
        }
    }
    Ok(())
}
