//! Decode-stream simulation: run the discrete-event simulator and report
//! simulated wait times next to their analytic values.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use qlink_qec_rtsim::{
    min_parallel_workers, simulate_stream, wait_time_closed_form, wait_time_recurrence,
    BacklogTrace, RtParams, SimMode, WindowParams,
};

use crate::commands::UsageError;
use crate::report::{write_csv, write_json, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sliding,
    Parallel,
}

/// Parses `--params`-style values: inline JSON or `@path` to a JSON file.
pub fn parse_json_arg<T: serde::de::DeserializeOwned>(
    what: &str,
    text: &str,
) -> Result<T> {
    let body = if let Some(path) = text.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read {what} file {path}: {e}")))?
    } else {
        text.to_string()
    };
    serde_json::from_str(&body).map_err(|e| UsageError(format!("invalid {what}: {e}")).into())
}

#[derive(Debug, Serialize)]
pub struct WaitRow {
    pub gate: u32,
    pub simulated_secs: f64,
    pub recurrence_secs: f64,
    pub closed_form_secs: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulateResults {
    pub mode: String,
    pub params: RtParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_workers: Option<u64>,
    pub waits: Vec<WaitRow>,
    pub backlog_bounded: bool,
    pub backlog_peak: u64,
}

pub fn run_simulation(
    mode: Mode,
    params: &RtParams,
    window: Option<&WindowParams>,
    horizon_rounds: u64,
) -> Result<(SimulateResults, BacklogTrace)> {
    let sim_mode = match mode {
        Mode::Sliding => SimMode::Sliding,
        Mode::Parallel => {
            let window = window
                .ok_or_else(|| UsageError("--window is required in parallel mode".into()))?;
            SimMode::Parallel(window.clone())
        }
    };
    let outcome = simulate_stream(params, &sim_mode, horizon_rounds)?;
    let waits = outcome
        .waits
        .iter()
        .map(|wait| {
            Ok(WaitRow {
                gate: wait.gate,
                simulated_secs: wait.wait_secs,
                recurrence_secs: wait_time_recurrence(params, wait.gate)?,
                closed_form_secs: wait_time_closed_form(params, wait.gate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_workers = match (mode, window) {
        (Mode::Parallel, Some(window)) => Some(min_parallel_workers(window, params)?),
        _ => None,
    };
    let results = SimulateResults {
        mode: match mode {
            Mode::Sliding => "sliding".into(),
            Mode::Parallel => "parallel".into(),
        },
        params: params.clone(),
        window: window.cloned(),
        min_workers,
        waits,
        backlog_bounded: outcome.backlog.bounded,
        backlog_peak: outcome.backlog.peak,
    };
    Ok((results, outcome.backlog))
}

pub fn cmd_simulate(
    mode: Mode,
    params: &RtParams,
    window: Option<&WindowParams>,
    horizon_rounds: u64,
    out: Option<&Path>,
    json: bool,
) -> Result<()> {
    let (results, backlog) = run_simulation(mode, params, window, horizon_rounds)?;

    if let Some(out) = out {
        write_csv(
            out,
            "trace.csv",
            "t_seconds,undecoded_rounds",
            backlog
                .points
                .iter()
                .map(|p| format!("{:.9e},{}", p.t_seconds, p.undecoded_rounds)),
        )?;
        let report = RunReport::new("simulate", serde_json::to_value(params)?, &results);
        write_json(out, "summary.json", &report.stable_json())?;
    }

    if !json {
        for row in &results.waits {
            println!(
                "gate {}: simulated {:>12.6e} s | recurrence {:>12.6e} s | closed form {:>12.6e} s",
                row.gate, row.simulated_secs, row.recurrence_secs, row.closed_form_secs
            );
        }
        println!(
            "backlog: bounded={} peak={} rounds{}",
            results.backlog_bounded,
            results.backlog_peak,
            results
                .min_workers
                .map(|w| format!(" (worker bound {w})"))
                .unwrap_or_default()
        );
    }
    let report = RunReport::new("simulate", serde_json::to_value(params)?, results);
    report.print(json);
    Ok(())
}
