//! Decoder-compute capacity planning.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use qlink_qec_rtsim::{plan_capacity, CapacityInputs, CapacityReport};

use crate::report::{write_json, RunReport};

#[derive(Debug, Serialize)]
pub struct PlanResults {
    pub inputs: CapacityInputs,
    pub report: CapacityReport,
}

pub fn cmd_plan(inputs: CapacityInputs, out: Option<&Path>, json: bool) -> Result<()> {
    let capacity = plan_capacity(&inputs)?;
    if !json {
        println!(
            "per logical qubit: {:.3e} FLOP/s | total: {:.3e} FLOP/s | with headroom: {:.3e} FLOP/s",
            capacity.flop_per_s_per_qubit, capacity.total_flop_per_s, capacity.with_headroom
        );
    }
    let config = serde_json::to_value(&inputs)?;
    let results = PlanResults {
        inputs,
        report: capacity,
    };
    let report = RunReport::new("plan", config, results);
    if let Some(out) = out {
        write_json(out, "plan.json", &report.stable_json())?;
    }
    report.print(json);
    Ok(())
}
