use std::ops::Range;

use serde::Serialize;

use crate::{RtParams, SimError, WindowParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Commit,
    Cleanup,
}

/// One region of the round-axis partition. `rounds` is the span whose
/// corrections this region finalizes; `decode_input` is the span of rounds
/// fed to its decoder (commit spans extend into flanking buffers, clipped
/// at the stream boundaries).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Region {
    pub kind: RegionKind,
    pub rounds: Range<u64>,
    pub decode_input: Range<u64>,
}

/// Partitions `[0, total_rounds)` into commit regions tiling the axis in
/// steps of `n_com + n_W` with cleanup regions filling the gaps. Every
/// round lands in exactly one region.
pub fn partition_windows(
    total_rounds: u64,
    window: &WindowParams,
) -> Result<Vec<Region>, SimError> {
    window.validate()?;
    if total_rounds < window.commit_rounds {
        return Err(SimError::TotalTooSmall {
            total: total_rounds,
            commit: window.commit_rounds,
        });
    }
    let step = window.generation_rounds();
    let mut regions = Vec::new();
    let mut start = 0u64;
    while start < total_rounds {
        let commit_end = (start + window.commit_rounds).min(total_rounds);
        regions.push(Region {
            kind: RegionKind::Commit,
            rounds: start..commit_end,
            decode_input: start.saturating_sub(window.buffer_rounds)
                ..(commit_end + window.buffer_rounds).min(total_rounds),
        });
        let cleanup_end = (start + step).min(total_rounds);
        if commit_end < cleanup_end {
            regions.push(Region {
                kind: RegionKind::Cleanup,
                rounds: commit_end..cleanup_end,
                decode_input: commit_end..cleanup_end,
            });
        }
        start += step;
    }
    Ok(regions)
}

/// Minimum worker count for the parallel-window schedule to keep up:
/// `ceil(2 T_DEC / ((n_com + n_W)(T_l + T_s)))`, at least 1. The region
/// decode time is scaled by `spatial_regions` when the lattice is split
/// spatially.
pub fn min_parallel_workers(window: &WindowParams, params: &RtParams) -> Result<u64, SimError> {
    Ok(min_parallel_workers_raw(window, params)?.ceil().max(1.0) as u64)
}

/// The bound before taking the ceiling, for margin analysis.
pub fn min_parallel_workers_raw(
    window: &WindowParams,
    params: &RtParams,
) -> Result<f64, SimError> {
    window.validate()?;
    params.validate()?;
    let workload = 2.0 * window.region_decode_secs * window.spatial_regions as f64;
    let denom =
        window.generation_rounds() as f64 * (params.link_rtt_secs + params.round_secs);
    Ok(workload / denom)
}
