use serde::Serialize;

use crate::{partition_windows, RegionKind, RtParams, SimError, WindowParams};

/// Decode scheduling strategy for the stream simulator.
#[derive(Debug, Clone)]
pub enum SimMode {
    /// One worker decodes accumulated rounds in batches; each feedforward
    /// event costs one round trip, then waits for the batch decode.
    Sliding,
    /// Parallel-window schedule: commit regions decode first within each
    /// generation, then cleanup regions; generations overlap freely subject
    /// to worker availability. Syndrome transfer is a serialized
    /// request–response, so one round becomes available to the decode pool
    /// every `T_s + T_l` seconds.
    Parallel(WindowParams),
}

/// Measured feedforward wait for one gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateWait {
    pub gate: u32,
    pub requested_at: f64,
    pub fired_at: f64,
    pub wait_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BacklogPoint {
    pub t_seconds: f64,
    pub undecoded_rounds: u64,
}

/// Time series of rounds awaiting decode, with boundedness diagnostics.
/// The trace is bounded when the running maximum gains nothing over the
/// last quarter of the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacklogTrace {
    pub points: Vec<BacklogPoint>,
    pub bounded: bool,
    pub peak: u64,
    pub peak_at_half: u64,
    pub peak_at_three_quarters: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamOutcome {
    pub waits: Vec<GateWait>,
    pub backlog: BacklogTrace,
}

/// Grid-safe floor: times that land exactly on a grid boundary must count
/// the boundary round despite floating-point rounding.
fn floor_grid(x: f64) -> u64 {
    (x + 1e-9).floor().max(0.0) as u64
}

/// Rounds decoded at specific completion instants, folded into a backlog
/// trace against a linear arrival process of `total` rounds with the given
/// inter-arrival period.
fn build_trace(
    mut completions: Vec<(f64, u64)>,
    period: f64,
    total: u64,
    horizon_t: f64,
) -> BacklogTrace {
    // Work finishing after the horizon stays undecoded within it.
    completions.retain(|c| c.0 <= horizon_t);
    completions.sort_by(|a, b| a.0.total_cmp(&b.0));
    let arrivals = |t: f64| floor_grid(t / period).min(total);

    let checkpoints = [horizon_t / 2.0, horizon_t * 0.75];
    let mut checkpoint_runmax = [0u64; 2];
    let mut next_checkpoint = 0usize;
    let mut decoded = 0u64;
    let mut runmax = 0u64;
    let mut points = Vec::with_capacity(completions.len() + 1);

    for (t, rounds) in completions {
        // Backlog rises between completions, so the running max up to any
        // instant is the prior max or the value at that instant.
        while next_checkpoint < checkpoints.len() && checkpoints[next_checkpoint] < t {
            let at = checkpoints[next_checkpoint];
            checkpoint_runmax[next_checkpoint] =
                runmax.max(arrivals(at).saturating_sub(decoded));
            next_checkpoint += 1;
        }
        let pre = arrivals(t).saturating_sub(decoded);
        runmax = runmax.max(pre);
        decoded += rounds;
        points.push(BacklogPoint {
            t_seconds: t,
            undecoded_rounds: arrivals(t).saturating_sub(decoded),
        });
    }
    while next_checkpoint < checkpoints.len() {
        let at = checkpoints[next_checkpoint];
        checkpoint_runmax[next_checkpoint] = runmax.max(arrivals(at).saturating_sub(decoded));
        next_checkpoint += 1;
    }
    let final_backlog = arrivals(horizon_t).saturating_sub(decoded);
    runmax = runmax.max(final_backlog);
    points.push(BacklogPoint {
        t_seconds: horizon_t,
        undecoded_rounds: final_backlog,
    });

    BacklogTrace {
        points,
        bounded: checkpoint_runmax[1] == runmax,
        peak: runmax,
        peak_at_half: checkpoint_runmax[0],
        peak_at_three_quarters: checkpoint_runmax[1],
    }
}

/// Deterministic discrete-event simulation of the syndrome stream.
/// `horizon_rounds` bounds the stream; the feedforward schedule follows
/// `params.max_gates` sequential gates, the first requested after
/// `params.initial_rounds` rounds.
pub fn simulate_stream(
    params: &RtParams,
    mode: &SimMode,
    horizon_rounds: u64,
) -> Result<StreamOutcome, SimError> {
    params.validate()?;
    match mode {
        SimMode::Sliding => simulate_sliding(params, horizon_rounds),
        SimMode::Parallel(window) => simulate_parallel(params, window, horizon_rounds),
    }
}

fn simulate_sliding(params: &RtParams, horizon_rounds: u64) -> Result<StreamOutcome, SimError> {
    let ts = params.round_secs;
    let c = params.decode_secs_per_round;
    let tl = params.link_rtt_secs;
    let horizon_t = horizon_rounds as f64 * ts;

    let mut decoded = 0u64;
    let mut waits = Vec::with_capacity(params.max_gates as usize);
    let mut completions = Vec::new();
    let mut request = params.initial_rounds as f64 * ts;

    for gate in 1..=params.max_gates {
        if request > horizon_t {
            return Err(SimError::ScheduleExceedsHorizon { gate });
        }
        let measured = floor_grid(request / ts).min(horizon_rounds);
        let pending = measured.saturating_sub(decoded);
        let wait_secs = tl + c * pending as f64;
        let fired_at = request + wait_secs;
        if fired_at > horizon_t {
            return Err(SimError::ScheduleExceedsHorizon { gate });
        }
        completions.push((fired_at, pending));
        decoded = measured;
        waits.push(GateWait {
            gate,
            requested_at: request,
            fired_at,
            wait_secs,
        });
        request = fired_at;
    }

    // The sliding schedule's simulated horizon ends with the last gate.
    let end_t = waits.last().map(|w| w.fired_at).unwrap_or(horizon_t);
    let backlog = build_trace(completions, ts, horizon_rounds, end_t);
    Ok(StreamOutcome { waits, backlog })
}

fn simulate_parallel(
    params: &RtParams,
    window: &WindowParams,
    horizon_rounds: u64,
) -> Result<StreamOutcome, SimError> {
    window.validate()?;
    let regions = partition_windows(horizon_rounds, window)?;
    let period = params.round_secs + params.link_rtt_secs;
    let t_dec = window.region_decode_secs;
    let spatial = window.spatial_regions as usize;

    // Pair each commit region with its trailing cleanup region.
    struct Generation {
        commit_span: std::ops::Range<u64>,
        commit_release: f64,
        cleanup_span: Option<std::ops::Range<u64>>,
        commits_left: usize,
        cleanups_left: usize,
        commit_finish: f64,
        cleanup_finish: f64,
    }
    let mut generations = Vec::new();
    let mut iter = regions.iter().peekable();
    while let Some(commit) = iter.next() {
        debug_assert_eq!(commit.kind, RegionKind::Commit);
        let cleanup_span = match iter.peek() {
            Some(region) if region.kind == RegionKind::Cleanup => {
                Some(iter.next().unwrap().rounds.clone())
            }
            _ => None,
        };
        generations.push(Generation {
            commit_span: commit.rounds.clone(),
            // Round k reaches the decode pool at (k+1)*period; the region
            // is released once its whole decode input has arrived.
            commit_release: commit.decode_input.end as f64 * period,
            cleanup_span,
            commits_left: spatial,
            cleanups_left: spatial,
            commit_finish: 0.0,
            cleanup_finish: 0.0,
        });
    }

    // Earliest-release-first list scheduling onto the worker pool. Cleanup
    // tasks are born when their generation's last commit finishes, which is
    // always later than that commit's release, so popping in release order
    // never misses an earlier task.
    #[derive(PartialEq)]
    struct QueuedTask {
        release: f64,
        seq: u64,
        gen: usize,
        is_cleanup: bool,
    }
    impl Eq for QueuedTask {}
    impl Ord for QueuedTask {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // BinaryHeap is a max-heap; invert for earliest-first.
            other
                .release
                .total_cmp(&self.release)
                .then(other.seq.cmp(&self.seq))
        }
    }
    impl PartialOrd for QueuedTask {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }

    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut queue: BinaryHeap<QueuedTask> = BinaryHeap::new();
    let mut seq = 0u64;
    for (g, generation) in generations.iter().enumerate() {
        for _ in 0..spatial {
            queue.push(QueuedTask {
                release: generation.commit_release,
                seq,
                gen: g,
                is_cleanup: false,
            });
            seq += 1;
        }
    }

    let mut workers: BinaryHeap<Reverse<(u64, u64)>> = BinaryHeap::new();
    // Times enter the worker heap as ordered bit patterns of nonnegative
    // f64, which compare like the floats themselves.
    let to_bits = |t: f64| -> u64 { t.max(0.0).to_bits() };
    let from_bits = f64::from_bits;
    for w in 0..window.workers {
        workers.push(Reverse((to_bits(0.0), w)));
    }

    let mut completions = Vec::new();
    while let Some(task) = queue.pop() {
        let Reverse((free_bits, worker_id)) = workers.pop().expect("worker pool nonempty");
        let start = from_bits(free_bits).max(task.release);
        let finish = start + t_dec;
        workers.push(Reverse((to_bits(finish), worker_id)));

        let generation = &mut generations[task.gen];
        if task.is_cleanup {
            generation.cleanup_finish = generation.cleanup_finish.max(finish);
            generation.cleanups_left -= 1;
            if generation.cleanups_left == 0 {
                let span = generation.cleanup_span.clone().unwrap();
                completions.push((generation.cleanup_finish, span.end - span.start));
            }
        } else {
            generation.commit_finish = generation.commit_finish.max(finish);
            generation.commits_left -= 1;
            if generation.commits_left == 0 {
                let span = generation.commit_span.clone();
                completions.push((generation.commit_finish, span.end - span.start));
                if let Some(cleanup) = &generation.cleanup_span {
                    // Cleanups start after this generation's commits finish
                    // and after their own rounds have arrived.
                    let release = (cleanup.end as f64 * period).max(generation.commit_finish);
                    for _ in 0..spatial {
                        queue.push(QueuedTask {
                            release,
                            seq,
                            gen: task.gen,
                            is_cleanup: true,
                        });
                        seq += 1;
                    }
                }
            }
        }
    }

    let gen_complete: Vec<(u64, f64)> = generations
        .iter()
        .map(|g| {
            let through = g
                .cleanup_span
                .as_ref()
                .map(|s| s.end)
                .unwrap_or(g.commit_span.end);
            (through, g.commit_finish.max(g.cleanup_finish))
        })
        .collect();

    // Prefix completion: time by which every generation covering rounds
    // [0, n) has finished.
    let mut prefix_max = 0.0f64;
    let prefix_complete: Vec<(u64, f64)> = gen_complete
        .iter()
        .map(|&(through, at)| {
            prefix_max = prefix_max.max(at);
            (through, prefix_max)
        })
        .collect();

    let horizon_t = horizon_rounds as f64 * period;
    let mut waits = Vec::with_capacity(params.max_gates as usize);
    let mut request = params.initial_rounds as f64 * period;
    for gate in 1..=params.max_gates {
        if request > horizon_t {
            return Err(SimError::ScheduleExceedsHorizon { gate });
        }
        let needed = floor_grid(request / period).min(horizon_rounds);
        let ready_at = if needed == 0 {
            request
        } else {
            match prefix_complete.iter().find(|&&(through, _)| through >= needed) {
                Some(&(_, at)) => at,
                None => return Err(SimError::ScheduleExceedsHorizon { gate }),
            }
        };
        let fired_at = ready_at.max(request);
        waits.push(GateWait {
            gate,
            requested_at: request,
            fired_at,
            wait_secs: fired_at - request,
        });
        request = fired_at;
    }

    let backlog = build_trace(completions, period, horizon_rounds, horizon_t);
    Ok(StreamOutcome { waits, backlog })
}
