//! Real-time decode-stream analysis.
//!
//! Closed-form sliding-window wait times with an independent recurrence
//! oracle, the parallel-window worker bound, window partition geometry, a
//! deterministic discrete-event backlog simulator that validates both
//! formulas empirically, a decoder-compute capacity planner, and the
//! lookup decoder for the distance-3 repetition code used by the
//! end-to-end demo.

mod capacity;
mod decoder;
mod error;
mod params;
mod sim;
mod wait;
mod window;

pub use capacity::{plan_capacity, CapacityInputs, CapacityReport, MATCHING_ANCHORS};
pub use decoder::{decode_repetition, RepetitionDecodeOutcome, RepetitionDecoder};
pub use error::SimError;
pub use params::{RtParams, WindowParams};
pub use sim::{simulate_stream, BacklogPoint, BacklogTrace, GateWait, SimMode, StreamOutcome};
pub use wait::{wait_time_closed_form, wait_time_recurrence, BALANCE_EPS};
pub use window::{
    min_parallel_workers, min_parallel_workers_raw, partition_windows, Region, RegionKind,
};
