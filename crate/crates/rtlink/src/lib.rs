//! Real-time interconnect, desk scale.
//!
//! A bit-exact frame codec (including the 32-byte timestamp/packet-number
//! loopback payload), an echo service over a local datagram socket or an
//! in-process channel, and the round-trip latency measurement and
//! statistics pipeline. The transport is deliberately unreliable: sequence
//! numbers make drops detectable and they are reported, never healed.

mod echo;
mod error;
mod frame;
mod measure;
mod payload;
mod stats;
pub mod synthetic;

pub use echo::{DropPolicy, EchoHandle, InprocEcho, NoDrops};
pub use error::{FrameError, RtError};
pub use frame::{
    decode_frame, encode_frame, Frame, MsgType, FRAME_HEADER_BYTES, FRAME_MAGIC,
    MAX_PAYLOAD_BYTES,
};
pub use measure::{
    measure_loopback, LatencySample, MeasureConfig, MeasureOutcome, TransportPair,
    MAX_PACKETS_PER_RUN,
};
pub use payload::{LoopbackPayload, LOOPBACK_PAYLOAD_BYTES};
pub use stats::{
    compute_stats, format_report_line, Histogram, LatencyStats, SegmentStats, WarmupRule,
};
