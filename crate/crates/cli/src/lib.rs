//! Operator surface for the runtime: latency benchmarking, decode-stream
//! simulation, capacity planning, and the end-to-end teleportation-shaped
//! demo. The binary front end lives in `main.rs`; command logic is exposed
//! here so integration tests drive the same paths.

pub mod commands;
pub mod report;

pub use report::RunReport;
