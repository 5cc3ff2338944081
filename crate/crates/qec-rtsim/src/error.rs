/// Errors from parameter validation, geometry, and simulation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{field} must be strictly positive")]
    NonPositive { field: &'static str },
    #[error("{field} must be at least 1")]
    ZeroCount { field: &'static str },
    #[error("gate index must be at least 1")]
    GateIndexZero,
    #[error("window geometry invalid: commit region must contain at least one round")]
    InvalidGeometry,
    #[error("total of {total} rounds is smaller than one commit region ({commit} rounds)")]
    TotalTooSmall { total: u64, commit: u64 },
    #[error("feedforward schedule exceeds the horizon at gate {gate}")]
    ScheduleExceedsHorizon { gate: u32 },
    #[error("headroom factor must be at least 1, got {0}")]
    HeadroomBelowOne(f64),
    #[error("no capacity anchor for ({qubits} qubits, depth {depth})")]
    UnknownAnchor { qubits: u64, depth: f64 },
    #[error("syndrome round {round} has width {width}, expected {expected}")]
    MalformedSyndrome {
        round: usize,
        width: usize,
        expected: usize,
    },
}
