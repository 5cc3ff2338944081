/// Frame codec errors. Decoding arbitrary bytes must never panic; every
/// malformed input maps to one of these.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("buffer of {0} bytes is shorter than the frame header")]
    TruncatedHeader(usize),
    #[error("bad magic {0:02X?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown message type {0}")]
    UnknownMsgType(u8),
    #[error("payload_len mismatch: header declares {declared}, buffer carries {actual}")]
    PayloadLenMismatch { declared: usize, actual: usize },
    #[error("payload of {0} bytes exceeds the {max} byte limit", max = crate::MAX_PAYLOAD_BYTES)]
    PayloadTooLarge(usize),
    #[error("loopback payload must be at least {min} bytes, got {0}", min = crate::LOOPBACK_PAYLOAD_BYTES)]
    LoopbackPayloadTooShort(usize),
    #[error("loopback payload padding must be zero")]
    NonzeroLoopbackPadding,
    #[error("timestamp does not fit in 96 bits")]
    TimestampTooWide,
}

/// Transport and statistics errors.
#[derive(Debug, thiserror::Error)]
pub enum RtError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("packet count must be between 1 and {max}, got {got}", max = crate::MAX_PACKETS_PER_RUN)]
    PacketCountOutOfRange { got: u64 },
    #[error("loopback payload size must be at least {min} bytes", min = crate::LOOPBACK_PAYLOAD_BYTES)]
    PayloadSizeTooSmall,
    #[error("no echoes received within the timeout")]
    NoEchoes,
    #[error("statistics need at least one sample")]
    EmptySamples,
    #[error("histogram would need {0} bins; choose a wider bin width")]
    HistogramTooWide(u64),
    #[error("echo endpoint unavailable: {0}")]
    Endpoint(String),
}
