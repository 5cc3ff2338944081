use crate::FrameError;

/// Serialized size of the loopback payload.
pub const LOOPBACK_PAYLOAD_BYTES: usize = 32;

const TIMESTAMP_BYTES: usize = 12;
const MAX_TIMESTAMP: u128 = (1u128 << 96) - 1;

/// The 32-byte loopback payload: a 96-bit nanosecond timestamp in bytes
/// 0–11 (big-endian), a 16-bit packet number in bytes 12–13 (big-endian),
/// and 18 zero bytes of padding. The decoder rejects nonzero padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopbackPayload {
    timestamp_ns: u128,
    pub packet_number: u16,
}

impl LoopbackPayload {
    pub fn new(timestamp_ns: u128, packet_number: u16) -> Result<Self, FrameError> {
        if timestamp_ns > MAX_TIMESTAMP {
            return Err(FrameError::TimestampTooWide);
        }
        Ok(LoopbackPayload {
            timestamp_ns,
            packet_number,
        })
    }

    pub fn timestamp_ns(&self) -> u128 {
        self.timestamp_ns
    }

    pub fn encode(&self) -> [u8; LOOPBACK_PAYLOAD_BYTES] {
        let mut out = [0u8; LOOPBACK_PAYLOAD_BYTES];
        out[..TIMESTAMP_BYTES].copy_from_slice(&self.timestamp_ns.to_be_bytes()[4..]);
        out[TIMESTAMP_BYTES..TIMESTAMP_BYTES + 2].copy_from_slice(&self.packet_number.to_be_bytes());
        out
    }

    /// Decodes the payload from the first 32 bytes of `bytes`. Any bytes
    /// past the packet number — padding inside the 32-byte layout and any
    /// extension beyond it — must be zero.
    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < LOOPBACK_PAYLOAD_BYTES {
            return Err(FrameError::LoopbackPayloadTooShort(bytes.len()));
        }
        if bytes[TIMESTAMP_BYTES + 2..].iter().any(|&b| b != 0) {
            return Err(FrameError::NonzeroLoopbackPadding);
        }
        let mut ts = [0u8; 16];
        ts[4..].copy_from_slice(&bytes[..TIMESTAMP_BYTES]);
        Ok(LoopbackPayload {
            timestamp_ns: u128::from_be_bytes(ts),
            packet_number: u16::from_be_bytes([bytes[12], bytes[13]]),
        })
    }
}
