use crate::{FrameError, LoopbackPayload};

/// Frame magic: "NQLK".
pub const FRAME_MAGIC: [u8; 4] = *b"NQLK";

/// Wire protocol version this codec speaks.
pub const FRAME_VERSION: u8 = 1;

/// Fixed header size: magic(4) + version(1) + msg_type(1) + flags(2) +
/// seq(4) + timestamp(8) + payload_len(2).
pub const FRAME_HEADER_BYTES: usize = 22;

/// Upper bound on payload length.
pub const MAX_PAYLOAD_BYTES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Loopback = 0,
    Syndrome = 1,
    CallbackRequest = 2,
    CallbackResponse = 3,
    Control = 4,
}

impl MsgType {
    pub fn from_u8(value: u8) -> Result<Self, FrameError> {
        Ok(match value {
            0 => MsgType::Loopback,
            1 => MsgType::Syndrome,
            2 => MsgType::CallbackRequest,
            3 => MsgType::CallbackResponse,
            4 => MsgType::Control,
            other => return Err(FrameError::UnknownMsgType(other)),
        })
    }
}

/// Wire envelope. All multi-byte header fields are big-endian. Sequence
/// numbers increase by exactly one per frame per (sender, msg_type) stream;
/// receivers report gaps rather than repairing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: MsgType,
    pub flags: u16,
    pub seq: u32,
    pub timestamp_ns: u64,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn loopback(seq: u32, timestamp_ns: u64, payload: &LoopbackPayload) -> Frame {
        Frame {
            msg_type: MsgType::Loopback,
            flags: 0,
            seq,
            timestamp_ns,
            payload: payload.encode().to_vec(),
        }
    }
}

/// Serializes a frame. Fails only if the payload violates the size bound or
/// a loopback payload is malformed.
pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, FrameError> {
    if frame.payload.len() > MAX_PAYLOAD_BYTES {
        return Err(FrameError::PayloadTooLarge(frame.payload.len()));
    }
    if frame.msg_type == MsgType::Loopback {
        LoopbackPayload::decode(&frame.payload)?;
    }
    let mut out = Vec::with_capacity(FRAME_HEADER_BYTES + frame.payload.len());
    out.extend_from_slice(&FRAME_MAGIC);
    out.push(FRAME_VERSION);
    out.push(frame.msg_type as u8);
    out.extend_from_slice(&frame.flags.to_be_bytes());
    out.extend_from_slice(&frame.seq.to_be_bytes());
    out.extend_from_slice(&frame.timestamp_ns.to_be_bytes());
    out.extend_from_slice(&(frame.payload.len() as u16).to_be_bytes());
    out.extend_from_slice(&frame.payload);
    Ok(out)
}

/// Parses one frame from exactly `bytes`. Total on arbitrary input: returns
/// a structured error or a frame that re-encodes to the same bytes.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    if bytes.len() < FRAME_HEADER_BYTES {
        return Err(FrameError::TruncatedHeader(bytes.len()));
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != FRAME_MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    if bytes[4] != FRAME_VERSION {
        return Err(FrameError::UnsupportedVersion(bytes[4]));
    }
    let msg_type = MsgType::from_u8(bytes[5])?;
    let flags = u16::from_be_bytes(bytes[6..8].try_into().unwrap());
    let seq = u32::from_be_bytes(bytes[8..12].try_into().unwrap());
    let timestamp_ns = u64::from_be_bytes(bytes[12..20].try_into().unwrap());
    let declared = u16::from_be_bytes(bytes[20..22].try_into().unwrap()) as usize;
    let actual = bytes.len() - FRAME_HEADER_BYTES;
    if declared != actual {
        return Err(FrameError::PayloadLenMismatch { declared, actual });
    }
    if declared > MAX_PAYLOAD_BYTES {
        return Err(FrameError::PayloadTooLarge(declared));
    }
    let payload = bytes[FRAME_HEADER_BYTES..].to_vec();
    if msg_type == MsgType::Loopback {
        LoopbackPayload::decode(&payload)?;
    }
    Ok(Frame {
        msg_type,
        flags,
        seq,
        timestamp_ns,
        payload,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LOOPBACK_PAYLOAD_BYTES;

    fn zero_loopback() -> Frame {
        Frame::loopback(0, 0, &LoopbackPayload::new(0, 0).unwrap())
    }

    #[test]
    fn golden_loopback_frame() {
        let bytes = encode_frame(&zero_loopback()).unwrap();
        assert_eq!(bytes.len(), FRAME_HEADER_BYTES + LOOPBACK_PAYLOAD_BYTES);
        assert_eq!(&bytes[0..4], &[0x4E, 0x51, 0x4C, 0x4B]);
        assert_eq!(bytes[4], 1); // version
        assert_eq!(bytes[5], 0); // loopback
        assert!(bytes[6..20].iter().all(|&b| b == 0));
        assert_eq!(&bytes[20..22], &[0x00, 0x20]); // payload_len = 32
        assert!(bytes[22..].iter().all(|&b| b == 0));
    }

    #[test]
    fn decode_inverts_encode_field_for_field() {
        let frame = Frame {
            msg_type: MsgType::Syndrome,
            flags: 0xBEEF,
            seq: 12345,
            timestamp_ns: 0x1122_3344_5566_7788,
            payload: vec![9, 8, 7],
        };
        let bytes = encode_frame(&frame).unwrap();
        assert_eq!(decode_frame(&bytes).unwrap(), frame);
    }

    #[test]
    fn truncation_reports_payload_len_mismatch() {
        let bytes = encode_frame(&zero_loopback()).unwrap();
        let err = decode_frame(&bytes[..bytes.len() - 1]).unwrap_err();
        assert_eq!(
            err,
            FrameError::PayloadLenMismatch {
                declared: 32,
                actual: 31
            }
        );
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = encode_frame(&zero_loopback()).unwrap();
        bytes[0] = b'X';
        assert!(matches!(decode_frame(&bytes), Err(FrameError::BadMagic(_))));
    }

    #[test]
    fn nonzero_loopback_padding_rejected_on_decode() {
        let mut bytes = encode_frame(&zero_loopback()).unwrap();
        bytes[FRAME_HEADER_BYTES + 20] = 1;
        assert_eq!(
            decode_frame(&bytes),
            Err(FrameError::NonzeroLoopbackPadding)
        );
    }

    #[test]
    fn oversized_payload_rejected_on_encode() {
        let frame = Frame {
            msg_type: MsgType::Control,
            flags: 0,
            seq: 0,
            timestamp_ns: 0,
            payload: vec![0; MAX_PAYLOAD_BYTES + 1],
        };
        assert!(matches!(
            encode_frame(&frame),
            Err(FrameError::PayloadTooLarge(_))
        ));
    }
}
